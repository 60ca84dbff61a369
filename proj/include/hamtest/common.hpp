// Copyright 2026 The hamtest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hamtest {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ResourceError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct ArgumentError : Error {
  using Error::Error;
};
struct InvalidGroupError : Error {
  using Error::Error;
};
struct InternalError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};

namespace detail {
inline std::atomic<int>& dense_cap_storage() {
  static std::atomic<int> cap{10};
  return cap;
}
}  // namespace detail

/// Largest qubit count for which dense 2^n x 2^n objects are built.
inline int dense_qubit_cap() { return detail::dense_cap_storage().load(); }
inline void set_dense_qubit_cap(int cap) {
  if (cap < 1 || cap > 14) throw ArgumentError("dense qubit cap must lie in [1, 14]");
  detail::dense_cap_storage().store(cap);
}

inline void require_dense(int n, const char* what) {
  if (n > dense_qubit_cap()) {
    throw ResourceError(std::string(what) + ": " + std::to_string(n) + " qubits exceeds dense cap " +
                        std::to_string(dense_qubit_cap()));
  }
}

inline std::size_t dim_of(int n) { return std::size_t{1} << n; }

// SplitMix64 finaliser; the building block of the counter-based generator.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent key from a parent seed and a stream label.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: output k is a pure function of (key, k).
/// Distributions are implemented here rather than via <random> so that
/// streams are bit-identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : key_(derive_seed(seed, stream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return mix64(key_ ^ mix64(counter_++)); }

  /// Substream for an index, independent of this generator's position.
  Rng substream(std::uint64_t index) const { return Rng(key_, index + 1); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw ArgumentError("Rng::below with zero bound");
    std::uint64_t limit = max() - max() % bound;
    for (;;) {
      std::uint64_t v = (*this)();
      if (v < limit) return v % bound;
    }
  }

  /// Standard normal by Box-Muller (one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Complex Gaussian with E|z|^2 = 1.
  cplx complex_normal() { return {normal() * std::sqrt(0.5), normal() * std::sqrt(0.5)}; }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace hamtest
