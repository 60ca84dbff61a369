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

#include <bit>
#include <cstdint>

#include "hamtest/common.hpp"

namespace hamtest {

/// Arithmetic in GF(2^n) in the polynomial basis {1, x, ..., x^{n-1}}.
class GF2n {
 public:
  explicit GF2n(int n) : n_(n) {
    if (n < 1 || n > 31) throw ResourceError("GF(2^n) supports 1 <= n <= 31");
    modulus_ = smallest_irreducible(n);
  }

  int degree() const { return n_; }
  std::uint64_t modulus() const { return modulus_; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t r = 0;
    while (b) {
      if (b & 1) r ^= a;
      b >>= 1;
      a <<= 1;
      if (a >> n_ & 1) a ^= modulus_;
    }
    return r;
  }

  /// Absolute trace to GF(2): a + a^2 + a^4 + ... + a^{2^{n-1}}.
  int trace(std::uint64_t a) const {
    std::uint64_t s = 0, p = a;
    for (int k = 0; k < n_; ++k) {
      s ^= p;
      p = mul(p, p);
    }
    if (s > 1) throw InternalError("trace left GF(2)");
    return static_cast<int>(s);
  }

  /// Remainder of polynomial a modulo polynomial m over GF(2).
  static std::uint64_t poly_mod(std::uint64_t a, std::uint64_t m) {
    int dm = std::bit_width(m) - 1;
    for (int da = std::bit_width(a) - 1; da >= dm; da = std::bit_width(a) - 1) a ^= m << (da - dm);
    return a;
  }

  static bool irreducible(std::uint64_t poly) {
    int deg = std::bit_width(poly) - 1;
    for (int dg = 1; 2 * dg <= deg; ++dg) {
      for (std::uint64_t g = 1ULL << dg; g < (2ULL << dg); ++g) {
        if (poly_mod(poly, g) == 0) return false;
      }
    }
    return true;
  }

  static std::uint64_t smallest_irreducible(int n) {
    for (std::uint64_t c = 0; c < (1ULL << n); ++c) {
      std::uint64_t poly = (1ULL << n) | c;
      if (irreducible(poly)) return poly;
    }
    throw InternalError("no irreducible polynomial found");
  }

 private:
  int n_;
  std::uint64_t modulus_ = 0;
};

}  // namespace hamtest
