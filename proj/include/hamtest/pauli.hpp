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
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "hamtest/common.hpp"

namespace hamtest {

inline constexpr int kMaxPauliQubits = 64;

/// Unsigned n-qubit Pauli string in symplectic form. Bit q of each word is
/// qubit q, and qubit 0 is the leftmost tensor factor.
class PauliString {
 public:
  PauliString() = default;

  explicit PauliString(int n) : n_(check_n(n)) {}

  PauliString(int n, std::uint64_t x, std::uint64_t z) : n_(check_n(n)), x_(x), z_(z) {
    std::uint64_t m = mask();
    if ((x & ~m) || (z & ~m)) throw DimensionError("Pauli bits set beyond qubit count");
  }

  static PauliString identity(int n) { return PauliString(n); }

  static PauliString single(int n, int qubit, char op) {
    if (qubit < 0 || qubit >= n) throw DimensionError("qubit index out of range");
    PauliString p(n);
    p.set(qubit, op);
    return p;
  }

  /// Parses a literal such as "XIZ". Signs are handled by SignedPauli::parse.
  static PauliString parse(std::string_view text) {
    if (text.empty()) throw ValidationError("empty Pauli literal");
    PauliString p(static_cast<int>(text.size()));
    for (int q = 0; q < p.n_; ++q) p.set(q, text[q]);
    return p;
  }

  /// Inverse of key().
  static PauliString from_key(int n, std::uint64_t key) {
    PauliString p(n);
    for (int q = 0; q < n; ++q) {
      int pos = n - 1 - q;
      p.x_ |= ((key >> (2 * pos)) & 1ULL) << q;
      p.z_ |= ((key >> (2 * pos + 1)) & 1ULL) << q;
    }
    return p;
  }

  int qubits() const { return n_; }
  std::uint64_t x_bits() const { return x_; }
  std::uint64_t z_bits() const { return z_; }
  bool x(int q) const { return (x_ >> q) & 1ULL; }
  bool z(int q) const { return (z_ >> q) & 1ULL; }

  char op(int q) const {
    static constexpr char kOps[4] = {'I', 'X', 'Z', 'Y'};
    return kOps[int(x(q)) | (int(z(q)) << 1)];
  }

  void set(int q, char op) {
    if (q < 0 || q >= n_) throw DimensionError("qubit index out of range");
    std::uint64_t b = 1ULL << q;
    x_ &= ~b;
    z_ &= ~b;
    switch (op) {
      case 'I': break;
      case 'X': x_ |= b; break;
      case 'Z': z_ |= b; break;
      case 'Y': x_ |= b; z_ |= b; break;
      default: throw ValidationError(std::string("invalid Pauli letter '") + op + "'");
    }
  }

  bool is_identity() const { return (x_ | z_) == 0; }
  int weight() const { return std::popcount(x_ | z_); }

  /// Key realising the canonical order: per qubit I < X < Z < Y, qubit 0 most
  /// significant. XOR of Paulis is XOR of keys. Requires n <= 32.
  std::uint64_t key() const {
    if (n_ > 32) throw ResourceError("Pauli key needs n <= 32");
    std::uint64_t k = 0;
    for (int q = 0; q < n_; ++q) {
      int pos = n_ - 1 - q;
      k |= std::uint64_t(x(q)) << (2 * pos);
      k |= std::uint64_t(z(q)) << (2 * pos + 1);
    }
    return k;
  }

  std::string str() const {
    std::string s(n_, 'I');
    for (int q = 0; q < n_; ++q) s[q] = op(q);
    return s;
  }

  /// Product in the phase-free quotient group.
  PauliString operator*(const PauliString& o) const {
    same_n(o);
    return PauliString(n_, x_ ^ o.x_, z_ ^ o.z_, Unchecked{});
  }

  /// Tensor product with `o` placed on the trailing qubits.
  PauliString tensor(const PauliString& o) const {
    int m = n_ + o.n_;
    check_n(m);
    return PauliString(m, x_ | (o.x_ << n_), z_ | (o.z_ << n_), Unchecked{});
  }

  void same_n(const PauliString& o) const {
    if (n_ != o.n_) {
      throw DimensionError("Pauli qubit counts differ: " + std::to_string(n_) + " vs " +
                           std::to_string(o.n_));
    }
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

  friend std::strong_ordering operator<=>(const PauliString& a, const PauliString& b) {
    if (auto c = a.n_ <=> b.n_; c != 0) return c;
    for (int q = 0; q < a.n_; ++q) {
      int ca = int(a.x(q)) | (int(a.z(q)) << 1);
      int cb = int(b.x(q)) | (int(b.z(q)) << 1);
      if (ca != cb) return ca <=> cb;
    }
    return std::strong_ordering::equal;
  }

 private:
  struct Unchecked {};
  PauliString(int n, std::uint64_t x, std::uint64_t z, Unchecked) : n_(n), x_(x), z_(z) {}

  static int check_n(int n) {
    if (n < 0 || n > kMaxPauliQubits) throw ResourceError("Pauli strings support 0..64 qubits");
    return n;
  }
  std::uint64_t mask() const { return n_ == 64 ? ~0ULL : ((1ULL << n_) - 1); }

  int n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

inline int pauli_weight(const PauliString& p) { return p.weight(); }

/// p∘q: 0 when the Paulis commute, 1 when they anticommute.
inline int commutation_bit(const PauliString& p, const PauliString& q) {
  p.same_n(q);
  return std::popcount((p.x_bits() & q.z_bits()) ^ (p.z_bits() & q.x_bits())) & 1;
}

/// i^phase times the Hermitian Pauli string, with Y = iXZ.
struct SignedPauli {
  PauliString pauli;
  int phase = 0;

  SignedPauli() = default;
  SignedPauli(PauliString p, int ph = 0) : pauli(p), phase(((ph % 4) + 4) % 4) {}

  int qubits() const { return pauli.qubits(); }
  bool is_real() const { return phase % 2 == 0; }

  static SignedPauli parse(std::string_view text) {
    int ph = 0;
    if (text.starts_with("+")) {
      text.remove_prefix(1);
    } else if (text.starts_with("-")) {
      ph = 2;
      text.remove_prefix(1);
    }
    if (text.starts_with("i")) {
      ph += 1;
      text.remove_prefix(1);
    }
    return SignedPauli(PauliString::parse(text), ph);
  }

  std::string str() const {
    static constexpr const char* kPrefix[4] = {"+", "i", "-", "-i"};
    return kPrefix[phase] + pauli.str();
  }

  friend bool operator==(const SignedPauli&, const SignedPauli&) = default;
};

inline SignedPauli pauli_multiply(const SignedPauli& a, const SignedPauli& b) {
  a.pauli.same_n(b.pauli);
  std::uint64_t x1 = a.pauli.x_bits(), z1 = a.pauli.z_bits();
  std::uint64_t x2 = b.pauli.x_bits(), z2 = b.pauli.z_bits();
  std::uint64_t x3 = x1 ^ x2, z3 = z1 ^ z2;
  // P(x,z) = i^{x.z} X^x Z^z per qubit; moving Z^{z1} past X^{x2} costs (-1)^{z1.x2}.
  int ph = a.phase + b.phase + std::popcount(x1 & z1) + std::popcount(x2 & z2) +
           2 * std::popcount(z1 & x2) - std::popcount(x3 & z3);
  return SignedPauli(PauliString(a.qubits(), x3, z3), ph);
}

inline SignedPauli operator*(const SignedPauli& a, const SignedPauli& b) { return pauli_multiply(a, b); }

namespace detail {
/// Reverses the low n bits: qubit masks to computational-basis index masks.
inline std::uint64_t index_mask(std::uint64_t qubit_mask, int n) {
  std::uint64_t r = 0;
  for (int q = 0; q < n; ++q) r |= ((qubit_mask >> q) & 1ULL) << (n - 1 - q);
  return r;
}

inline cplx i_pow(int k) {
  static const cplx kPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return kPow[((k % 4) + 4) % 4];
}
}  // namespace detail

/// out = P |in>, O(d). Basis index bit (n-1-q) belongs to qubit q.
inline void apply_pauli(const SignedPauli& p, const cplx* in, cplx* out, int n) {
  std::uint64_t xm = detail::index_mask(p.pauli.x_bits(), n);
  std::uint64_t zm = detail::index_mask(p.pauli.z_bits(), n);
  cplx base = detail::i_pow(p.phase + std::popcount(p.pauli.x_bits() & p.pauli.z_bits()));
  std::size_t d = dim_of(n);
  for (std::size_t b = 0; b < d; ++b) {
    cplx v = base * in[b];
    out[b ^ xm] = (std::popcount(zm & b) & 1) ? -v : v;
  }
}

inline Vector apply_pauli(const SignedPauli& p, const Vector& v) {
  int n = p.qubits();
  if (static_cast<std::size_t>(v.size()) != dim_of(n)) throw DimensionError("vector size does not match Pauli");
  Vector out(v.size());
  apply_pauli(p, v.data(), out.data(), n);
  return out;
}

inline Matrix pauli_to_matrix(const SignedPauli& p) {
  int n = p.qubits();
  require_dense(n, "pauli_to_matrix");
  std::size_t d = dim_of(n);
  std::uint64_t xm = detail::index_mask(p.pauli.x_bits(), n);
  std::uint64_t zm = detail::index_mask(p.pauli.z_bits(), n);
  cplx base = detail::i_pow(p.phase + std::popcount(p.pauli.x_bits() & p.pauli.z_bits()));
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t b = 0; b < d; ++b) m(b ^ xm, b) = (std::popcount(zm & b) & 1) ? -base : base;
  return m;
}

inline Matrix pauli_to_matrix(const PauliString& p) { return pauli_to_matrix(SignedPauli(p)); }

}  // namespace hamtest
