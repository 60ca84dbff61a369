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

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hamtest/pauli.hpp"

namespace hamtest {

inline double hermitian_defect(const Matrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// ‖M‖_∞ of a Hermitian matrix from its full spectrum.
inline double hermitian_operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return hermitian_eigenvalues(m).cwiseAbs().maxCoeff();
}

/// A Hermitian matrix; construction validates the Hermitian property.
struct DenseHamiltonian {
  int n = 0;
  Matrix matrix;

  DenseHamiltonian() = default;
  DenseHamiltonian(int qubits, Matrix m) : n(qubits), matrix(std::move(m)) {
    if (static_cast<std::size_t>(matrix.rows()) != dim_of(n) || matrix.rows() != matrix.cols()) {
      throw DimensionError("dense Hamiltonian must be 2^n x 2^n");
    }
    double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if (hermitian_defect(matrix) > 1e-12 * scale) throw ValidationError("matrix is not Hermitian");
    matrix = 0.5 * (matrix + matrix.adjoint()).eval();
  }

  std::size_t dim() const { return dim_of(n); }
};

/// Sparse real Pauli expansion, identity excluded. Zero coefficients are not stored.
class PauliHamiltonian {
 public:
  PauliHamiltonian() = default;
  explicit PauliHamiltonian(int n) : n_(n) {}

  int qubits() const { return n_; }
  const std::map<PauliString, double>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  void set(const PauliString& p, double c) {
    if (p.qubits() != n_) throw DimensionError("term qubit count differs from Hamiltonian");
    if (p.is_identity()) throw ValidationError("identity coefficient is not representable");
    if (c == 0.0) {
      terms_.erase(p);
    } else {
      terms_[p] = c;
    }
  }

  void add(const PauliString& p, double c) { set(p, coefficient(p) + c); }

  double coefficient(const PauliString& p) const {
    auto it = terms_.find(p);
    return it == terms_.end() ? 0.0 : it->second;
  }

  PauliHamiltonian scaled(double s) const {
    PauliHamiltonian h(n_);
    for (const auto& [p, c] : terms_) h.set(p, c * s);
    return h;
  }

  /// Σ α_P^2, which equals (1/d)‖H‖_2^2.
  double coefficient_norm_sq() const {
    double s = 0;
    for (const auto& [p, c] : terms_) s += c * c;
    return s;
  }

  double l1_norm() const {
    double s = 0;
    for (const auto& [p, c] : terms_) s += std::abs(c);
    return s;
  }

  friend bool operator==(const PauliHamiltonian&, const PauliHamiltonian&) = default;

 private:
  int n_ = 0;
  std::map<PauliString, double> terms_;
};

inline DenseHamiltonian hamiltonian_to_dense(const PauliHamiltonian& h) {
  int n = h.qubits();
  require_dense(n, "hamiltonian_to_dense");
  std::size_t d = dim_of(n);
  Matrix m = Matrix::Zero(d, d);
  for (const auto& [p, c] : h.terms()) {
    std::uint64_t xm = detail::index_mask(p.x_bits(), n);
    std::uint64_t zm = detail::index_mask(p.z_bits(), n);
    cplx base = c * detail::i_pow(std::popcount(p.x_bits() & p.z_bits()));
    for (std::size_t b = 0; b < d; ++b) m(b ^ xm, b) += (std::popcount(zm & b) & 1) ? -base : base;
  }
  return DenseHamiltonian(n, std::move(m));
}

namespace detail {
inline void walsh_hadamard(std::vector<cplx>& v) {
  for (std::size_t h = 1; h < v.size(); h <<= 1) {
    for (std::size_t a = 0; a < v.size(); a += 2 * h) {
      for (std::size_t b = a; b < a + h; ++b) {
        cplx u = v[b], w = v[b + h];
        v[b] = u + w;
        v[b + h] = u - w;
      }
    }
  }
}
}  // namespace detail

/// α_P = Tr(HP)/d for every P, in O(d^2 log d) by one Walsh-Hadamard
/// transform per X-mask. Coefficients below `drop` in modulus are omitted.
inline PauliHamiltonian pauli_decompose(const DenseHamiltonian& h, double drop = 1e-14) {
  int n = h.n;
  std::size_t d = h.dim();
  double scale = std::max(1.0, h.matrix.cwiseAbs().maxCoeff());
  if (hermitian_defect(h.matrix) > 1e-10 * scale) throw ValidationError("pauli_decompose needs a Hermitian matrix");
  if (std::abs(h.matrix.trace()) / static_cast<double>(d) > 1e-10 * scale) {
    throw ValidationError("pauli_decompose needs a traceless matrix; identity terms are not representable");
  }
  PauliHamiltonian out(n);
  std::vector<cplx> f(d);
  for (std::size_t xm = 0; xm < d; ++xm) {
    // Tr(P M) = i^{|x&z|} Σ_c (-1)^{z.c} M[c][c^x] in index-bit masks.
    for (std::size_t c = 0; c < d; ++c) f[c] = h.matrix(c, c ^ xm);
    detail::walsh_hadamard(f);
    for (std::size_t zm = 0; zm < d; ++zm) {
      if (xm == 0 && zm == 0) continue;
      double alpha = (detail::i_pow(std::popcount(xm & zm)) * f[zm]).real() / static_cast<double>(d);
      if (std::abs(alpha) <= drop) continue;
      out.set(PauliString(n, detail::index_mask(xm, n), detail::index_mask(zm, n)), alpha);
    }
  }
  return out;
}

/// The subset S defining Π_S. The identity is never stored.
class PropertySet {
 public:
  PropertySet() = default;
  explicit PropertySet(int n) : n_(n) {}
  PropertySet(int n, const std::vector<PauliString>& paulis) : n_(n) {
    for (const auto& p : paulis) insert(p);
  }

  int qubits() const { return n_; }
  const std::set<PauliString>& paulis() const { return paulis_; }
  std::size_t size() const { return paulis_.size(); }
  std::size_t size_with_identity() const { return paulis_.size() + 1; }
  bool empty() const { return paulis_.empty(); }
  bool contains(const PauliString& p) const { return paulis_.count(p) > 0; }

  void insert(const PauliString& p) {
    if (p.qubits() != n_) throw DimensionError("property Pauli qubit count mismatch");
    if (!p.is_identity()) paulis_.insert(p);
  }

  /// S ⊗ I on n + n_aux qubits.
  PropertySet lifted(int n_aux) const {
    PropertySet out(n_ + n_aux);
    PauliString id(n_aux);
    for (const auto& p : paulis_) out.insert(p.tensor(id));
    return out;
  }

  friend bool operator==(const PropertySet&, const PropertySet&) = default;

 private:
  int n_ = 0;
  std::set<PauliString> paulis_;
};

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

/// Σ_{s=1..k} C(n,s) 3^s.
inline std::uint64_t k_local_count(int n, int k) {
  std::uint64_t total = 0, pow3 = 1;
  for (int s = 1; s <= k; ++s) {
    pow3 *= 3;
    total += binomial(n, s) * pow3;
  }
  return total;
}

inline PropertySet property_k_local(int n, int k) {
  if (k < 0 || k > n) throw ArgumentError("property_k_local needs 0 <= k <= n");
  if (n > 16) throw ResourceError("property_k_local enumerates 4^n strings; n <= 16");
  PropertySet s(n);
  std::uint64_t m = n == 64 ? ~0ULL : (1ULL << n) - 1;
  for (std::uint64_t x = 0; x <= m; ++x) {
    for (std::uint64_t z = 0; z <= m; ++z) {
      if (std::popcount(x | z) <= k) s.insert(PauliString(n, x, z));
    }
  }
  return s;
}

inline double distance_to_property(const PauliHamiltonian& h, const PropertySet& s) {
  if (h.qubits() != s.qubits()) throw DimensionError("Hamiltonian and property qubit counts differ");
  double acc = 0;
  for (const auto& [p, c] : h.terms()) {
    if (!s.contains(p)) acc += c * c;
  }
  return std::sqrt(acc);
}

inline PauliHamiltonian operator-(const PauliHamiltonian& a, const PauliHamiltonian& b) {
  if (a.qubits() != b.qubits()) throw DimensionError("Hamiltonian qubit counts differ");
  PauliHamiltonian out = a;
  for (const auto& [p, c] : b.terms()) out.add(p, -c);
  return out;
}

/// (1/√d)‖H − K‖_2 through Parseval.
inline double normalized_frobenius_distance(const PauliHamiltonian& h, const PauliHamiltonian& k) {
  return std::sqrt((h - k).coefficient_norm_sq());
}

inline double normalized_frobenius_distance(const DenseHamiltonian& h, const DenseHamiltonian& k) {
  if (h.n != k.n) throw DimensionError("Hamiltonian qubit counts differ");
  return (h.matrix - k.matrix).norm() / std::sqrt(static_cast<double>(h.dim()));
}

inline double operator_distance(const DenseHamiltonian& h, const DenseHamiltonian& k) {
  if (h.n != k.n) throw DimensionError("Hamiltonian qubit counts differ");
  return hermitian_operator_norm(h.matrix - k.matrix);
}

inline double operator_distance(const PauliHamiltonian& h, const PauliHamiltonian& k) {
  return operator_distance(hamiltonian_to_dense(h), hamiltonian_to_dense(k));
}

inline double operator_norm(const PauliHamiltonian& h) {
  return hermitian_operator_norm(hamiltonian_to_dense(h).matrix);
}

/// Null-instance generator: uniform [-1, 1] coefficients on S, divided by ‖H‖_∞
/// (or by the l1 bound above the dense cap).
inline PauliHamiltonian random_property_hamiltonian(const PropertySet& s, std::uint64_t seed) {
  if (s.empty()) throw ArgumentError("random_property_hamiltonian needs a nonempty property set");
  Rng rng(seed, 0x6e756c6cULL);
  PauliHamiltonian h(s.qubits());
  for (const auto& p : s.paulis()) {
    double c = rng.uniform(-1.0, 1.0);
    if (c != 0.0) h.set(p, c);
  }
  double norm = s.qubits() <= dense_qubit_cap() ? operator_norm(h) : h.l1_norm();
  return norm > 0 ? h.scaled(1.0 / norm) : h;
}

/// Haar-random unit vector in C^d.
inline Vector haar_vector(std::size_t d, Rng& rng) {
  Vector v(d);
  for (std::size_t k = 0; k < d; ++k) v[k] = rng.complex_normal();
  return v / v.norm();
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of diag(R) removed.
inline Matrix haar_unitary(std::size_t d, Rng& rng) {
  if (d < 1) throw ArgumentError("haar_unitary needs d >= 1");
  Matrix g(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < d; ++r) g(r, c) = rng.complex_normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (std::size_t k = 0; k < d; ++k) {
    cplx rk = r(k, k);
    q.col(k) *= rk / std::abs(rk);
  }
  return q;
}

/// η(|v><v| − I/d) with Haar-random |v>.
inline DenseHamiltonian spiked_gadget(int n, double eta, std::uint64_t seed) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ArgumentError("spiked_gadget needs 0 < eta <= 1");
  require_dense(n, "spiked_gadget");
  std::size_t d = dim_of(n);
  Rng rng(seed, 0x7370696bULL);
  Vector v = haar_vector(d, rng);
  Matrix m = eta * (v * v.adjoint() - Matrix::Identity(d, d) / static_cast<double>(d));
  return DenseHamiltonian(n, std::move(m));
}

inline DenseHamiltonian learning_gadget_from(int n, double eps, const Matrix& u) {
  std::size_t d = dim_of(n);
  Eigen::VectorXd o(d);
  for (std::size_t k = 0; k < d; ++k) o[k] = k < d / 2 ? 1.0 : -1.0;
  Matrix m = eps * u * o.cast<cplx>().asDiagonal() * u.adjoint();
  return DenseHamiltonian(n, std::move(m));
}

/// εUOU† with Haar U and O = diag(+1, ..., +1, −1, ..., −1).
inline DenseHamiltonian learning_gadget(int n, double eps, std::uint64_t seed) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ArgumentError("learning_gadget needs 0 < eps <= 1");
  if (n < 1) throw ArgumentError("learning_gadget needs n >= 1");
  require_dense(n, "learning_gadget");
  Rng rng(seed, 0x6c6561726eULL);
  return learning_gadget_from(n, eps, haar_unitary(dim_of(n), rng));
}

/// Fixture: header "n <qubits>", then one "LITERAL coefficient" line per term.
/// Coefficients use %.17g so the text round-trips bit-exactly.
inline std::string hamiltonian_to_fixture(const PauliHamiltonian& h) {
  std::ostringstream os;
  os << "n " << h.qubits() << "\n";
  char buf[64];
  for (const auto& [p, c] : h.terms()) {
    std::snprintf(buf, sizeof buf, "%.17g", c);
    os << p.str() << " " << buf << "\n";
  }
  return os.str();
}

inline PauliHamiltonian hamiltonian_from_fixture(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int n = -1;
  if (!(is >> tag >> n) || tag != "n" || n < 0) throw ValidationError("Hamiltonian fixture needs an 'n <qubits>' header");
  PauliHamiltonian h(n);
  std::string lit, coeff;
  while (is >> lit >> coeff) {
    PauliString p = PauliString::parse(lit);
    if (p.qubits() != n) throw ValidationError("term '" + lit + "' has the wrong length");
    h.add(p, std::strtod(coeff.c_str(), nullptr));
  }
  return h;
}

/// One Pauli literal per line; blank lines and '#' comments are skipped.
inline PropertySet property_from_text(const std::string& text, int n = -1) {
  std::istringstream is(text);
  std::string line;
  std::vector<PauliString> ps;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string lit;
    while (ls >> lit) {
      PauliString p = SignedPauli::parse(lit).pauli;
      if (n < 0) n = p.qubits();
      if (p.qubits() != n) throw ValidationError("property literal '" + lit + "' has the wrong length");
      ps.push_back(p);
    }
  }
  if (n < 0) throw ValidationError("property file lists no Paulis");
  return PropertySet(n, ps);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace hamtest
