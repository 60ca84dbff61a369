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
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hamtest/hamiltonian.hpp"
#include "hamtest/stabilizer_mub.hpp"

namespace hamtest {

/// φ_{i,ℓ} ∼_S φ_{i,j}: some q ∈ S ∪ {I} has r_ℓ r_j q ∈ G_i.
inline bool relates_under_property(const MubFamily& f, std::size_t i, std::size_t j, std::size_t l,
                                   const PropertySet& s) {
  if (s.qubits() != f.qubits()) throw DimensionError("property and family qubit counts differ");
  PauliString r = f.label(i, l) * f.label(i, j);
  if (f.contains(i, r)) return true;
  for (const auto& q : s.paulis()) {
    if (f.contains(i, r * q)) return true;
  }
  return false;
}

/// Eigendecomposition of H plus a cache of e^{itH} keyed by t. Shared by
/// every oracle built on the same instance.
class SpectralEvolution {
 public:
  explicit SpectralEvolution(const DenseHamiltonian& h) : n_(h.n) {
    require_dense(h.n, "SpectralEvolution");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix);
    if (es.info() != Eigen::Success) throw InternalError("Hermitian eigensolver failed");
    vectors_ = es.eigenvectors();
    values_ = es.eigenvalues();
  }

  int qubits() const { return n_; }
  const Eigen::VectorXd& eigenvalues() const { return values_; }

  Matrix compute(double t) const {
    Eigen::VectorXcd phases(values_.size());
    for (Eigen::Index k = 0; k < values_.size(); ++k) phases[k] = std::polar(1.0, t * values_[k]);
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
  }

  /// e^{itH}, computed once per distinct t.
  std::shared_ptr<const Matrix> unitary(double t) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    auto u = std::make_shared<const Matrix>(compute(t));
    cache_.emplace(t, u);
    return u;
  }

 private:
  int n_;
  Matrix vectors_;
  Eigen::VectorXd values_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const Matrix>> cache_;
};

inline Matrix evolve_unitary(const DenseHamiltonian& h, double t) {
  if (!std::isfinite(t)) throw ArgumentError("evolution time must be finite");
  return SpectralEvolution(h).compute(t);
}

inline Matrix evolve_unitary(int n, const Matrix& h, double t) {
  return evolve_unitary(DenseHamiltonian(n, h), t);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

inline Matrix evolve_with_ancilla(const DenseHamiltonian& h, double t, int n_aux) {
  if (n_aux < 0) throw ArgumentError("n_aux must be nonnegative");
  if (h.n + n_aux > dense_qubit_cap()) {
    throw ResourceError("evolve_with_ancilla: n + n_aux = " + std::to_string(h.n + n_aux) + " exceeds dense cap " +
                        std::to_string(dense_qubit_cap()));
  }
  Matrix u = evolve_unitary(h, t);
  if (n_aux == 0) return u;
  return kron(u, Matrix::Identity(dim_of(n_aux), dim_of(n_aux)));
}

/// (U ⊗ I_aux)|psi>, with the system on the leading qubits.
inline Vector apply_system_unitary(const Matrix& u, const Vector& psi, int n_aux) {
  if (n_aux == 0) return u * psi;
  Eigen::Index da = static_cast<Eigen::Index>(dim_of(n_aux));
  Eigen::Map<const Matrix> in(psi.data(), da, u.rows());
  Vector out(psi.size());
  Eigen::Map<Matrix> res(out.data(), da, u.rows());
  res.noalias() = in * u.transpose();
  return out;
}

namespace detail {

inline int x_rank(const StabilizerGroup& g) {
  EchelonBasis b;
  int r = 0;
  for (const auto& gen : g.generators) r += b.insert(gen.pauli.x_bits());
  return r;
}

/// O(d log d) route for groups whose X parts have rank n (basis {Z^c|φ_{i,0}>},
/// one Walsh-Hadamard transform) or rank 0 (computational basis). Returns
/// false for any other group.
inline bool structured_outcome_probabilities(const MubFamily& f, std::size_t i, const Vector& psi,
                                             Eigen::VectorXd& p) {
  int n = f.qubits();
  std::size_t d = f.dim();
  int rank = x_rank(f.group(i));
  if (rank == 0) {
    Vector phi0 = f.state_vector(i, 0);
    Eigen::Index x0 = 0;
    phi0.cwiseAbs().maxCoeff(&x0);
    for (std::size_t x = 0; x < d; ++x) {
      PauliString flip(n, index_mask(x ^ static_cast<std::size_t>(x0), n), 0);
      p[static_cast<Eigen::Index>(f.coset_of(i, flip))] = std::norm(psi[static_cast<Eigen::Index>(x)]);
    }
    return true;
  }
  if (rank != n) return false;
  Vector phi0 = f.state_vector(i, 0);
  std::vector<cplx> w(d);
  for (std::size_t x = 0; x < d; ++x) {
    w[x] = std::conj(phi0[static_cast<Eigen::Index>(x)]) * psi[static_cast<Eigen::Index>(x)];
  }
  walsh_hadamard(w);
  for (std::size_t m = 0; m < d; ++m) {
    PauliString zc(n, 0, index_mask(m, n));
    p[static_cast<Eigen::Index>(f.coset_of(i, zc))] = std::norm(w[m]);
  }
  return true;
}

}  // namespace detail

/// |<phi_{i,l}|psi>|^2 for every l.
inline Eigen::VectorXd outcome_probabilities(const MubFamily& f, std::size_t i, const Vector& psi) {
  std::size_t d = f.dim();
  Eigen::VectorXd p(d);
  if (f.qubits() <= kBasisCacheQubits) {
    p = (f.basis(i).adjoint() * psi).cwiseAbs2();
    return p;
  }
  if (detail::structured_outcome_probabilities(f, i, psi, p)) return p;
  // φ_{i,l} equals P(r_l)|φ_{i,0}> up to a phase, so |<φ_{i,0}|P(r_l)|psi>|^2 suffices.
  Vector phi0 = f.state_vector(i, 0);
  Vector w(d);
  for (std::size_t l = 0; l < d; ++l) {
    apply_pauli(SignedPauli(f.label(i, l)), psi.data(), w.data(), f.qubits());
    p[static_cast<Eigen::Index>(l)] = std::norm(phi0.dot(w));
  }
  return p;
}

inline Eigen::VectorXd born_distribution(const Matrix& u, const MubFamily& f, std::size_t i, std::size_t j) {
  if (static_cast<std::size_t>(u.rows()) != f.dim()) throw DimensionError("unitary and family dimensions differ");
  return outcome_probabilities(f, i, u * f.state_vector(i, j));
}

struct RoundRecord {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t ell = 0;
  double t = 0;
  bool violation = false;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

/// Black-box time-evolution access. The Hamiltonian is reachable only
/// through query(); the query log counts calls and accumulates t.
class EvolutionOracle {
 public:
  explicit EvolutionOracle(const DenseHamiltonian& h) : spectrum_(std::make_shared<const SpectralEvolution>(h)) {}
  explicit EvolutionOracle(std::shared_ptr<const SpectralEvolution> s) : spectrum_(std::move(s)) {}

  EvolutionOracle(const EvolutionOracle&) = delete;
  EvolutionOracle& operator=(const EvolutionOracle&) = delete;

  int qubits() const { return spectrum_->qubits(); }

  /// Prepares |phi_{i,j}> of `f`, evolves the leading qubits for time t,
  /// measures in basis i and returns the outcome. Extra family qubits are
  /// ancillas that the evolution leaves untouched.
  std::size_t query(const MubFamily& f, std::size_t i, std::size_t j, double t, Rng& rng) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ArgumentError("oracle queries need finite t >= 0");
    int n_aux = f.qubits() - qubits();
    if (n_aux < 0) throw DimensionError("family has fewer qubits than the Hamiltonian");
    auto u = spectrum_->unitary(t);
    Vector psi = apply_system_unitary(*u, f.state_vector(i, j), n_aux);
    Eigen::VectorXd p = outcome_probabilities(f, i, psi);
    queries_.fetch_add(1, std::memory_order_relaxed);
    total_time_.fetch_add(t, std::memory_order_relaxed);
    double target = rng.uniform() * p.sum();
    double acc = 0;
    for (Eigen::Index l = 0; l < p.size(); ++l) {
      acc += p[l];
      if (target < acc) return static_cast<std::size_t>(l);
    }
    for (Eigen::Index l = p.size() - 1; l >= 0; --l) {
      if (p[l] > 0) return static_cast<std::size_t>(l);
    }
    return 0;
  }

  std::uint64_t queries() const { return queries_.load(); }
  double total_time() const { return total_time_.load(); }

 private:
  std::shared_ptr<const SpectralEvolution> spectrum_;
  std::atomic<std::uint64_t> queries_{0};
  std::atomic<double> total_time_{0.0};
};

inline RoundRecord sample_round(EvolutionOracle& oracle, const MubFamily& f, std::size_t i, std::size_t j, double t,
                                Rng& rng) {
  RoundRecord r{i, j, 0, t, false};
  r.ell = oracle.query(f, i, j, t, rng);
  return r;
}

/// (1/(d(d+1))) Σ_{i,j,l} |<phi_{i,l}|e^{itH}|phi_{i,j}>|^2 1{not related}, by enumeration.
inline double exact_violation_rate(const DenseHamiltonian& h, double t, const PropertySet& s, const MubFamily& f) {
  if (h.n != f.qubits() || s.qubits() != f.qubits()) throw DimensionError("exact_violation_rate qubit counts differ");
  require_dense(h.n, "exact_violation_rate");
  Matrix u = evolve_unitary(h, t);
  std::size_t d = f.dim();
  double total = 0;
  for (std::size_t i = 0; i < f.num_bases(); ++i) {
    Matrix amp = f.basis(i).adjoint() * u * f.basis(i);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t l = 0; l < d; ++l) {
        if (!relates_under_property(f, i, j, l, s)) total += std::norm(amp(l, j));
      }
    }
  }
  return total / static_cast<double>(d * (d + 1));
}

inline double exact_violation_rate(const PauliHamiltonian& h, double t, const PropertySet& s, const MubFamily& f) {
  return exact_violation_rate(hamiltonian_to_dense(h), t, s, f);
}

}  // namespace hamtest
