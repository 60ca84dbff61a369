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

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "hamtest/gf2n.hpp"
#include "hamtest/pauli.hpp"

namespace hamtest {

/// A maximal commuting set of signed Paulis. members[a] is the ordered
/// product of generators g_k over the set bits k of a.
struct StabilizerGroup {
  std::size_t index = 0;
  std::vector<SignedPauli> generators;
  std::vector<SignedPauli> members;

  int qubits() const { return generators.empty() ? 0 : generators.front().qubits(); }

  /// Bit k is g_k∘q.
  std::uint64_t syndrome(const PauliString& q) const {
    std::uint64_t s = 0;
    for (std::size_t k = 0; k < generators.size(); ++k) {
      s |= std::uint64_t(commutation_bit(generators[k].pauli, q)) << k;
    }
    return s;
  }

  /// Membership as an unsigned Pauli; valid because the group is its own centraliser.
  bool contains(const PauliString& q) const { return syndrome(q) == 0; }
};

namespace detail {

inline std::vector<SignedPauli> enumerate_members(const std::vector<SignedPauli>& gens) {
  int n = gens.front().qubits();
  std::size_t d = std::size_t{1} << gens.size();
  std::vector<SignedPauli> members(d);
  members[0] = SignedPauli(PauliString(n));
  for (std::size_t a = 1; a < d; ++a) {
    int top = std::bit_width(a) - 1;
    members[a] = pauli_multiply(members[a ^ (std::size_t{1} << top)], gens[top]);
  }
  return members;
}

/// Row-echelon basis over F2 with distinct leading bits, highest first.
class EchelonBasis {
 public:
  /// Returns false when v is already in the span.
  bool insert(std::uint64_t v) {
    v = reduce(v);
    if (v == 0) return false;
    rows_.push_back(v);
    std::sort(rows_.begin(), rows_.end(), std::greater<>());
    return true;
  }

  /// Smallest element of v + span.
  std::uint64_t reduce(std::uint64_t v) const {
    for (std::uint64_t r : rows_) {
      int lead = std::bit_width(r) - 1;
      if ((v >> lead) & 1ULL) v ^= r;
    }
    return v;
  }

  std::size_t rank() const { return rows_.size(); }

 private:
  std::vector<std::uint64_t> rows_;
};

}  // namespace detail

/// Builds a signed group from generators that may carry ±1 signs.
inline StabilizerGroup group_from_generators(std::vector<SignedPauli> gens, std::size_t index = 0) {
  if (gens.empty()) throw InvalidGroupError("no generators");
  int n = gens.front().qubits();
  if (static_cast<int>(gens.size()) != n) throw InvalidGroupError("expected exactly n generators");
  detail::EchelonBasis basis;
  for (std::size_t a = 0; a < gens.size(); ++a) {
    if (!gens[a].is_real()) throw InvalidGroupError("generator phase must be ±1");
    for (std::size_t b = a + 1; b < gens.size(); ++b) {
      if (commutation_bit(gens[a].pauli, gens[b].pauli)) {
        throw InvalidGroupError("generators " + gens[a].pauli.str() + " and " + gens[b].pauli.str() +
                                " anticommute");
      }
    }
    if (!basis.insert(gens[a].pauli.key())) throw InvalidGroupError("generators are dependent over F2");
  }
  StabilizerGroup g;
  g.index = index;
  g.members = detail::enumerate_members(gens);
  g.generators = std::move(gens);
  return g;
}

/// Signs a maximal commuting set (generators or the full member list) by
/// generator-product phase tracking. Generators are picked greedily in input
/// order and carry sign +1.
inline StabilizerGroup fix_signs(const std::vector<PauliString>& set, std::size_t index = 0) {
  if (set.empty()) throw InvalidGroupError("empty Pauli set");
  int n = set.front().qubits();
  for (std::size_t a = 0; a < set.size(); ++a) {
    set[a].same_n(set.front());
    for (std::size_t b = a + 1; b < set.size(); ++b) {
      if (commutation_bit(set[a], set[b])) {
        throw InvalidGroupError(set[a].str() + " and " + set[b].str() + " anticommute");
      }
    }
  }
  detail::EchelonBasis basis;
  std::vector<SignedPauli> gens;
  for (const auto& p : set) {
    if (basis.insert(p.key())) gens.emplace_back(p);
  }
  if (static_cast<int>(gens.size()) != n) {
    throw InvalidGroupError("set generates a group of rank " + std::to_string(gens.size()) +
                            ", not a maximal one of rank " + std::to_string(n));
  }
  return group_from_generators(std::move(gens), index);
}

/// The d+1 groups from the GF(2^n) symplectic spread: group b < d is
/// {(a, M_b a)} with M_b[k][l] = tr(b x^k x^l), and group d is all-Z.
inline std::vector<std::vector<PauliString>> spread_generators(int n) {
  GF2n field(n);
  std::size_t d = dim_of(n);
  std::vector<std::vector<PauliString>> out;
  out.reserve(d + 1);
  for (std::uint64_t b = 0; b < d; ++b) {
    std::vector<PauliString> gens;
    for (int k = 0; k < n; ++k) {
      std::uint64_t z = 0;
      for (int l = 0; l < n; ++l) {
        std::uint64_t prod = field.mul(b, field.mul(1ULL << k, 1ULL << l));
        z |= std::uint64_t(field.trace(prod)) << l;
      }
      gens.emplace_back(n, 1ULL << k, z);
    }
    out.push_back(std::move(gens));
  }
  std::vector<PauliString> zs;
  for (int k = 0; k < n; ++k) zs.emplace_back(n, 0, 1ULL << k);
  out.push_back(std::move(zs));
  return out;
}

/// Sorted coset representatives of G in the Pauli quotient; entry 0 is the identity.
struct CosetLabels {
  std::vector<PauliString> labels;
  std::vector<std::uint32_t> by_syndrome;  // syndrome -> label index
};

inline CosetLabels compute_coset_labels(const StabilizerGroup& g) {
  int n = g.qubits();
  std::size_t d = dim_of(n);
  // Preimages of the unit syndromes by Gauss-Jordan over single-qubit X and Z.
  struct Row {
    std::uint64_t syn;
    PauliString p;
  };
  std::vector<Row> rows;
  for (int q = 0; q < n; ++q) {
    for (char op : {'X', 'Z'}) {
      PauliString p = PauliString::single(n, q, op);
      rows.push_back({g.syndrome(p), p});
    }
  }
  std::vector<PauliString> unit(n, PauliString(n));
  for (int k = 0; k < n; ++k) {
    auto it = std::find_if(rows.begin() + k, rows.end(), [&](const Row& r) { return (r.syn >> k) & 1ULL; });
    if (it == rows.end()) throw InternalError("syndrome map is not surjective");
    std::iter_swap(rows.begin() + k, it);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != static_cast<std::size_t>(k) && ((rows[r].syn >> k) & 1ULL)) {
        rows[r].syn ^= rows[k].syn;
        rows[r].p = rows[r].p * rows[k].p;
      }
    }
  }
  for (int k = 0; k < n; ++k) unit[k] = rows[k].p;

  detail::EchelonBasis span;
  for (const auto& gen : g.generators) span.insert(gen.pauli.key());

  std::vector<std::uint64_t> keys(d);
  for (std::uint64_t s = 0; s < d; ++s) {
    PauliString r(n);
    for (int k = 0; k < n; ++k) {
      if ((s >> k) & 1ULL) r = r * unit[k];
    }
    keys[s] = span.reduce(r.key());
  }
  std::vector<std::uint64_t> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  CosetLabels out;
  out.labels.reserve(d);
  for (auto k : sorted) out.labels.push_back(PauliString::from_key(n, k));
  out.by_syndrome.resize(d);
  for (std::uint64_t s = 0; s < d; ++s) {
    out.by_syndrome[s] =
        static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), keys[s]) - sorted.begin());
  }
  return out;
}

/// Largest n whose full bases are cached; beyond it vectors are synthesised per call.
inline constexpr int kBasisCacheQubits = 7;

namespace detail {
inline constexpr std::uint64_t kStartVectorSeed = 0x6d7562737461727aULL;

/// Multiplies v by a unit phase so its first maximal-modulus entry is real positive.
inline void canonical_phase(Vector& v) {
  double best = v.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v[k]) >= best * (1.0 - 1e-9)) {
      v *= std::conj(v[k]) / std::abs(v[k]);
      return;
    }
  }
}
}  // namespace detail

class MubFamily {
 public:
  MubFamily(int n, std::vector<StabilizerGroup> groups) : n_(n), groups_(std::move(groups)) {
    if (groups_.size() != dim_of(n) + 1) throw InvalidGroupError("family needs d+1 groups");
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      if (groups_[i].qubits() != n) throw DimensionError("group qubit count mismatch");
      groups_[i].index = i;
      cosets_.push_back(compute_coset_labels(groups_[i]));
    }
    cache_ = std::make_unique<Cache>(groups_.size());
  }

  MubFamily(MubFamily&&) noexcept = default;
  MubFamily& operator=(MubFamily&&) noexcept = default;

  int qubits() const { return n_; }
  std::size_t dim() const { return dim_of(n_); }
  std::size_t num_bases() const { return groups_.size(); }
  const StabilizerGroup& group(std::size_t i) const { return groups_.at(i); }
  const std::vector<StabilizerGroup>& groups() const { return groups_; }
  const std::vector<PauliString>& coset_labels(std::size_t i) const { return cosets_.at(i).labels; }
  const PauliString& label(std::size_t i, std::size_t j) const { return cosets_.at(i).labels.at(j); }

  bool contains(std::size_t i, const PauliString& q) const { return groups_.at(i).contains(q); }

  /// Label index of the coset containing q.
  std::size_t coset_of(std::size_t i, const PauliString& q) const {
    return cosets_.at(i).by_syndrome[groups_.at(i).syndrome(q)];
  }

  /// |phi_{i,j}>, the (-1)^{p∘r_j}-eigenvector of every signed member of G_i.
  Vector state_vector(std::size_t i, std::size_t j) const {
    check_index(i, j);
    if (n_ <= kBasisCacheQubits) return basis(i).col(static_cast<Eigen::Index>(j));
    return synthesize(i, j);
  }

  /// Columns are |phi_{i,0}>, ..., |phi_{i,d-1}>. Cached once per i.
  const Matrix& basis(std::size_t i) const {
    require_dense(n_, "MubFamily::basis");
    check_index(i, 0);
    std::call_once(cache_->flags[i], [&] {
      Matrix b(dim(), dim());
      for (std::size_t j = 0; j < dim(); ++j) b.col(static_cast<Eigen::Index>(j)) = synthesize(i, j);
      cache_->bases[i] = std::move(b);
    });
    return cache_->bases[i];
  }

  /// Fresh synthesis without touching the cache.
  Vector synthesize(std::size_t i, std::size_t j) const {
    require_dense(n_, "stabilizer_state_vector");
    check_index(i, j);
    Vector v = ground_state(i);
    if (j != 0) {
      v = apply_pauli(SignedPauli(label(i, j)), v);
      detail::canonical_phase(v);
    }
    return v;
  }

 private:
  struct Cache {
    explicit Cache(std::size_t m) : flags(m), bases(m) {}
    std::vector<std::once_flag> flags;
    std::vector<Matrix> bases;
  };

  void check_index(std::size_t i, std::size_t j) const {
    if (i >= groups_.size() || j >= dim()) throw ArgumentError("MUB index out of range");
  }

  Vector ground_state(std::size_t i) const {
    const auto& g = groups_[i];
    std::size_t d = dim();
    Rng rng(detail::kStartVectorSeed);
    Vector v(d);
    for (std::size_t b = 0; b < d; ++b) v[b] = rng.complex_normal();
    Vector w(d);
    for (const auto& gen : g.generators) {
      apply_pauli(gen, v.data(), w.data(), n_);
      v = 0.5 * (v + w);
    }
    double norm = v.norm();
    if (norm < 1e-6) throw InternalError("stabilizer projection vanished");
    v /= norm;
    for (const auto& gen : g.generators) {
      apply_pauli(gen, v.data(), w.data(), n_);
      if ((w - v).norm() > 1e-9) throw InternalError("projector is not rank one for group " + std::to_string(i));
    }
    detail::canonical_phase(v);
    return v;
  }

  int n_;
  std::vector<StabilizerGroup> groups_;
  std::vector<CosetLabels> cosets_;
  std::unique_ptr<Cache> cache_;
};

inline constexpr int kMaxMubQubits = 16;

inline MubFamily build_mub_family(int n) {
  if (n < 1) throw ArgumentError("build_mub_family needs n >= 1");
  if (n > std::min(dense_qubit_cap(), kMaxMubQubits)) {
    throw ResourceError("build_mub_family: n = " + std::to_string(n) + " exceeds cap " +
                        std::to_string(std::min(dense_qubit_cap(), kMaxMubQubits)));
  }
  auto classes = spread_generators(n);
  std::vector<StabilizerGroup> groups;
  groups.reserve(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) groups.push_back(fix_signs(classes[i], i));
  return MubFamily(n, std::move(groups));
}

inline Vector stabilizer_state_vector(const MubFamily& f, std::size_t i, std::size_t j) {
  return f.state_vector(i, j);
}

inline bool group_membership(const MubFamily& f, std::size_t i, const PauliString& q) {
  return f.contains(i, q);
}

/// (1/d) Σ_{p∈G_i} (-1)^{p∘r_j} S(p), the dense projector onto |phi_{i,j}>.
inline Matrix stabilizer_projector(const MubFamily& f, std::size_t i, std::size_t j) {
  int n = f.qubits();
  require_dense(n, "stabilizer_projector");
  std::size_t d = f.dim();
  Matrix proj = Matrix::Zero(d, d);
  const PauliString& r = f.label(i, j);
  for (const auto& m : f.group(i).members) {
    double s = commutation_bit(m.pauli, r) ? -1.0 : 1.0;
    proj += s * pauli_to_matrix(m);
  }
  return proj / static_cast<double>(d);
}

/// Plain-text fixture: one block per group with signed generators and labels.
inline std::string family_to_fixture(const MubFamily& f) {
  std::ostringstream os;
  os << "mub_family " << f.qubits() << "\n";
  for (const auto& g : f.groups()) {
    os << "group " << g.index << "\n";
    for (const auto& gen : g.generators) os << "gen " << gen.str() << "\n";
    os << "labels";
    for (const auto& r : f.coset_labels(g.index)) os << " " << r.str();
    os << "\n";
  }
  return os.str();
}

inline MubFamily family_from_fixture(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int n = 0;
  if (!(is >> tag >> n) || tag != "mub_family") throw ValidationError("fixture header missing");
  std::vector<StabilizerGroup> groups;
  std::vector<std::vector<PauliString>> labels;
  std::vector<SignedPauli> gens;
  std::size_t index = 0;
  auto flush = [&] {
    if (!gens.empty()) groups.push_back(group_from_generators(std::move(gens), index));
    gens.clear();
  };
  while (is >> tag) {
    if (tag == "group") {
      flush();
      is >> index;
    } else if (tag == "gen") {
      std::string lit;
      is >> lit;
      gens.push_back(SignedPauli::parse(lit));
    } else if (tag == "labels") {
      std::vector<PauliString> row;
      for (std::size_t j = 0; j < dim_of(n); ++j) {
        std::string lit;
        is >> lit;
        row.push_back(PauliString::parse(lit));
      }
      labels.push_back(std::move(row));
    } else {
      throw ValidationError("unknown fixture token '" + tag + "'");
    }
  }
  flush();
  MubFamily fam(n, std::move(groups));
  if (labels.size() != fam.num_bases()) throw ValidationError("fixture label blocks do not match groups");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != fam.coset_labels(i)) throw ValidationError("fixture labels differ from canonical labels");
  }
  return fam;
}

}  // namespace hamtest
