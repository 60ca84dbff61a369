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

#include <cmath>
#include <concepts>
#include <optional>
#include <string>
#include <vector>

#include "hamtest/evolution.hpp"

namespace hamtest {

/// What a tester may do with a Hamiltonian: prepare |phi_{i,j}>, evolve for
/// t >= 0, measure in basis i.
template <class O>
concept EvolutionAccess = requires(O& o, const MubFamily& f, std::size_t i, double t, Rng& rng) {
  { o.query(f, i, i, t, rng) } -> std::convertible_to<std::size_t>;
  { o.qubits() } -> std::convertible_to<int>;
};

static_assert(EvolutionAccess<EvolutionOracle>);

enum class Verdict { H0, H1 };

inline const char* verdict_name(Verdict v) { return v == Verdict::H0 ? "H0" : "H1"; }

struct TestConfig {
  double eps = 0.5;
  std::optional<double> t;
  std::optional<std::uint64_t> rounds;
  std::uint64_t seed = 0;
  bool assumption_check = true;
  bool keep_rounds = true;
};

struct TolerantConfig {
  double eps1 = 0.0;
  double eps2 = 0.5;
  std::uint64_t seed = 0;
  bool keep_rounds = true;
};

/// A hypothesis of the analysis evaluated on the actual inputs: holds iff lhs <= rhs.
struct AssumptionFlag {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  bool holds = true;
};

struct TestParameters {
  std::string algorithm;
  int n = 0;
  int n_aux = 0;
  double eps = 0;
  double eps1 = 0;
  double eps2 = 0;
  double delta = 0;
  double t = 0;
  std::uint64_t rounds = 0;
  double threshold = 0;
  bool overridden = false;
};

struct TestReport {
  Verdict verdict = Verdict::H0;
  std::vector<RoundRecord> rounds;
  std::uint64_t queries_used = 0;
  std::uint64_t violations = 0;
  double total_evolution_time = 0;
  TestParameters params;
  std::vector<AssumptionFlag> flags;

  bool hypotheses_hold() const {
    for (const auto& f : flags) {
      if (!f.holds) return false;
    }
    return true;
  }
};

struct MultiTestReport {
  std::vector<Verdict> verdicts;
  std::vector<std::uint64_t> violations;
  std::uint64_t queries_used = 0;
  double total_evolution_time = 0;
  TestParameters params;
  std::vector<AssumptionFlag> flags;
};

/// Single-test defaults: t = ε/6 and N = ⌈2 ln 3/(t²ε²)⌉.
inline double single_test_time(double eps) { return eps / 6.0; }

inline std::uint64_t single_test_rounds(double eps, double t) {
  return static_cast<std::uint64_t>(std::ceil(2.0 * std::log(3.0) / (t * t * eps * eps)));
}

inline std::uint64_t multi_test_rounds(double eps, double delta, std::size_t m) {
  double t = single_test_time(eps);
  return static_cast<std::uint64_t>(std::ceil(100.0 * std::log(static_cast<double>(m) / delta) / (t * t * eps * eps)));
}

inline double multi_test_threshold(double eps) {
  double t = single_test_time(eps);
  return 0.375 * t * t * eps * eps;
}

inline double tolerant_time(double eps1, double eps2) { return std::sqrt((eps2 * eps2 - eps1 * eps1) / 20.0); }

inline std::uint64_t tolerant_rounds(double eps1, double eps2) {
  double t = tolerant_time(eps1, eps2);
  double gap = eps2 * eps2 - eps1 * eps1;
  return static_cast<std::uint64_t>(std::ceil(30.0 * std::log(3.0) * (eps2 * eps2 + eps1 * eps1) / (t * t * gap * gap)));
}

inline double tolerant_threshold(double eps1, double eps2) {
  double t = tolerant_time(eps1, eps2);
  return 0.2 * t * t * (2 * eps2 * eps2 + 3 * eps1 * eps1);
}

/// n_aux = ⌈log2(144 |S∪{I}| / (2^n ε⁴))⌉, floored at 0.
inline int ancilla_qubits(int n, std::size_t size_with_identity, double eps) {
  double ratio = 144.0 * static_cast<double>(size_with_identity) / (std::ldexp(1.0, n) * std::pow(eps, 4));
  double bits = std::ceil(std::log2(ratio) - 1e-12);
  return bits > 0 ? static_cast<int>(bits) : 0;
}

/// One-round bounds for the single and tolerant testers.
inline double null_violation_bound(double t) { return std::pow(t, 4); }

inline double far_survival_bound(double t, double eps, std::size_t size_with_identity, std::size_t d) {
  return 1.0 - t * t * eps * eps + static_cast<double>(size_with_identity) / static_cast<double>(d + 1) +
         7.0 * std::pow(t, 4);
}

inline double far_survival_bound_final(double t, double eps) { return 1.0 - 0.5 * t * t * eps * eps; }

inline double tolerant_near_bound(double t, double eps1) { return t * t * eps1 * eps1 + 4.0 * std::pow(t, 4); }

inline double tolerant_far_bound(double t, double eps2) { return t * t * eps2 * eps2 - 8.0 * std::pow(t, 4); }

inline AssumptionFlag single_size_flag(const PropertySet& s, double eps) {
  double rhs = (std::ldexp(1.0, s.qubits()) + 1.0) * std::pow(eps, 4) / 144.0;
  double lhs = static_cast<double>(s.size_with_identity());
  return {"size_hypothesis |S+I| <= (d+1) eps^4/144", lhs, rhs, lhs <= rhs};
}

inline AssumptionFlag tolerant_size_flag(const PropertySet& s, double eps1, double eps2) {
  double gap = eps2 * eps2 - eps1 * eps1;
  double rhs = (std::ldexp(1.0, s.qubits()) + 1.0) * gap * gap / 400.0;
  double lhs = static_cast<double>(s.size_with_identity());
  return {"size_hypothesis |S+I| <= (d+1)(eps2^2-eps1^2)^2/400", lhs, rhs, lhs <= rhs};
}

namespace detail {
inline void check_eps(double eps, const char* who) {
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError(std::string(who) + ": eps must lie in (0, 1)");
}

inline void check_family(const MubFamily& f, const PropertySet& s) {
  if (f.qubits() != s.qubits()) throw DimensionError("family and property qubit counts differ");
}
}  // namespace detail

/// Single-property tester. Basis i is uniform over the d+1 bases and state j uniform
/// over d states; the first violation returns H1.
template <EvolutionAccess Oracle>
TestReport run_single_test(Oracle& oracle, const MubFamily& f, const PropertySet& s, const TestConfig& cfg) {
  detail::check_eps(cfg.eps, "run_single_test");
  detail::check_family(f, s);
  TestReport rep;
  rep.params.algorithm = "single";
  rep.params.n = s.qubits();
  rep.params.n_aux = f.qubits() - oracle.qubits();
  rep.params.eps = cfg.eps;
  rep.params.t = cfg.t.value_or(single_test_time(cfg.eps));
  rep.params.rounds = cfg.rounds.value_or(single_test_rounds(cfg.eps, rep.params.t));
  rep.params.overridden = cfg.t.has_value() || cfg.rounds.has_value();
  if (cfg.assumption_check) rep.flags.push_back(single_size_flag(s, cfg.eps));
  Rng base(cfg.seed);
  std::size_t d = f.dim();
  for (std::uint64_t r = 0; r < rep.params.rounds; ++r) {
    Rng rng = base.substream(r);
    RoundRecord rec;
    rec.i = rng.below(d + 1);
    rec.j = rng.below(d);
    rec.t = rep.params.t;
    rec.ell = oracle.query(f, rec.i, rec.j, rec.t, rng);
    rec.violation = !relates_under_property(f, rec.i, rec.j, rec.ell, s);
    ++rep.queries_used;
    rep.total_evolution_time += rec.t;
    if (cfg.keep_rounds) rep.rounds.push_back(rec);
    if (rec.violation) {
      ++rep.violations;
      rep.verdict = Verdict::H1;
      return rep;
    }
  }
  rep.verdict = Verdict::H0;
  return rep;
}

/// Multi-property tester: one data pass, then a threshold per property.
template <EvolutionAccess Oracle>
MultiTestReport run_multi_test(Oracle& oracle, const MubFamily& f, const std::vector<PropertySet>& props, double eps,
                               double delta, std::uint64_t seed) {
  if (props.empty()) throw ArgumentError("run_multi_test needs at least one property");
  detail::check_eps(eps, "run_multi_test");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("run_multi_test: delta must lie in (0, 1)");
  for (const auto& s : props) detail::check_family(f, s);
  MultiTestReport rep;
  rep.params.algorithm = "multi";
  rep.params.n = f.qubits();
  rep.params.eps = eps;
  rep.params.delta = delta;
  rep.params.t = single_test_time(eps);
  rep.params.rounds = multi_test_rounds(eps, delta, props.size());
  rep.params.threshold = multi_test_threshold(eps);
  for (const auto& s : props) rep.flags.push_back(single_size_flag(s, eps));
  rep.violations.assign(props.size(), 0);
  Rng base(seed);
  std::size_t d = f.dim();
  for (std::uint64_t r = 0; r < rep.params.rounds; ++r) {
    Rng rng = base.substream(r);
    std::size_t i = rng.below(d + 1);
    std::size_t j = rng.below(d);
    std::size_t l = oracle.query(f, i, j, rep.params.t, rng);
    ++rep.queries_used;
    rep.total_evolution_time += rep.params.t;
    for (std::size_t m = 0; m < props.size(); ++m) {
      if (!relates_under_property(f, i, j, l, props[m])) ++rep.violations[m];
    }
  }
  double n_rounds = static_cast<double>(rep.params.rounds);
  for (auto v : rep.violations) {
    rep.verdicts.push_back(static_cast<double>(v) / n_rounds <= rep.params.threshold ? Verdict::H0 : Verdict::H1);
  }
  return rep;
}

/// Single-property tester on a family over n + n_aux qubits, with S lifted to S ⊗ I.
template <EvolutionAccess Oracle>
TestReport run_ancilla_test(Oracle& oracle, const MubFamily& family_ext, const PropertySet& s, double eps,
                            std::uint64_t seed) {
  detail::check_eps(eps, "run_ancilla_test");
  int n = s.qubits();
  int n_aux = ancilla_qubits(n, s.size_with_identity(), eps);
  if (family_ext.qubits() != n + n_aux) {
    throw DimensionError("ancilla test needs a family on " + std::to_string(n + n_aux) + " qubits (n_aux = " +
                         std::to_string(n_aux) + ")");
  }
  TestConfig cfg;
  cfg.eps = eps;
  cfg.seed = seed;
  cfg.assumption_check = false;
  TestReport rep = run_single_test(oracle, family_ext, s.lifted(n_aux), cfg);
  rep.params.algorithm = "ancilla";
  rep.params.n = n;
  rep.params.n_aux = n_aux;
  double rhs = std::ldexp(1.0, n + n_aux) * std::pow(eps, 4) / 144.0;
  double lhs = static_cast<double>(s.size_with_identity());
  rep.flags.push_back({"ancilla_size |S+I| <= 2^(n+n_aux) eps^4/144", lhs, rhs, lhs <= rhs});
  return rep;
}

/// Builds the extended family itself; throws ResourceError naming n_aux
/// when n + n_aux exceeds the dense cap.
template <EvolutionAccess Oracle>
TestReport run_ancilla_test(Oracle& oracle, const PropertySet& s, double eps, std::uint64_t seed) {
  detail::check_eps(eps, "run_ancilla_test");
  int n_aux = ancilla_qubits(s.qubits(), s.size_with_identity(), eps);
  if (s.qubits() + n_aux > dense_qubit_cap()) {
    throw ResourceError("run_ancilla_test: n_aux = " + std::to_string(n_aux) + " gives " +
                        std::to_string(s.qubits() + n_aux) + " qubits, over the dense cap " +
                        std::to_string(dense_qubit_cap()));
  }
  MubFamily ext = build_mub_family(s.qubits() + n_aux);
  return run_ancilla_test(oracle, ext, s, eps, seed);
}

/// Tolerant tester: N rounds, H0 iff the violation rate is at most the threshold.
template <EvolutionAccess Oracle>
TestReport run_tolerant_test(Oracle& oracle, const MubFamily& f, const PropertySet& s, const TolerantConfig& cfg) {
  if (!(cfg.eps1 >= 0.0 && cfg.eps1 < cfg.eps2 && cfg.eps2 < 1.0)) {
    throw ArgumentError("run_tolerant_test needs 0 <= eps1 < eps2 < 1");
  }
  detail::check_family(f, s);
  TestReport rep;
  rep.params.algorithm = "tolerant";
  rep.params.n = s.qubits();
  rep.params.eps1 = cfg.eps1;
  rep.params.eps2 = cfg.eps2;
  rep.params.t = tolerant_time(cfg.eps1, cfg.eps2);
  rep.params.rounds = tolerant_rounds(cfg.eps1, cfg.eps2);
  rep.params.threshold = tolerant_threshold(cfg.eps1, cfg.eps2);
  rep.flags.push_back(tolerant_size_flag(s, cfg.eps1, cfg.eps2));
  Rng base(cfg.seed);
  std::size_t d = f.dim();
  for (std::uint64_t r = 0; r < rep.params.rounds; ++r) {
    Rng rng = base.substream(r);
    RoundRecord rec;
    rec.i = rng.below(d + 1);
    rec.j = rng.below(d);
    rec.t = rep.params.t;
    rec.ell = oracle.query(f, rec.i, rec.j, rec.t, rng);
    rec.violation = !relates_under_property(f, rec.i, rec.j, rec.ell, s);
    ++rep.queries_used;
    rep.total_evolution_time += rec.t;
    if (rec.violation) ++rep.violations;
    if (cfg.keep_rounds) rep.rounds.push_back(rec);
  }
  double rate = static_cast<double>(rep.violations) / static_cast<double>(rep.params.rounds);
  rep.verdict = rate <= rep.params.threshold ? Verdict::H0 : Verdict::H1;
  return rep;
}

/// Σ_{|b|>k} |<b|e^{itH}|0>|^2 for H supported on X-type strings.
inline double commuting_case_rate(const PauliHamiltonian& h, int k, double t) {
  for (const auto& [p, c] : h.terms()) {
    if (p.z_bits() != 0) throw ArgumentError("commuting_case_rate needs X-type support; got " + p.str());
  }
  Matrix u = evolve_unitary(hamiltonian_to_dense(h), t);
  double rate = 0;
  for (Eigen::Index b = 0; b < u.rows(); ++b) {
    if (std::popcount(static_cast<std::uint64_t>(b)) > k) rate += std::norm(u(b, 0));
  }
  return rate;
}

}  // namespace hamtest
