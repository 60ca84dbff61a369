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
#include <atomic>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "hamtest/testers.hpp"
#include "hamtest/verification.hpp"

namespace hamtest {

enum class Hypothesis { Null, Far, Custom };
enum class Variant { Single, Tolerant, Ancilla };

inline const char* hypothesis_name(Hypothesis h) {
  switch (h) {
    case Hypothesis::Null: return "null";
    case Hypothesis::Far: return "far";
    default: return "custom";
  }
}

inline Hypothesis parse_hypothesis(const std::string& s) {
  if (s == "null") return Hypothesis::Null;
  if (s == "far") return Hypothesis::Far;
  if (s == "custom") return Hypothesis::Custom;
  throw ArgumentError("unknown hypothesis '" + s + "' (expected null, far or custom)");
}

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Single: return "single";
    case Variant::Tolerant: return "tolerant";
    default: return "ancilla";
  }
}

inline Variant parse_variant(const std::string& s) {
  if (s == "single") return Variant::Single;
  if (s == "tolerant") return Variant::Tolerant;
  if (s == "ancilla") return Variant::Ancilla;
  throw ArgumentError("unknown tester variant '" + s + "'");
}

struct ScenarioSpec {
  std::string id;
  int n = 3;
  Hypothesis hypothesis = Hypothesis::Null;
  Variant variant = Variant::Single;
  int k = 1;                                  // used when no explicit property is given
  std::vector<std::string> property_literals;  // explicit S, overrides k
  std::string hamiltonian_fixture;            // text of a custom instance
  double eps = 0.5;
  double eps1 = 0.0;
  double eps2 = 0.5;
  double far_coefficient = 0.0;  // 0 selects min(1, 1.05 eps)
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::optional<double> t;
  std::optional<std::uint64_t> rounds;
};

inline PropertySet scenario_property(const ScenarioSpec& s) {
  if (!s.property_literals.empty()) {
    PropertySet p(s.n);
    for (const auto& lit : s.property_literals) {
      PauliString q = SignedPauli::parse(lit).pauli;
      if (q.qubits() != s.n) throw ArgumentError("property literal '" + lit + "' does not have n qubits");
      p.insert(q);
    }
    return p;
  }
  return property_k_local(s.n, s.k);
}

/// Weight-(k+1) string Z...Z on the leading qubits for k-local sets, else the
/// smallest-key Pauli outside S.
inline PauliString default_far_pauli(const ScenarioSpec& s, const PropertySet& prop) {
  if (s.property_literals.empty()) {
    if (s.k >= s.n) throw ArgumentError("no Pauli lies outside the full k = n property");
    return PauliString(s.n, 0, (1ULL << (s.k + 1)) - 1);
  }
  for (std::uint64_t key = 1; key < (std::uint64_t{1} << (2 * s.n)); ++key) {
    PauliString p = PauliString::from_key(s.n, key);
    if (!prop.contains(p)) return p;
  }
  throw ArgumentError("property set contains every Pauli");
}

inline double far_coefficient(const ScenarioSpec& s, double eps) {
  return s.far_coefficient > 0 ? s.far_coefficient : std::min(1.0, 1.05 * eps);
}

/// Ground-truth instance for a scenario, drawn from the scenario seed.
inline PauliHamiltonian scenario_instance(const ScenarioSpec& s, const PropertySet& prop) {
  if (s.hypothesis == Hypothesis::Custom) {
    PauliHamiltonian h = hamiltonian_from_fixture(s.hamiltonian_fixture);
    if (h.qubits() != s.n) throw ArgumentError("Hamiltonian fixture does not have n qubits");
    return h;
  }
  std::uint64_t iseed = derive_seed(s.seed, 0x696e7374ULL);
  PauliString far = default_far_pauli(s, prop);
  if (s.variant == Variant::Tolerant) {
    if (s.hypothesis == Hypothesis::Null) {
      PauliHamiltonian h = random_property_hamiltonian(prop, iseed).scaled(1.0 - s.eps1);
      if (s.eps1 > 0) h.set(far, s.eps1);
      return h;
    }
    PauliHamiltonian h(s.n);
    h.set(far, far_coefficient(s, s.eps2));
    return h;
  }
  if (s.hypothesis == Hypothesis::Null) return random_property_hamiltonian(prop, iseed);
  PauliHamiltonian h(s.n);
  h.set(far, far_coefficient(s, s.eps));
  return h;
}

/// Expected verdict from ground truth, or nullopt when neither hypothesis holds.
inline std::optional<Verdict> expected_verdict(const ScenarioSpec& s, double distance) {
  double tol = 1e-12;
  if (s.variant == Variant::Tolerant) {
    if (distance <= s.eps1 + tol) return Verdict::H0;
    if (distance >= s.eps2 - tol) return Verdict::H1;
    return std::nullopt;
  }
  if (distance <= tol) return Verdict::H0;
  if (distance >= s.eps - tol) return Verdict::H1;
  return std::nullopt;
}

struct TrialRecord {
  std::string scenario;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  int n = 0;
  int n_aux = 0;
  std::string variant;
  std::string hypothesis;
  double eps = 0;
  double eps1 = 0;
  double eps2 = 0;
  double distance = 0;
  double t = 0;
  std::uint64_t round_budget = 0;
  std::string verdict;
  std::string expected;  // "H0", "H1" or "none" (promise violated)
  std::uint64_t queries = 0;
  double total_time = 0;
  std::uint64_t violations = 0;
  bool hypotheses_hold = true;
  bool parameter_override = false;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct Interval {
  double lo = 0;
  double hi = 1;
};

/// Wilson score interval at 95% confidence; fewer than two trials give [0, 1].
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
  if (trials < 2) return {0.0, 1.0};
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double den = 1 + z2 / n;
  double centre = (p + z2 / (2 * n)) / den;
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / den;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct ScenarioResult {
  ScenarioSpec spec;
  std::size_t trials = 0;
  std::size_t accepted = 0;  // H0 verdicts
  std::size_t scored = 0;    // trials with a defined expected verdict
  std::size_t correct = 0;
  double acceptance_frequency = 0;
  Interval acceptance_ci;
  double correct_frequency = 0;
  Interval correct_ci;
  double mean_queries = 0;
  double mean_total_time = 0;
  double distance = 0;
  double t = 0;
  std::uint64_t round_budget = 0;
  bool hypotheses_hold = true;
  bool promise_violated = false;
  std::vector<TrialRecord> records;
};

struct SweepReport {
  std::vector<ScenarioResult> scenarios;
};

/// Runs body(k) for k in [0, count) on a small worker pool.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned workers = 0) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = next++; k < count; k = next++) body(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::uint64_t trial_seed(std::uint64_t scenario_seed, std::size_t trial) {
  return derive_seed(scenario_seed, 0x747269616c000000ULL + trial);
}

inline ScenarioResult run_scenario(const ScenarioSpec& spec, const MubFamily* family = nullptr) {
  if (spec.trials < 1) throw ArgumentError("a scenario needs at least one trial");
  PropertySet prop = scenario_property(spec);
  PauliHamiltonian h = scenario_instance(spec, prop);
  double distance = distance_to_property(h, prop);
  std::optional<Verdict> expected = expected_verdict(spec, distance);
  auto spectrum = std::make_shared<const SpectralEvolution>(hamiltonian_to_dense(h));

  std::optional<MubFamily> owned;
  const MubFamily* fam = family;
  int n_aux = 0;
  if (spec.variant == Variant::Ancilla) {
    n_aux = ancilla_qubits(spec.n, prop.size_with_identity(), spec.eps);
    if (spec.n + n_aux > dense_qubit_cap()) {
      throw ResourceError("ancilla scenario needs n_aux = " + std::to_string(n_aux) + ", over the dense cap");
    }
  }
  if (!fam || fam->qubits() != spec.n + n_aux) {
    owned.emplace(build_mub_family(spec.n + n_aux));
    fam = &*owned;
  }
  if (fam->qubits() <= kBasisCacheQubits) {
    for (std::size_t i = 0; i < fam->num_bases(); ++i) fam->basis(i);
  }

  ScenarioResult res;
  res.spec = spec;
  res.trials = spec.trials;
  res.distance = distance;
  res.promise_violated = !expected.has_value();
  res.records.resize(spec.trials);
  parallel_for(spec.trials, [&](std::size_t trial) {
    EvolutionOracle oracle(spectrum);
    std::uint64_t seed = trial_seed(spec.seed, trial);
    TestReport rep;
    switch (spec.variant) {
      case Variant::Single: {
        TestConfig cfg;
        cfg.eps = spec.eps;
        cfg.t = spec.t;
        cfg.rounds = spec.rounds;
        cfg.seed = seed;
        cfg.keep_rounds = false;
        rep = run_single_test(oracle, *fam, prop, cfg);
        break;
      }
      case Variant::Tolerant: {
        TolerantConfig cfg;
        cfg.eps1 = spec.eps1;
        cfg.eps2 = spec.eps2;
        cfg.seed = seed;
        cfg.keep_rounds = false;
        rep = run_tolerant_test(oracle, *fam, prop, cfg);
        break;
      }
      case Variant::Ancilla: rep = run_ancilla_test(oracle, *fam, prop, spec.eps, seed); break;
    }
    if (rep.queries_used != oracle.queries()) throw InternalError("query accounting diverged from the oracle log");
    TrialRecord r;
    r.scenario = spec.id;
    r.trial = trial;
    r.seed = seed;
    r.n = spec.n;
    r.n_aux = rep.params.n_aux;
    r.variant = variant_name(spec.variant);
    r.hypothesis = hypothesis_name(spec.hypothesis);
    r.eps = spec.eps;
    r.eps1 = spec.eps1;
    r.eps2 = spec.eps2;
    r.distance = distance;
    r.t = rep.params.t;
    r.round_budget = rep.params.rounds;
    r.verdict = verdict_name(rep.verdict);
    r.expected = expected ? verdict_name(*expected) : "none";
    r.queries = rep.queries_used;
    r.total_time = oracle.total_time();
    r.violations = rep.violations;
    r.hypotheses_hold = rep.hypotheses_hold();
    r.parameter_override = rep.params.overridden;
    res.records[trial] = std::move(r);
  });

  double q = 0, tt = 0;
  for (const auto& r : res.records) {
    res.accepted += r.verdict == "H0";
    if (r.expected != "none") {
      ++res.scored;
      res.correct += r.verdict == r.expected;
    }
    q += static_cast<double>(r.queries);
    tt += r.total_time;
  }
  res.t = res.records.front().t;
  res.round_budget = res.records.front().round_budget;
  res.hypotheses_hold = res.records.front().hypotheses_hold;
  double nt = static_cast<double>(res.trials);
  res.acceptance_frequency = static_cast<double>(res.accepted) / nt;
  res.acceptance_ci = wilson_interval(res.accepted, res.trials);
  res.correct_frequency = res.scored ? static_cast<double>(res.correct) / static_cast<double>(res.scored) : 0.0;
  res.correct_ci = wilson_interval(res.correct, res.scored);
  res.mean_queries = q / nt;
  res.mean_total_time = tt / nt;
  return res;
}

/// Runs every grid point; results are sorted by scenario id before returning.
inline SweepReport acceptance_sweep(const std::vector<ScenarioSpec>& grid) {
  if (grid.empty()) throw ArgumentError("acceptance_sweep needs a nonempty grid");
  SweepReport rep;
  for (const auto& s : grid) rep.scenarios.push_back(run_scenario(s));
  std::stable_sort(rep.scenarios.begin(), rep.scenarios.end(),
                   [](const ScenarioResult& a, const ScenarioResult& b) { return a.spec.id < b.spec.id; });
  return rep;
}

// ---------------------------------------------------------------------------
// Reports

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const TrialRecord& r) {
  ordered_json j;
  j["kind"] = "trial";
  j["scenario"] = r.scenario;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["n_aux"] = r.n_aux;
  j["variant"] = r.variant;
  j["hypothesis"] = r.hypothesis;
  j["eps"] = r.eps;
  j["eps1"] = r.eps1;
  j["eps2"] = r.eps2;
  j["distance"] = r.distance;
  j["t"] = r.t;
  j["round_budget"] = r.round_budget;
  j["verdict"] = r.verdict;
  j["expected"] = r.expected;
  j["queries"] = r.queries;
  j["total_time"] = r.total_time;
  j["violations"] = r.violations;
  j["hypotheses_hold"] = r.hypotheses_hold;
  j["parameter_override"] = r.parameter_override;
  return j;
}

inline TrialRecord trial_from_json(const ordered_json& j) {
  TrialRecord r;
  r.scenario = j.at("scenario").get<std::string>();
  r.trial = j.at("trial").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.n = j.at("n").get<int>();
  r.n_aux = j.at("n_aux").get<int>();
  r.variant = j.at("variant").get<std::string>();
  r.hypothesis = j.at("hypothesis").get<std::string>();
  r.eps = j.at("eps").get<double>();
  r.eps1 = j.at("eps1").get<double>();
  r.eps2 = j.at("eps2").get<double>();
  r.distance = j.at("distance").get<double>();
  r.t = j.at("t").get<double>();
  r.round_budget = j.at("round_budget").get<std::uint64_t>();
  r.verdict = j.at("verdict").get<std::string>();
  r.expected = j.at("expected").get<std::string>();
  r.queries = j.at("queries").get<std::uint64_t>();
  r.total_time = j.at("total_time").get<double>();
  r.violations = j.at("violations").get<std::uint64_t>();
  r.hypotheses_hold = j.at("hypotheses_hold").get<bool>();
  r.parameter_override = j.at("parameter_override").get<bool>();
  return r;
}

inline ordered_json to_json(const CheckResult& c) {
  ordered_json j;
  j["kind"] = "check";
  j["name"] = c.name;
  j["measured"] = c.measured;
  j["reference"] = c.reference;
  j["deviation"] = c.deviation;
  j["tolerance"] = c.tolerance;
  j["sigma"] = c.sigma;
  j["pass"] = c.pass;
  j["detail"] = c.detail;
  return j;
}

inline std::string trials_to_jsonl(const std::vector<TrialRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

inline std::vector<TrialRecord> trials_from_jsonl(const std::string& text) {
  std::vector<TrialRecord> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto j = ordered_json::parse(line);
    if (j.value("kind", "") == "trial") out.push_back(trial_from_json(j));
  }
  return out;
}

inline std::string checks_to_jsonl(const std::vector<CheckResult>& checks) {
  std::string out;
  for (const auto& c : checks) out += to_json(c).dump() + "\n";
  return out;
}

inline const char* kSweepCsvHeader =
    "scenario,n,variant,hypothesis,eps,eps1,eps2,distance,t,round_budget,trials,accepted,acceptance_frequency,"
    "acceptance_ci_lo,acceptance_ci_hi,scored,correct,correct_frequency,correct_ci_lo,correct_ci_hi,mean_queries,"
    "mean_total_time,hypotheses_hold,promise_violated";

inline std::string sweep_to_csv(const SweepReport& rep) {
  std::ostringstream os;
  os << kSweepCsvHeader << "\n";
  os << std::setprecision(17);
  for (const auto& s : rep.scenarios) {
    os << s.spec.id << "," << s.spec.n << "," << variant_name(s.spec.variant) << ","
       << hypothesis_name(s.spec.hypothesis) << "," << s.spec.eps << "," << s.spec.eps1 << "," << s.spec.eps2 << ","
       << s.distance << "," << s.t << "," << s.round_budget << "," << s.trials << "," << s.accepted << ","
       << s.acceptance_frequency << "," << s.acceptance_ci.lo << "," << s.acceptance_ci.hi << "," << s.scored << ","
       << s.correct << "," << s.correct_frequency << "," << s.correct_ci.lo << "," << s.correct_ci.hi << ","
       << s.mean_queries << "," << s.mean_total_time << "," << (s.hypotheses_hold ? "true" : "false") << ","
       << (s.promise_violated ? "true" : "false") << "\n";
  }
  return os.str();
}

enum class ReportFormat { Jsonl, Csv };

/// Writes the sweep as JSON-lines (one object per trial) or CSV (one row per scenario).
inline void emit_report(const SweepReport& rep, ReportFormat format, const std::string& path) {
  std::string text;
  if (format == ReportFormat::Csv) {
    text = sweep_to_csv(rep);
  } else {
    for (const auto& s : rep.scenarios) text += trials_to_jsonl(s.records);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open report file '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing report file '" + path + "'");
}

inline void emit_checks(const std::vector<CheckResult>& checks, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open report file '" + path + "' for writing");
  out << checks_to_jsonl(checks);
  if (!out) throw Error("failed writing report file '" + path + "'");
}

}  // namespace hamtest
