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
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hamtest/harness.hpp"

namespace hamtest {

namespace detail {

inline std::uint64_t env_seed() {
  const char* s = std::getenv("HAMTEST_SEED");
  if (!s || !*s) return 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 0);
  if (*end != '\0') throw ArgumentError(std::string("HAMTEST_SEED is not an integer: ") + s);
  return v;
}

inline void print_check(std::ostream& os, const CheckResult& c) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s  %-58s measured=%.6g reference=%.6g dev=%.3g tol=%.3g", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.measured, c.reference, c.deviation, c.tolerance);
  os << buf;
  if (!c.detail.empty()) os << "  (" << c.detail << ")";
  os << "\n";
}

inline void print_scenario(std::ostream& os, const ScenarioResult& r) {
  char buf[640];
  std::snprintf(buf, sizeof buf,
                "%s: n=%d variant=%s hypothesis=%s distance=%.4g t=%.4g rounds=%llu trials=%zu\n"
                "  H0 frequency %.4f  95%% CI [%.4f, %.4f]\n",
                r.spec.id.c_str(), r.spec.n, variant_name(r.spec.variant), hypothesis_name(r.spec.hypothesis),
                r.distance, r.t, static_cast<unsigned long long>(r.round_budget), r.trials, r.acceptance_frequency,
                r.acceptance_ci.lo, r.acceptance_ci.hi);
  os << buf;
  if (r.promise_violated) {
    os << "  instance is neither in the property nor eps-far; correctness not scored\n";
  } else {
    std::snprintf(buf, sizeof buf, "  correct-verdict frequency %.4f  95%% CI [%.4f, %.4f]\n", r.correct_frequency,
                  r.correct_ci.lo, r.correct_ci.hi);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "  mean queries %.2f  mean total evolution time %.4g  size hypothesis %s\n",
                r.mean_queries, r.mean_total_time, r.hypotheses_hold ? "holds" : "FAILS");
  os << buf;
}

template <class T>
std::vector<T> split_list(const std::string& s, T (*conv)(const std::string&)) {
  std::vector<T> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(conv(item));
  }
  return out;
}

inline int to_int(const std::string& s) { return std::stoi(s); }
inline double to_double(const std::string& s) { return std::stod(s); }
inline std::string to_string_id(const std::string& s) { return s; }

}  // namespace detail

/// Command-line entry point. Exit codes: 0 success, 1 failed check, 2 usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Hamiltonian property testing with stabilizer MUBs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value configuration file; flags win on conflict");

  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string jsonl_path, csv_path;
  int dense_cap = dense_qubit_cap();
  app.add_option("--dense-cap", dense_cap, "largest qubit count handled with dense matrices")->check(CLI::Range(1, 14));

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& v) {
          seed = v;
          seed_given = true;
        },
        "master seed (default: $HAMTEST_SEED or 0)");
  };
  auto add_reports = [&](CLI::App* sub) {
    sub->add_option("--jsonl", jsonl_path, "write JSON-lines records here");
    sub->add_option("--csv", csv_path, "write per-scenario CSV here");
  };

  // build-mub
  int mub_n = 2;
  std::string mub_out;
  auto* build = app.add_subcommand("build-mub", "construct a stabilizer MUB family and write its fixture");
  build->add_option("--n", mub_n, "qubits")->required()->check(CLI::Range(1, kMaxMubQubits));
  build->add_option("--out", mub_out, "fixture path (stdout if omitted)");

  // verify
  int ver_n = 2;
  std::string ver_fixture;
  double ver_tol = 1e-9;
  auto* verify = app.add_subcommand("verify", "run the MUB invariant suite");
  verify->add_option("--n", ver_n, "qubits")->check(CLI::Range(1, 14));
  verify->add_option("--fixture", ver_fixture, "verify a family read from this fixture instead");
  verify->add_option("--tol", ver_tol, "residual tolerance");
  add_reports(verify);

  // test / tolerant / ancilla-test share scenario flags
  ScenarioSpec sc;
  std::string hyp, prop_file, ham_file;
  auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("--n", sc.n, "qubits")->required()->check(CLI::Range(1, 16));
    sub->add_option("--k", sc.k, "property is all k-local Paulis")->check(CLI::Range(0, 16));
    sub->add_option("--property-file", prop_file, "explicit property set, one Pauli literal per line");
    sub->add_option("--hypothesis", hyp, "null, far or custom (default: custom with --hamiltonian, else null)")->check(CLI::IsMember({"null", "far", "custom"}));
    sub->add_option("--hamiltonian", ham_file, "Hamiltonian fixture for --hypothesis custom");
    sub->add_option("--far-coefficient", sc.far_coefficient, "coefficient of the far-instance Pauli");
    sub->add_option("--trials", sc.trials, "independent tester runs")->check(CLI::PositiveNumber);
    add_seed(sub);
    add_reports(sub);
  };
  auto* test = app.add_subcommand("test", "single-property tester");
  add_scenario(test);
  test->add_option("--eps", sc.eps, "distance parameter")->check(CLI::Range(0.0, 1.0));
  double t_override = -1;
  long long rounds_override = -1;
  test->add_option("--t", t_override, "override evolution time");
  test->add_option("--rounds", rounds_override, "override round count");

  auto* tol = app.add_subcommand("tolerant", "tolerant tester");
  add_scenario(tol);
  tol->add_option("--eps1", sc.eps1, "closeness parameter")->check(CLI::Range(0.0, 1.0));
  tol->add_option("--eps2", sc.eps2, "farness parameter")->check(CLI::Range(0.0, 1.0));

  auto* anc = app.add_subcommand("ancilla-test", "single-property tester with ancilla qubits");
  add_scenario(anc);
  anc->add_option("--eps", sc.eps, "distance parameter")->check(CLI::Range(0.0, 1.0));

  // multi-test
  int mt_n = 3, mt_trials = 100;
  std::vector<std::string> mt_props;
  std::string mt_ham;
  double mt_eps = 0.5, mt_delta = 0.1;
  auto* multi = app.add_subcommand("multi-test", "test several properties with one set of queries");
  multi->add_option("--n", mt_n, "qubits")->required()->check(CLI::Range(1, 10));
  multi->add_option("--property", mt_props, "property as comma-separated Pauli literals (repeatable)")->required();
  multi->add_option("--hamiltonian", mt_ham, "Hamiltonian fixture")->required();
  multi->add_option("--eps", mt_eps, "distance parameter")->check(CLI::Range(0.0, 1.0));
  multi->add_option("--delta", mt_delta, "failure probability")->check(CLI::Range(0.0, 1.0));
  multi->add_option("--trials", mt_trials, "independent runs")->check(CLI::PositiveNumber);
  add_seed(multi);
  add_reports(multi);

  // sweep
  std::string sw_ns = "3", sw_ks = "1", sw_eps = "0.6", sw_hyps = "null,far", sw_variant = "single";
  std::size_t sw_trials = 50;
  auto* sweep = app.add_subcommand("sweep", "cartesian grid of scenarios");
  sweep->add_option("--ns", sw_ns, "comma-separated qubit counts");
  sweep->add_option("--ks", sw_ks, "comma-separated locality bounds");
  sweep->add_option("--epss", sw_eps, "comma-separated eps values (eps2 for tolerant)");
  sweep->add_option("--hypotheses", sw_hyps, "comma-separated null/far");
  sweep->add_option("--variant", sw_variant, "single, tolerant or ancilla")
      ->check(CLI::IsMember({"single", "tolerant", "ancilla"}));
  sweep->add_option("--trials", sw_trials, "trials per grid point")->check(CLI::PositiveNumber);
  add_seed(sweep);
  add_reports(sweep);

  // gadget-stats
  int gs_n = 3;
  double gs_eps = 0.5;
  std::size_t gs_samples = 10000;
  auto* gadget = app.add_subcommand("gadget-stats", "learning-gadget separation moments");
  gadget->add_option("--n", gs_n, "qubits")->check(CLI::Range(1, 8));
  gadget->add_option("--eps", gs_eps, "gadget scale");
  gadget->add_option("--samples", gs_samples, "pairs sampled");
  add_seed(gadget);
  add_reports(gadget);

  // haar-moments
  std::size_t hm_d = 4, hm_samples = 100000;
  auto* haar = app.add_subcommand("haar-moments", "Weingarten values against Monte-Carlo Haar integrals");
  haar->add_option("--d", hm_d, "dimension")->check(CLI::Range(4, 64));
  haar->add_option("--samples", hm_samples, "Haar samples");
  add_seed(haar);
  add_reports(haar);

  // norm-probe
  int np_n = 2, np_pairs = 5;
  std::string np_times = "0.02,0.01,0.005";
  bool np_strict = false;
  auto* norm = app.add_subcommand("norm-probe", "short-time slopes of unitary distances");
  norm->add_option("--n", np_n, "qubits")->check(CLI::Range(1, 6));
  norm->add_option("--pairs", np_pairs, "random Hamiltonian pairs")->check(CLI::PositiveNumber);
  norm->add_option("--times", np_times, "decreasing comma-separated times");
  norm->add_flag("--strict-inf", np_strict, "fail when the dist_inf slope misses |H-H~|_inf");
  add_seed(norm);
  add_reports(norm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    set_dense_qubit_cap(dense_cap);
    if (!seed_given) seed = detail::env_seed();

    auto finish_checks = [&](const std::vector<CheckResult>& checks) {
      bool ok = true;
      for (const auto& c : checks) {
        detail::print_check(out, c);
        ok = ok && c.pass;
      }
      if (!jsonl_path.empty()) emit_checks(checks, jsonl_path);
      return ok ? 0 : 1;
    };
    auto finish_sweep = [&](const SweepReport& rep) {
      for (const auto& s : rep.scenarios) detail::print_scenario(out, s);
      if (!jsonl_path.empty()) emit_report(rep, ReportFormat::Jsonl, jsonl_path);
      if (!csv_path.empty()) emit_report(rep, ReportFormat::Csv, csv_path);
      return 0;
    };

    if (*build) {
      std::string text = family_to_fixture(build_mub_family(mub_n));
      if (mub_out.empty()) {
        out << text;
      } else {
        std::ofstream f(mub_out, std::ios::binary);
        if (!f || !(f << text)) throw Error("cannot write fixture '" + mub_out + "'");
      }
      return 0;
    }
    if (*verify) {
      MubFamily f = ver_fixture.empty() ? build_mub_family(ver_n) : family_from_fixture(read_text_file(ver_fixture));
      return finish_checks(mub_invariant_suite(f, ver_tol));
    }
    if (*test || *tol || *anc) {
      if (hyp.empty()) hyp = ham_file.empty() ? "null" : "custom";
      sc.hypothesis = parse_hypothesis(hyp);
      if (sc.hypothesis != Hypothesis::Custom && !ham_file.empty()) {
        throw ArgumentError("--hamiltonian only applies to --hypothesis custom");
      }
      sc.variant = *test ? Variant::Single : *tol ? Variant::Tolerant : Variant::Ancilla;
      sc.seed = seed;
      if (!prop_file.empty()) {
        PropertySet p = property_from_text(read_text_file(prop_file), sc.n);
        for (const auto& q : p.paulis()) sc.property_literals.push_back(q.str());
        if (sc.property_literals.empty()) sc.property_literals.push_back(PauliString(sc.n).str());
      }
      if (sc.hypothesis == Hypothesis::Custom) {
        if (ham_file.empty()) throw ArgumentError("--hypothesis custom needs --hamiltonian");
        sc.hamiltonian_fixture = read_text_file(ham_file);
      }
      if (t_override >= 0) sc.t = t_override;
      if (rounds_override >= 0) sc.rounds = static_cast<std::uint64_t>(rounds_override);
      sc.id = std::string(variant_name(sc.variant)) + "-n" + std::to_string(sc.n) + "-" + hypothesis_name(sc.hypothesis);
      return finish_sweep(acceptance_sweep({sc}));
    }
    if (*multi) {
      PauliHamiltonian h = hamiltonian_from_fixture(read_text_file(mt_ham));
      if (h.qubits() != mt_n) throw ArgumentError("Hamiltonian fixture does not have --n qubits");
      std::vector<PropertySet> props;
      for (const auto& lits : mt_props) {
        std::string text = lits;
        std::replace(text.begin(), text.end(), ',', ' ');
        props.push_back(property_from_text(text, mt_n));
      }
      MubFamily f = build_mub_family(mt_n);
      auto spectrum = std::make_shared<const SpectralEvolution>(hamiltonian_to_dense(h));
      std::vector<std::size_t> errors(props.size(), 0), scored(props.size(), 0);
      std::vector<std::size_t> h0(props.size(), 0);
      std::string lines;
      for (int trial = 0; trial < mt_trials; ++trial) {
        EvolutionOracle oracle(spectrum);
        std::uint64_t ts = trial_seed(seed, static_cast<std::size_t>(trial));
        MultiTestReport rep = run_multi_test(oracle, f, props, mt_eps, mt_delta, ts);
        ordered_json j;
        j["kind"] = "multi_trial";
        j["trial"] = trial;
        j["seed"] = ts;
        j["n"] = mt_n;
        j["eps"] = mt_eps;
        j["delta"] = mt_delta;
        j["t"] = rep.params.t;
        j["round_budget"] = rep.params.rounds;
        j["queries"] = rep.queries_used;
        j["total_time"] = oracle.total_time();
        for (std::size_t m = 0; m < props.size(); ++m) {
          double dist = distance_to_property(h, props[m]);
          std::optional<Verdict> want;
          if (dist <= 1e-12) want = Verdict::H0;
          if (dist >= mt_eps - 1e-12) want = Verdict::H1;
          h0[m] += rep.verdicts[m] == Verdict::H0;
          if (want) {
            ++scored[m];
            errors[m] += rep.verdicts[m] != *want;
          }
          j["verdicts"].push_back(verdict_name(rep.verdicts[m]));
          j["expected"].push_back(want ? verdict_name(*want) : "none");
        }
        lines += j.dump() + "\n";
      }
      for (std::size_t m = 0; m < props.size(); ++m) {
        Interval ci = wilson_interval(errors[m], scored[m]);
        char buf[256];
        std::snprintf(buf, sizeof buf, "property %zu: H0 %zu/%d  error frequency %.4f  95%% CI [%.4f, %.4f]\n", m,
                      h0[m], mt_trials, scored[m] ? double(errors[m]) / double(scored[m]) : 0.0, ci.lo, ci.hi);
        out << buf;
      }
      if (!jsonl_path.empty()) {
        std::ofstream fj(jsonl_path, std::ios::binary);
        if (!fj || !(fj << lines)) throw Error("cannot write report file '" + jsonl_path + "'");
      }
      return 0;
    }
    if (*sweep) {
      std::vector<ScenarioSpec> grid;
      Variant v = parse_variant(sw_variant);
      for (int n : detail::split_list<int>(sw_ns, detail::to_int)) {
        for (int k : detail::split_list<int>(sw_ks, detail::to_int)) {
          for (double e : detail::split_list<double>(sw_eps, detail::to_double)) {
            for (const auto& hname : detail::split_list<std::string>(sw_hyps, detail::to_string_id)) {
              ScenarioSpec s;
              s.n = n;
              s.k = k;
              s.variant = v;
              s.hypothesis = parse_hypothesis(hname);
              if (s.hypothesis == Hypothesis::Custom) throw ArgumentError("sweep supports null and far only");
              s.eps = e;
              s.eps2 = e;
              s.trials = sw_trials;
              s.seed = derive_seed(seed, grid.size());
              char id[96];
              std::snprintf(id, sizeof id, "%s-n%d-k%d-eps%.3f-%s", sw_variant.c_str(), n, k, e, hname.c_str());
              s.id = id;
              grid.push_back(s);
            }
          }
        }
      }
      return finish_sweep(acceptance_sweep(grid));
    }
    if (*gadget) {
      Rng rng(seed);
      GadgetStats g = gadget_separation_stats(gs_n, gs_eps, gs_samples, rng);
      return finish_checks({g.second_moment, g.fourth_moment});
    }
    if (*haar) {
      Rng rng(seed);
      return finish_checks(weingarten_monte_carlo(hm_d, hm_samples, rng));
    }
    if (*norm) {
      std::vector<double> ts = detail::split_list<double>(np_times, detail::to_double);
      Rng rng(seed);
      std::vector<CheckResult> checks;
      for (int p = 0; p < np_pairs; ++p) {
        DenseHamiltonian a = learning_gadget(np_n, 1.0, rng());
        DenseHamiltonian b = learning_gadget(np_n, 1.0, rng());
        NormProbe probe = norm_relation_probe(a, b, ts);
        std::string tag = " [pair " + std::to_string(p) + "]";
        probe.frobenius.name += tag;
        probe.operator_norm.name += tag;
        probe.sandwich.name += tag;
        checks.push_back(probe.frobenius);
        checks.push_back(probe.sandwich);
        if (np_strict) {
          checks.push_back(probe.operator_norm);
        } else {
          detail::print_check(out, probe.operator_norm);
        }
      }
      return finish_checks(checks);
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidGroupError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hamtest
