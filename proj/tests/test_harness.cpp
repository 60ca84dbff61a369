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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hamtest/cli.hpp"

namespace hamtest {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("hamtest_" + name); }

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::vector<const char*> argv{"hamtest_cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

ScenarioSpec small_scenario(Hypothesis h) {
  ScenarioSpec s;
  s.id = std::string("n3-") + hypothesis_name(h);
  s.n = 3;
  s.k = 1;
  s.hypothesis = h;
  s.eps = 0.6;
  s.trials = 12;
  s.seed = 77;
  return s;
}

TEST(Wilson, KnownValuesAndEdgeCases) {
  Interval ci = wilson_interval(8, 10);
  EXPECT_NEAR(ci.lo, 0.4901624, 1e-6);
  EXPECT_NEAR(ci.hi, 0.9433178, 1e-6);
  Interval one = wilson_interval(1, 1);
  EXPECT_EQ(one.lo, 0.0);
  EXPECT_EQ(one.hi, 1.0);
  Interval none = wilson_interval(0, 0);
  EXPECT_EQ(none.lo, 0.0);
  EXPECT_EQ(none.hi, 1.0);
  for (std::size_t n : {2u, 7u, 50u, 300u}) {
    for (std::size_t k = 0; k <= n; ++k) {
      Interval w = wilson_interval(k, n);
      double p = double(k) / double(n);
      EXPECT_LE(w.lo, p + 1e-15);
      EXPECT_GE(w.hi, p - 1e-15);
      EXPECT_GE(w.lo, 0.0);
      EXPECT_LE(w.hi, 1.0);
    }
  }
}

TEST(Scenario, NullScenarioAcceptsAndAccountsQueries) {
  ScenarioResult r = run_scenario(small_scenario(Hypothesis::Null));
  EXPECT_EQ(r.trials, 12u);
  EXPECT_EQ(r.accepted, 12u);
  EXPECT_EQ(r.correct, 12u);
  EXPECT_NEAR(r.mean_queries, 611.0, 1e-12);
  EXPECT_NEAR(r.mean_total_time, 61.1, 1e-9);
  EXPECT_FALSE(r.hypotheses_hold);
  EXPECT_FALSE(r.promise_violated);
  EXPECT_GE(r.acceptance_frequency, r.acceptance_ci.lo);
  EXPECT_LE(r.acceptance_frequency, r.acceptance_ci.hi);
}

TEST(Scenario, FarInstanceDefault) {
  ScenarioSpec s = small_scenario(Hypothesis::Far);
  PropertySet p = scenario_property(s);
  PauliHamiltonian h = scenario_instance(s, p);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.terms().begin()->first.str(), "ZZI");
  EXPECT_NEAR(distance_to_property(h, p), 0.63, 1e-15);
  s.k = 3;
  EXPECT_THROW(scenario_instance(s, scenario_property(s)), ArgumentError);
}

TEST(Scenario, CustomFixtureGroundTruth) {
  ScenarioSpec s = small_scenario(Hypothesis::Custom);
  s.hamiltonian_fixture = "n 3\nXXX 0.2\nZII 0.5\n";
  s.trials = 3;
  ScenarioResult r = run_scenario(s);
  EXPECT_TRUE(r.promise_violated);
  EXPECT_EQ(r.scored, 0u);
  EXPECT_EQ(r.records[0].expected, "none");
}

TEST(Scenario, ToleranceAndAncillaVariants) {
  ScenarioSpec t = small_scenario(Hypothesis::Null);
  t.variant = Variant::Tolerant;
  t.eps1 = 0.1;
  t.eps2 = 0.8;
  t.trials = 3;
  ScenarioResult rt = run_scenario(t);
  EXPECT_NEAR(rt.distance, 0.1, 1e-15);
  EXPECT_EQ(rt.round_budget, tolerant_rounds(0.1, 0.8));

  ScenarioSpec a;
  a.id = "anc";
  a.n = 1;
  a.property_literals = {"Z"};
  a.hypothesis = Hypothesis::Far;
  a.variant = Variant::Ancilla;
  a.eps = 0.9;
  a.trials = 2;
  ScenarioResult ra = run_scenario(a);
  EXPECT_EQ(ra.records[0].n_aux, 8);
  a.property_literals.clear();
  a.n = 2;
  a.k = 1;
  EXPECT_THROW(run_scenario(a), ResourceError);
}

TEST(Sweep, SortedAndDeterministic) {
  std::vector<ScenarioSpec> grid{small_scenario(Hypothesis::Null), small_scenario(Hypothesis::Far)};
  grid[0].id = "b";
  grid[1].id = "a";
  SweepReport r1 = acceptance_sweep(grid), r2 = acceptance_sweep(grid);
  EXPECT_EQ(r1.scenarios[0].spec.id, "a");
  EXPECT_EQ(sweep_to_csv(r1), sweep_to_csv(r2));
  EXPECT_EQ(trials_to_jsonl(r1.scenarios[0].records), trials_to_jsonl(r2.scenarios[0].records));
  EXPECT_THROW(acceptance_sweep({}), ArgumentError);
  grid[0].trials = 0;
  EXPECT_THROW(acceptance_sweep(grid), ArgumentError);
}

TEST(Report, JsonlRoundTripAndCsvHeader) {
  SweepReport rep = acceptance_sweep({small_scenario(Hypothesis::Far)});
  const auto& recs = rep.scenarios[0].records;
  EXPECT_EQ(trials_from_jsonl(trials_to_jsonl(recs)), recs);

  fs::path jp = temp_path("rt.jsonl"), cp = temp_path("rt.csv");
  emit_report(rep, ReportFormat::Jsonl, jp.string());
  EXPECT_EQ(trials_from_jsonl(slurp(jp)), recs);
  emit_report(rep, ReportFormat::Csv, cp.string());
  std::string csv = slurp(cp);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSweepCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);

  emit_report(SweepReport{}, ReportFormat::Csv, cp.string());
  EXPECT_EQ(slurp(cp), std::string(kSweepCsvHeader) + "\n");
  try {
    emit_report(rep, ReportFormat::Csv, "/nonexistent-dir/x.csv");
    FAIL() << "expected an I/O error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}

TEST(Cli, VerifyAndExitCodes) {
  std::string text;
  EXPECT_EQ(cli({"verify", "--n", "2"}, &text), 0);
  EXPECT_NE(text.find("PASS"), std::string::npos);
  EXPECT_EQ(cli({"frobnicate"}), 2);
  EXPECT_EQ(cli({"verify", "--bogus"}), 2);
  EXPECT_EQ(cli({}), 2);
  EXPECT_EQ(cli({"test", "--n", "3", "--k", "1", "--eps", "1.5"}), 2);
  EXPECT_EQ(cli({"test", "--n", "3", "--k", "3", "--hypothesis", "far", "--trials", "1"}), 2);

  // A malformed fixture is a usage error; well-formed groups that are not
  // mutually unbiased fail verification.
  fs::path fx = temp_path("bad.fixture");
  std::ofstream(fx) << "mub_family 1\ngroup 0\ngen +Z\nlabels I X\n";
  EXPECT_EQ(cli({"verify", "--fixture", fx.string()}), 2);
  fs::path dup = temp_path("dup.fixture");
  std::ofstream(dup) << "mub_family 1\ngroup 0\ngen +X\nlabels I Z\ngroup 1\ngen +X\nlabels I Z\n"
                        "group 2\ngen +Z\nlabels I X\n";
  EXPECT_EQ(cli({"verify", "--fixture", dup.string()}, &text), 1);
  EXPECT_NE(text.find("FAIL"), std::string::npos);
}

TEST(Cli, TestCommandReportsFrequencyWithInterval) {
  std::string text;
  fs::path jp = temp_path("cli.jsonl");
  EXPECT_EQ(cli({"test", "--n", "3", "--k", "2", "--eps", "0.6", "--hypothesis", "null", "--trials", "200", "--seed",
                 "7", "--jsonl", jp.string()},
                &text),
            0);
  EXPECT_NE(text.find("H0 frequency 1.0000"), std::string::npos) << text;
  EXPECT_NE(text.find("95% CI"), std::string::npos);
  auto recs = trials_from_jsonl(slurp(jp));
  ASSERT_EQ(recs.size(), 200u);
  EXPECT_EQ(recs[0].queries, 611u);

  std::string again;
  fs::path jp2 = temp_path("cli2.jsonl");
  cli({"test", "--n", "3", "--k", "2", "--eps", "0.6", "--hypothesis", "null", "--trials", "200", "--seed", "7",
       "--jsonl", jp2.string()},
      &again);
  EXPECT_EQ(slurp(jp), slurp(jp2));
}

TEST(Cli, SeedFromEnvironmentAndConfigFile) {
  fs::path a = temp_path("env_a.jsonl"), b = temp_path("env_b.jsonl");
  setenv("HAMTEST_SEED", "123", 1);
  cli({"test", "--n", "3", "--k", "1", "--hypothesis", "far", "--trials", "2", "--jsonl", a.string()});
  unsetenv("HAMTEST_SEED");
  cli({"test", "--n", "3", "--k", "1", "--hypothesis", "far", "--trials", "2", "--seed", "123", "--jsonl",
       b.string()});
  EXPECT_EQ(slurp(a), slurp(b));

  fs::path cfg = temp_path("cfg.ini"), c = temp_path("cfg.jsonl");
  std::ofstream(cfg) << "[test]\nn = 3\nk = 1\nhypothesis = far\ntrials = 2\nseed = 5\neps = 0.5\n";
  EXPECT_EQ(cli({"--config", cfg.string(), "test", "--eps", "0.6", "--jsonl", c.string()}), 0);
  auto recs = trials_from_jsonl(slurp(c));
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].eps, 0.6);
  EXPECT_EQ(recs[0].hypothesis, "far");
  EXPECT_EQ(recs[0].seed, trial_seed(5, 0));
}

TEST(Cli, HamiltonianFileSelectsCustomInstance) {
  fs::path h = temp_path("custom.ham");
  std::ofstream(h) << "n 3\nXXY 0.7\n";
  std::string text;
  EXPECT_EQ(cli({"test", "--n", "3", "--k", "1", "--hamiltonian", h.string(), "--trials", "2"}, &text), 0);
  EXPECT_NE(text.find("hypothesis=custom distance=0.7"), std::string::npos) << text;
  EXPECT_EQ(cli({"test", "--n", "3", "--k", "1", "--hypothesis", "null", "--hamiltonian", h.string()}), 2);
}

TEST(Cli, OtherSubcommands) {
  std::string text;
  EXPECT_EQ(cli({"build-mub", "--n", "1"}, &text), 0);
  EXPECT_EQ(text.substr(0, 12), "mub_family 1");
  EXPECT_EQ(cli({"haar-moments", "--d", "4", "--samples", "20000", "--seed", "3"}), 0);
  EXPECT_EQ(cli({"gadget-stats", "--n", "2", "--samples", "2000"}), 0);
  EXPECT_EQ(cli({"norm-probe", "--n", "2", "--pairs", "2"}), 0);
  EXPECT_EQ(cli({"tolerant", "--n", "3", "--k", "1", "--eps1", "0.1", "--eps2", "0.8", "--trials", "1"}), 0);
  EXPECT_EQ(cli({"sweep", "--ns", "2,3", "--ks", "1", "--epss", "0.6", "--trials", "2"}, &text), 0);
  EXPECT_NE(text.find("single-n2-k1-eps0.600-far"), std::string::npos);

  fs::path h = temp_path("multi.ham");
  std::ofstream(h) << "n 3\nZII 0.65\nXXX 0.65\n";
  EXPECT_EQ(cli({"multi-test", "--n", "3", "--property", "ZII", "--property", "ZII,XXX", "--hamiltonian", h.string(),
                 "--eps", "0.6", "--trials", "1"},
                &text),
            0);
  EXPECT_NE(text.find("property 1: H0 1/1"), std::string::npos) << text;
}

}  // namespace
}  // namespace hamtest
