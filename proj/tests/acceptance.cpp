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

// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hamtest/harness.hpp"
#include "hamtest/testers.hpp"
#include "hamtest/verification.hpp"

namespace {

using namespace hamtest;

namespace tol {
constexpr double kMubResidual = 1e-9;
constexpr double kMubSeconds = 60;
constexpr double kNullSlack = 1e-12;
constexpr double kBoundSlack = 1e-12;
constexpr double kDichotomyCut = 0.5;
constexpr double kTwoThirds = 2.0 / 3.0;
constexpr double kWilsonFloor = 0.60;
constexpr double kEndToEndSeconds = 600;
constexpr double kWeingartenSeconds = 300;
constexpr double kSlopeRel = 0.05;
}  // namespace tol

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PauliString random_pauli(int n, Rng& rng, bool allow_identity) {
  for (;;) {
    PauliString p = PauliString::from_key(n, rng.below(std::uint64_t{1} << (2 * n)));
    if (allow_identity || !p.is_identity()) return p;
  }
}

/// Random H on `terms` non-identity Paulis with Gaussian coefficients and ‖H‖_∞ = 1.
PauliHamiltonian random_unit_hamiltonian(int n, int terms, Rng& rng) {
  PauliHamiltonian h(n);
  while (static_cast<int>(h.size()) < terms) h.set(random_pauli(n, rng, false), rng.normal());
  return h.scaled(1.0 / operator_norm(h));
}

// ---------------------------------------------------------------------------

Outcome criterion_mub() {
  auto t0 = Clock::now();
  double worst = 0;
  bool all = true;
  std::string failed;
  for (int n = 1; n <= 4; ++n) {
    MubFamily f = build_mub_family(n);
    for (const auto& c : mub_invariant_suite(f, tol::kMubResidual)) {
      worst = std::max(worst, c.deviation);
      if (!c.pass) {
        all = false;
        failed += " " + c.name + "@n=" + std::to_string(n);
      }
    }
  }
  double secs = seconds_since(t0);
  bool pass = all && worst < tol::kMubResidual && secs < tol::kMubSeconds;
  return {pass, fmt("n=1..4 max residual %.3e (< %.0e), %.2f s (< %.0f s)%s", worst, tol::kMubResidual, secs,
                    tol::kMubSeconds, failed.c_str())};
}

bool dense_related(const Vector& phi_l, const Vector& phi_j, const PauliString& p, int n) {
  if (std::abs(phi_l.dot(phi_j)) > tol::kDichotomyCut) return true;
  if (p.is_identity()) return false;
  Vector w(phi_j.size());
  apply_pauli(SignedPauli(p), phi_j.data(), w.data(), n);
  return std::abs(phi_l.dot(w)) > tol::kDichotomyCut;
}

Outcome criterion_relation() {
  std::size_t cases = 0, disagreements = 0;
  {
    const int n = 2;
    MubFamily f = build_mub_family(n);
    for (std::uint64_t key = 0; key < 16; ++key) {
      PauliString p = PauliString::from_key(n, key);
      PropertySet s(n, {p});
      for (std::size_t i = 0; i < f.num_bases(); ++i) {
        for (std::size_t j = 0; j < f.dim(); ++j) {
          for (std::size_t l = 0; l < f.dim(); ++l) {
            ++cases;
            bool fast = relates_under_property(f, i, j, l, s);
            if (fast != dense_related(f.state_vector(i, l), f.state_vector(i, j), p, n)) ++disagreements;
          }
        }
      }
    }
  }
  std::size_t exhaustive = cases;
  {
    const int n = 4;
    MubFamily f = build_mub_family(n);
    Rng rng(0x72656c6174696f6eULL);
    for (int c = 0; c < 100000; ++c) {
      std::size_t i = rng.below(f.num_bases()), j = rng.below(f.dim()), l = rng.below(f.dim());
      PauliString p = random_pauli(n, rng, true);
      PropertySet s(n, {p});
      ++cases;
      bool fast = relates_under_property(f, i, j, l, s);
      if (fast != dense_related(f.state_vector(i, l), f.state_vector(i, j), p, n)) ++disagreements;
    }
  }
  return {disagreements == 0, fmt("%zu exhaustive (n=2) + %zu random (n=4) cases, %zu disagreements", exhaustive,
                                  cases - exhaustive, disagreements)};
}

Outcome criterion_null_bound() {
  std::size_t instances = 0, violations = 0;
  double worst_ratio = 0;
  for (int n : {3, 4}) {
    MubFamily f = build_mub_family(n);
    for (int k : {1, 2}) {
      PropertySet s = property_k_local(n, k);
      for (int r = 0; r < 50; ++r) {
        PauliHamiltonian h = random_property_hamiltonian(s, derive_seed(0x6e756c6cULL, 1000 * n + 100 * k + r));
        DenseHamiltonian dh = hamiltonian_to_dense(h);
        for (double t : {0.05, 0.1}) {
          double rate = exact_violation_rate(dh, t, s, f);
          double bound = null_violation_bound(t);
          ++instances;
          worst_ratio = std::max(worst_ratio, rate / bound);
          if (rate > bound + tol::kNullSlack) ++violations;
        }
      }
    }
  }
  return {violations == 0, fmt("%zu (instance, t) pairs, max rate/t^4 = %.4f, %zu above t^4 + 1e-12", instances,
                               worst_ratio, violations)};
}

Outcome criterion_far_bound() {
  std::size_t checked = 0, intermediate_fail = 0, final_checked = 0, final_fail = 0;
  double tightest = std::numeric_limits<double>::infinity();
  Rng rng(0x666172626f756e64ULL);
  for (int n : {3, 4, 5}) {
    MubFamily f = build_mub_family(n);
    for (int r = 0; r < 20; ++r) {
      int k = 1 + r % 2;
      PropertySet s = property_k_local(n, k);
      PauliHamiltonian h = random_unit_hamiltonian(n, 6, rng);
      double eps = distance_to_property(h, s);
      if (eps <= 0) {
        --r;
        continue;
      }
      double t = single_test_time(eps);
      double survival = 1.0 - exact_violation_rate(hamiltonian_to_dense(h), t, s, f);
      double bound = far_survival_bound(t, eps, s.size_with_identity(), f.dim());
      ++checked;
      tightest = std::min(tightest, bound - survival);
      if (survival > bound + tol::kBoundSlack) ++intermediate_fail;
      if (single_size_flag(s, eps).holds) {
        ++final_checked;
        if (survival > far_survival_bound_final(t, eps) + tol::kBoundSlack) ++final_fail;
      }
    }
  }
  bool pass = intermediate_fail == 0 && final_fail == 0;
  return {pass, fmt("%zu far instances, intermediate bound violated %zu times (min slack %.3e); final bound "
                    "asserted on %zu instances where the size hypothesis holds, violated %zu times",
                    checked, intermediate_fail, tightest, final_checked, final_fail)};
}

Outcome criterion_end_to_end() {
  auto t0 = Clock::now();
  const int n = 10;
  ScenarioSpec base;
  base.n = n;
  base.variant = Variant::Single;
  base.property_literals = {"XIIIIIIIII", "YIIIIIIIII", "ZIIIIIIIII"};
  base.eps = 0.9;
  base.trials = 300;
  base.seed = 0x6532652d6e3130ULL;
  MubFamily f = build_mub_family(n);
  AssumptionFlag flag = single_size_flag(scenario_property(base), base.eps);
  bool pass = flag.holds;
  std::ostringstream os;
  os << fmt("n=%d |S+I|=%.0f <= %.3f", n, flag.lhs, flag.rhs);
  for (Hypothesis hyp : {Hypothesis::Null, Hypothesis::Far}) {
    ScenarioSpec spec = base;
    spec.hypothesis = hyp;
    spec.id = std::string("e2e-") + hypothesis_name(hyp);
    ScenarioResult r = run_scenario(spec, &f);
    bool ok = r.scored == r.trials && r.correct_frequency >= tol::kTwoThirds && r.correct_ci.lo > tol::kWilsonFloor;
    pass = pass && ok;
    os << fmt("; %s correct %zu/%zu = %.3f CI [%.3f, %.3f]", hypothesis_name(hyp), r.correct, r.trials,
              r.correct_frequency, r.correct_ci.lo, r.correct_ci.hi);
  }
  double secs = seconds_since(t0);
  pass = pass && secs < tol::kEndToEndSeconds;
  os << fmt("; %.1f s (< %.0f s)", secs, tol::kEndToEndSeconds);
  return {pass, os.str()};
}

Outcome criterion_multi() {
  const int n = 3;
  const double eps = 0.6, delta = 0.1;
  const std::size_t trials = 200;
  PauliHamiltonian h(n);
  h.set(PauliString::parse("ZII"), 0.7);
  h.set(PauliString::parse("XXX"), 0.7);
  std::vector<PropertySet> props = {
      property_from_text("ZII", n), property_from_text("XXX", n), property_from_text("ZII\nXXX", n),
      property_from_text("ZII\nXXX\nYYY", n)};
  std::vector<Verdict> expected;
  for (const auto& s : props) expected.push_back(distance_to_property(h, s) > eps ? Verdict::H1 : Verdict::H0);
  MubFamily f = build_mub_family(n);
  auto spectrum = std::make_shared<const SpectralEvolution>(hamiltonian_to_dense(h));
  std::vector<std::size_t> errors(props.size(), 0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    EvolutionOracle oracle(spectrum);
    MultiTestReport rep = run_multi_test(oracle, f, props, eps, delta, trial_seed(0x6d756c7469ULL, trial));
    for (std::size_t m = 0; m < props.size(); ++m) {
      if (rep.verdicts[m] != expected[m]) ++errors[m];
    }
  }
  bool pass = true;
  std::ostringstream os;
  os << fmt("n=3 M=4 delta=%.2f, %zu trials:", delta, trials);
  for (std::size_t m = 0; m < props.size(); ++m) {
    double freq = static_cast<double>(errors[m]) / trials;
    Interval ci = wilson_interval(errors[m], trials);
    double half = 0.5 * (ci.hi - ci.lo);
    bool ok = freq <= delta + half;
    pass = pass && ok;
    os << fmt(" [property %zu expect %s: error %.3f <= %.3f]", m + 1, verdict_name(expected[m]), freq, delta + half);
  }
  return {pass, os.str()};
}

PauliHamiltonian z0_plus_xs(int n, double a, double b) {
  PauliHamiltonian h(n);
  h.set(PauliString::parse("Z" + std::string(n - 1, 'I')), a);
  h.set(PauliString::parse(std::string(n, 'X')), b);
  return h;
}

Outcome criterion_tolerant() {
  const double eps1 = 0.1, eps2 = 0.8;
  const std::size_t trials = 200;
  double t = tolerant_time(eps1, eps2);
  std::size_t near_checked = 0, near_fail = 0, far_checked = 0, far_fail = 0;
  double near_slack = std::numeric_limits<double>::infinity(), far_slack = near_slack;
  std::ostringstream verdicts;
  bool verdicts_ok = true;
  Rng rng(0x746f6c6572616e74ULL);
  for (int n : {3, 4}) {
    MubFamily f = build_mub_family(n);
    PropertySet s = property_from_text("Z" + std::string(n - 1, 'I'), n);
    PauliString z0 = *s.paulis().begin();
    std::vector<PauliHamiltonian> near = {z0_plus_xs(n, 0.5, eps1)}, far = {z0_plus_xs(n, 0.1, eps2)};
    for (int r = 0; r < 5; ++r) {
      PauliString p;
      do p = random_pauli(n, rng, false);
      while (p == z0);
      PauliHamiltonian hn(n), hf(n);
      hn.set(z0, rng.uniform(-0.8, 0.8));
      hn.set(p, eps1);
      hf.set(z0, rng.uniform(-0.2, 0.2));
      hf.set(p, eps2);
      near.push_back(hn);
      far.push_back(hf);
    }
    for (const auto& h : near) {
      double rate = exact_violation_rate(hamiltonian_to_dense(h), t, s, f);
      double bound = tolerant_near_bound(t, distance_to_property(h, s));
      ++near_checked;
      near_slack = std::min(near_slack, bound - rate);
      if (rate > bound + tol::kBoundSlack) ++near_fail;
    }
    for (const auto& h : far) {
      double rate = exact_violation_rate(hamiltonian_to_dense(h), t, s, f);
      double bound = tolerant_far_bound(t, distance_to_property(h, s));
      ++far_checked;
      far_slack = std::min(far_slack, rate - bound);
      if (rate < bound - tol::kBoundSlack) ++far_fail;
    }

    struct Case {
      const char* name;
      PauliHamiltonian h;
      Verdict expect;
    };
    for (const Case& c : {Case{"near", z0_plus_xs(n, 0.5, eps1), Verdict::H0},
                          Case{"far", z0_plus_xs(n, 0.1, 0.85), Verdict::H1}}) {
      auto spectrum = std::make_shared<const SpectralEvolution>(hamiltonian_to_dense(c.h));
      std::size_t correct = 0;
      for (std::size_t trial = 0; trial < trials; ++trial) {
        EvolutionOracle oracle(spectrum);
        TolerantConfig cfg;
        cfg.eps1 = eps1;
        cfg.eps2 = eps2;
        cfg.seed = trial_seed(derive_seed(0x746f6cULL, n), trial + (c.expect == Verdict::H1 ? trials : 0));
        cfg.keep_rounds = false;
        if (run_tolerant_test(oracle, f, s, cfg).verdict == c.expect) ++correct;
      }
      double freq = static_cast<double>(correct) / trials;
      verdicts_ok = verdicts_ok && freq >= tol::kTwoThirds;
      verdicts << fmt(" n=%d %s %zu/%zu", n, c.name, correct, trials);
    }
  }
  bool pass = near_fail == 0 && far_fail == 0 && verdicts_ok;
  return {pass, fmt("t=%.4f; near bound: %zu/%zu hold (min slack %.3e); far bound: %zu/%zu hold (min slack %.3e); "
                    "verdicts correct:%s",
                    t, near_checked - near_fail, near_checked, near_slack, far_checked - far_fail, far_checked,
                    far_slack, verdicts.str().c_str())};
}

Outcome criterion_weingarten() {
  auto t0 = Clock::now();
  bool pass = true;
  double worst_sigma = 0;
  std::string failed;
  for (std::size_t d : {4, 8}) {
    Rng rng(derive_seed(0x7767ULL, d));
    for (const auto& c : weingarten_monte_carlo(d, 100000, rng)) {
      if (c.sigma > 0) worst_sigma = std::max(worst_sigma, c.deviation / c.sigma);
      if (!c.pass) {
        pass = false;
        failed += " " + c.name;
      }
    }
  }
  double secs = seconds_since(t0);
  pass = pass && secs < tol::kWeingartenSeconds;
  return {pass, fmt("11 values at d=4,8 with 1e5 samples, worst deviation %.2f sigma (<= 5), %.1f s (< %.0f s)%s",
                    worst_sigma, secs, tol::kWeingartenSeconds, failed.c_str())};
}

Outcome criterion_gadget() {
  Rng rng(0x676164676574ULL);
  GadgetStats g = gadget_separation_stats(3, 0.5, 10000, rng);
  return {g.second_moment.pass && g.fourth_moment.pass,
          fmt("E[(1/d)|H_U-H_V|^2] = %.5f vs %.5f (sigma %.2e); E[(1/d^2)|H_U-H_V|^4] = %.5f <= %.5f + 5 sigma",
              g.second_moment.measured, g.second_moment.reference, g.second_moment.sigma, g.fourth_moment.measured,
              g.fourth_moment.reference)};
}

Outcome criterion_norms() {
  const int n = 2;
  Rng rng(0x6e6f726d73ULL);
  std::vector<double> ts = {0.02, 0.01, 0.005};
  bool frob_ok = true, inf_ok = true, sandwich_ok = true;
  std::ostringstream os;
  for (int pair = 0; pair < 5; ++pair) {
    DenseHamiltonian h = hamiltonian_to_dense(random_unit_hamiltonian(n, 15, rng));
    DenseHamiltonian ht = hamiltonian_to_dense(random_unit_hamiltonian(n, 15, rng));
    NormProbe p = norm_relation_probe(h, ht, ts, tol::kSlopeRel);
    frob_ok = frob_ok && p.frobenius.pass;
    inf_ok = inf_ok && p.operator_norm.pass;
    sandwich_ok = sandwich_ok && p.sandwich.pass;
    os << fmt(" [pair %d: D slope %.4f vs %.4f; dist_inf slope %.4f vs |dH|_inf %.4f (spread %.4f)]", pair + 1,
              p.frobenius_slope, p.frobenius_reference, p.inf_slope, p.operator_reference, p.spread_reference);
  }
  return {frob_ok && inf_ok, fmt("Frobenius slope within 5%%: %s; dist_inf slope within 5%% of |H-H~|_inf: %s; "
                                 "dist_inf slope in [|dH|/2, |dH|]: %s;",
                                 frob_ok ? "yes" : "no", inf_ok ? "yes" : "no", sandwich_ok ? "yes" : "no") +
                                 os.str()};
}

Outcome criterion_commuting() {
  const int n = 3;
  std::vector<double> ts = {0.1, 0.05, 0.025};
  Rng rng(0x636f6d6dULL);
  bool pass = true;
  std::ostringstream os;
  for (int inst = 0; inst < 3; ++inst) {
    PauliHamiltonian h(n);
    for (std::uint64_t x = 1; x < 8; ++x) h.set(PauliString(n, x, 0), rng.uniform(-1, 1));
    h = h.scaled(1.0 / operator_norm(h));
    for (int k : {1, 2}) {
      double tail = 0;
      for (const auto& [p, c] : h.terms()) {
        if (p.weight() > k) tail += c * c;
      }
      std::vector<double> ratio;
      for (double t : ts) ratio.push_back(std::abs(commuting_case_rate(h, k, t) / (t * t) - tail) / t);
      // C is fitted at the largest t; smaller times must respect it.
      double c_fit = ratio.front();
      bool ok = std::isfinite(c_fit);
      for (std::size_t m = 1; m < ratio.size(); ++m) ok = ok && ratio[m] <= c_fit * (1 + 1e-9) + 1e-12;
      pass = pass && ok;
      os << fmt(" [inst %d k=%d: C=%.4f, remainder/t = %.4f %.4f %.4f]", inst + 1, k, c_fit, ratio[0], ratio[1],
                ratio[2]);
    }
  }
  return {pass, "X-type n=3, t in {0.1, 0.05, 0.025}:" + os.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "MUB and 2-design exactness", criterion_mub},
      {2, "relation check equivalence", criterion_relation},
      {3, "null-side one-round bound", criterion_null_bound},
      {4, "far-side one-round bound", criterion_far_bound},
      {5, "end-to-end tester guarantee", criterion_end_to_end},
      {6, "multi-property tester", criterion_multi},
      {7, "tolerant tester", criterion_tolerant},
      {8, "Weingarten values", criterion_weingarten},
      {9, "learning-gadget moments", criterion_gadget},
      {10, "short-time norm relations", criterion_norms},
      {11, "commuting warm-up", criterion_commuting},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hamtest acceptance suite"};
  std::vector<int> only;
  app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << ")  " << o.detail
              << fmt("  [%.1f s]", seconds_since(t0)) << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
