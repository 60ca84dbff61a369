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
#include <numeric>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "hamtest/evolution.hpp"
#include "hamtest/testers.hpp"

namespace hamtest {

struct CheckResult {
  std::string name;
  double measured = 0;
  double reference = 0;
  double deviation = 0;
  double tolerance = 0;
  double sigma = 0;
  bool pass = false;
  std::string detail;
};

inline CheckResult make_check(std::string name, double measured, double reference, double tolerance,
                              double sigma = 0, std::string detail = {}) {
  CheckResult c{std::move(name), measured, reference, std::abs(measured - reference), tolerance, sigma, false,
                std::move(detail)};
  c.pass = c.deviation <= tolerance;
  return c;
}

/// Upper-bound style check: passes iff measured <= reference + tolerance.
inline CheckResult make_bound_check(std::string name, double measured, double reference, double tolerance,
                                    double sigma = 0, std::string detail = {}) {
  CheckResult c{std::move(name), measured, reference, std::max(0.0, measured - reference), tolerance, sigma, false,
                std::move(detail)};
  c.pass = measured <= reference + tolerance;
  return c;
}

/// Running mean and standard error (Welford).
class MeanAccumulator {
 public:
  void add(double x) {
    ++n_;
    double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

// ---------------------------------------------------------------------------
// Permutations and the Weingarten function

using Permutation = std::vector<int>;

inline Permutation identity_permutation(int m) {
  Permutation p(m);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

/// (a b)(k) = a(b(k)).
inline Permutation compose(const Permutation& a, const Permutation& b) {
  Permutation r(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) r[k] = a[b[k]];
  return r;
}

inline Permutation inverse(const Permutation& a) {
  Permutation r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[a[k]] = static_cast<int>(k);
  return r;
}

inline std::vector<std::vector<int>> cycles(const Permutation& p) {
  std::vector<std::vector<int>> out;
  std::vector<bool> seen(p.size(), false);
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (seen[s]) continue;
    std::vector<int> c;
    for (int k = static_cast<int>(s); !seen[k]; k = p[k]) {
      seen[k] = true;
      c.push_back(k);
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Cycle lengths in decreasing order, e.g. {2, 1, 1} for (12)(3)(4).
inline std::vector<int> cycle_type(const Permutation& p) {
  std::vector<int> t;
  for (const auto& c : cycles(p)) t.push_back(static_cast<int>(c.size()));
  std::sort(t.begin(), t.end(), std::greater<>());
  return t;
}

/// A permutation with the given cycle type, cycles on consecutive points.
inline Permutation permutation_of_type(const std::vector<int>& type) {
  int m = std::accumulate(type.begin(), type.end(), 0);
  Permutation p(m);
  int start = 0;
  for (int len : type) {
    for (int k = 0; k < len; ++k) p[start + k] = start + (k + 1) % len;
    start += len;
  }
  return p;
}

inline std::string cycle_type_name(const std::vector<int>& type) {
  std::string s;
  int next = 1;
  for (int len : type) {
    s += "(";
    for (int k = 0; k < len; ++k) s += std::to_string(next++);
    s += ")";
  }
  return s;
}

/// The eleven cycle types with m <= 4, in the order of the tabulated list.
inline std::vector<std::vector<int>> tabulated_cycle_types() {
  return {{1}, {2}, {1, 1}, {3}, {2, 1}, {1, 1, 1}, {4}, {2, 2}, {3, 1}, {2, 1, 1}, {1, 1, 1, 1}};
}

inline double weingarten_value(std::vector<int> type, double d) {
  std::sort(type.begin(), type.end(), std::greater<>());
  int m = std::accumulate(type.begin(), type.end(), 0);
  if (m < 1 || m > 4) throw ArgumentError("weingarten_value covers 1 <= m <= 4");
  auto nonzero = [&](double den) {
    if (std::abs(den) < 1e-300) {
      throw DomainError("Weingarten denominator vanishes at d = " + std::to_string(d) + " for " +
                        cycle_type_name(type));
    }
    return den;
  };
  double d2 = d * d;
  if (d < m) nonzero(0.0);
  using V = std::vector<int>;
  if (type == V{1}) return 1.0 / nonzero(d);
  if (type == V{2}) return -1.0 / nonzero(d * (d2 - 1));
  if (type == V{1, 1}) return 1.0 / nonzero(d2 - 1);
  if (type == V{3}) return 2.0 / nonzero(d * (d2 - 1) * (d2 - 4));
  if (type == V{2, 1}) return -1.0 / nonzero((d2 - 1) * (d2 - 4));
  if (type == V{1, 1, 1}) return (d2 - 2) / nonzero(d * (d2 - 1) * (d2 - 4));
  double den8 = nonzero(d2 * d2 * d2 * d2 - 14 * d2 * d2 * d2 + 49 * d2 * d2 - 36 * d2);
  if (type == V{4}) return -5.0 / nonzero(d2 * d2 * d2 * d - 14 * d2 * d2 * d + 49 * d2 * d - 36 * d);
  if (type == V{2, 2}) return (d2 + 6) / den8;
  if (type == V{3, 1}) return (2 * d2 - 3) / den8;
  if (type == V{2, 1, 1}) return -1.0 / nonzero(d2 * d2 * d - 10 * d2 * d + 9 * d);
  return (d2 * d2 - 8 * d2 + 6) / den8;
}

inline double weingarten(const Permutation& p, double d) { return weingarten_value(cycle_type(p), d); }

/// Tr_σ(M_0, ..., M_{m-1}) = Π_cycles Tr(M_k M_{σ(k)} M_{σ²(k)} ...).
inline cplx cycle_trace(const Permutation& sigma, const std::vector<Matrix>& ms) {
  cplx out = 1;
  for (const auto& c : cycles(sigma)) {
    Matrix prod = ms[c[0]];
    for (std::size_t k = 1; k < c.size(); ++k) prod = prod * ms[c[k]];
    out *= prod.trace();
  }
  return out;
}

/// E Tr(U B_1 U† A_1 ... U B_m U† A_m) = Σ_{α,β} Wg(βα⁻¹) Tr_{β⁻¹}(B) Tr_{αγ}(A), γ = (1 2 ... m).
inline cplx weingarten_trace_moment(const std::vector<Matrix>& bs, const std::vector<Matrix>& as) {
  if (bs.size() != as.size() || bs.empty()) throw ArgumentError("moment needs matching nonempty B and A lists");
  int m = static_cast<int>(bs.size());
  double d = static_cast<double>(bs[0].rows());
  Permutation gamma(m);
  for (int k = 0; k < m; ++k) gamma[k] = (k + 1) % m;
  std::vector<Permutation> perms;
  Permutation p = identity_permutation(m);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  std::vector<cplx> trb(perms.size()), tra(perms.size());
  for (std::size_t k = 0; k < perms.size(); ++k) {
    trb[k] = cycle_trace(inverse(perms[k]), bs);
    tra[k] = cycle_trace(compose(perms[k], gamma), as);
  }
  cplx total = 0;
  for (std::size_t a = 0; a < perms.size(); ++a) {
    Permutation ainv = inverse(perms[a]);
    for (std::size_t b = 0; b < perms.size(); ++b) {
      total += weingarten(compose(perms[b], ainv), d) * trb[b] * tra[a];
    }
  }
  return total;
}

inline cplx trace_word(const Matrix& u, const std::vector<Matrix>& bs, const std::vector<Matrix>& as) {
  Matrix prod = Matrix::Identity(u.rows(), u.cols());
  for (std::size_t k = 0; k < bs.size(); ++k) prod = prod * u * bs[k] * u.adjoint() * as[k];
  return prod.trace();
}

/// Monte-Carlo estimates of Wg(σ, d) for all eleven tabulated cycle types from
/// shared samples: E[Π_k U_kk conj(Π_k U_{σ(k)k})] = Wg(σ, d) for d >= m.
inline std::vector<CheckResult> weingarten_monte_carlo(std::size_t d, std::size_t samples, Rng& rng) {
  auto types = tabulated_cycle_types();
  std::vector<MeanAccumulator> acc(types.size());
  std::vector<Permutation> perms;
  for (const auto& t : types) perms.push_back(permutation_of_type(t));
  for (std::size_t s = 0; s < samples; ++s) {
    Matrix u = haar_unitary(d, rng);
    for (std::size_t c = 0; c < types.size(); ++c) {
      cplx v = 1;
      for (std::size_t k = 0; k < perms[c].size(); ++k) v *= u(k, k) * std::conj(u(perms[c][k], k));
      acc[c].add(v.real());
    }
  }
  std::vector<CheckResult> out;
  for (std::size_t c = 0; c < types.size(); ++c) {
    double ref = weingarten_value(types[c], static_cast<double>(d));
    double sigma = acc[c].std_error();
    out.push_back(make_check("weingarten " + cycle_type_name(types[c]) + " d=" + std::to_string(d), acc[c].mean(),
                             ref, 5.0 * sigma + 1e-15, sigma));
  }
  return out;
}

enum class MomentPattern { FirstMoment, SecondMoment, FourthPower, Custom };

struct MomentSpec {
  MomentPattern pattern = MomentPattern::Custom;
  std::string name;
  std::vector<Matrix> b;
  std::vector<Matrix> a;
  std::size_t samples = 1000;
};

inline Matrix random_complex_matrix(std::size_t d, Rng& rng) {
  Matrix m(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < d; ++r) m(r, c) = rng.complex_normal();
  }
  return m;
}

inline Matrix random_density_matrix(std::size_t d, Rng& rng) {
  Matrix g = random_complex_matrix(d, rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// E Tr(U B U† A).
inline MomentSpec first_moment_spec(const Matrix& a, const Matrix& b, std::size_t samples) {
  return {MomentPattern::FirstMoment, "first moment Tr(UBU*A)", {b}, {a}, samples};
}

/// E <φ|V M V† ρ V S† V†|φ>, the second-moment pattern of the spiked-gadget bound.
inline MomentSpec second_moment_spec(const Matrix& m, const Matrix& s, const Matrix& rho, const Vector& phi,
                                     std::size_t samples) {
  return {MomentPattern::SecondMoment, "second moment <phi|VMV*rho VS*V*|phi>", {m, s.adjoint()},
          {rho, phi * phi.adjoint()}, samples};
}

/// E <φ|UOU† ρ UOU†|φ>², written as a single trace with m = 4.
inline MomentSpec fourth_power_spec(const Matrix& o, const Matrix& rho, const Vector& phi, std::size_t samples) {
  Matrix proj = phi * phi.adjoint();
  return {MomentPattern::FourthPower, "fourth power <phi|UOU*rho UOU*|phi>^2", {o, o, o, o},
          {rho, proj, rho, proj}, samples};
}

/// Closed form for m = 2 used to cross-check the permutation sum.
inline cplx second_moment_closed_form(const Matrix& b1, const Matrix& b2, const Matrix& a1, const Matrix& a2) {
  double d = static_cast<double>(b1.rows());
  cplx tb1 = b1.trace(), tb2 = b2.trace(), ta1 = a1.trace(), ta2 = a2.trace();
  cplx tbb = (b1 * b2).trace(), taa = (a1 * a2).trace();
  return (tb1 * tb2 * taa + tbb * ta1 * ta2) / (d * d - 1) - (tb1 * tb2 * ta1 * ta2 + tbb * taa) / (d * (d * d - 1));
}

inline CheckResult haar_moment_check(const MomentSpec& spec, Rng& rng) {
  if (spec.samples < 1000) throw ArgumentError("haar_moment_check needs at least 1000 samples");
  std::size_t d = static_cast<std::size_t>(spec.b.at(0).rows());
  MeanAccumulator re, im;
  for (std::size_t s = 0; s < spec.samples; ++s) {
    cplx v = trace_word(haar_unitary(d, rng), spec.b, spec.a);
    re.add(v.real());
    im.add(v.imag());
  }
  cplx ref = weingarten_trace_moment(spec.b, spec.a);
  cplx mean(re.mean(), im.mean());
  double sigma = std::hypot(re.std_error(), im.std_error());
  double scale = std::max(1.0, std::abs(ref));
  CheckResult c = make_check(spec.name, std::abs(mean), std::abs(ref), 5.0 * sigma + 1e-10 * scale, sigma);
  c.deviation = std::abs(mean - ref);
  c.pass = c.deviation <= c.tolerance;
  c.detail = "re=" + std::to_string(mean.real()) + " im=" + std::to_string(mean.imag()) +
             " ref_re=" + std::to_string(ref.real()) + " ref_im=" + std::to_string(ref.imag());
  return c;
}

// ---------------------------------------------------------------------------
// Gadget statistics

struct GadgetStats {
  CheckResult second_moment;
  CheckResult fourth_moment;
};

/// Pairs of independent learning gadgets: E[(1/d)‖H_U − H_V‖₂²] against 2ε²
/// and E[(1/d²)‖H_U − H_V‖₂⁴] against the bound 6ε².
inline GadgetStats gadget_separation_stats(int n, double eps, std::size_t samples, Rng& rng) {
  if (samples < 1000) throw ArgumentError("gadget_separation_stats needs at least 1000 samples");
  std::size_t d = dim_of(n);
  MeanAccumulator x2, x4;
  for (std::size_t s = 0; s < samples; ++s) {
    Matrix hu = learning_gadget_from(n, eps, haar_unitary(d, rng)).matrix;
    Matrix hv = learning_gadget_from(n, eps, haar_unitary(d, rng)).matrix;
    double x = (hu - hv).squaredNorm() / static_cast<double>(d);
    x2.add(x);
    x4.add(x * x);
  }
  GadgetStats g;
  g.second_moment = make_check("gadget second moment", x2.mean(), 2 * eps * eps, 5 * x2.std_error(), x2.std_error());
  g.fourth_moment =
      make_bound_check("gadget fourth moment bound", x4.mean(), 6 * eps * eps, 5 * x4.std_error(), x4.std_error());
  return g;
}

struct SpikedProbe {
  CheckResult mean;
  std::vector<double> thresholds;
  std::vector<double> tail;  // empirical P[f >= s] per threshold
};

/// f(V) = <v|K|v> over Haar-random |v>.
inline SpikedProbe spiked_concentration_probe(int n, const Matrix& k, std::size_t samples, Rng& rng,
                                              std::vector<double> thresholds = {0.1, 0.25, 0.5, 0.75}) {
  std::size_t d = dim_of(n);
  if (static_cast<std::size_t>(k.rows()) != d) throw DimensionError("K has the wrong dimension");
  if (hermitian_operator_norm(k) > 1 + 1e-12) throw ArgumentError("spiked probe needs ‖K‖ <= 1");
  MeanAccumulator f;
  std::vector<std::size_t> hits(thresholds.size(), 0);
  for (std::size_t s = 0; s < samples; ++s) {
    Vector v = haar_vector(d, rng);
    double val = v.dot(k * v).real();
    f.add(val);
    for (std::size_t q = 0; q < thresholds.size(); ++q) hits[q] += val >= thresholds[q];
  }
  SpikedProbe p;
  p.mean = make_check("spiked mean <v|K|v>", f.mean(), k.trace().real() / static_cast<double>(d),
                      5 * f.std_error() + 1e-14, f.std_error());
  p.thresholds = thresholds;
  for (auto h : hits) p.tail.push_back(static_cast<double>(h) / static_cast<double>(samples));
  return p;
}

// ---------------------------------------------------------------------------
// Short-time norm relations

/// D = (1/√2)‖C(U) − C(V)‖₂ from dense normalised Choi states.
inline double choi_distance(const Matrix& u, const Matrix& v) {
  Eigen::Index d = u.rows();
  Vector cu(d * d), cv(d * d);
  // |Ω> = Σ_k |k>|k>/√d; (U ⊗ I)|Ω> has entry U(a, k) at index a*d + k.
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index k = 0; k < d; ++k) {
      cu[a * d + k] = u(a, k);
      cv[a * d + k] = v(a, k);
    }
  }
  double s = 1.0 / std::sqrt(static_cast<double>(d));
  cu *= s;
  cv *= s;
  Matrix diff = cu * cu.adjoint() - cv * cv.adjoint();
  return diff.norm() / std::sqrt(2.0);
}

inline double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// min_φ ‖U − e^{iφ}V‖_∞ on a 720-point grid refined by golden-section search.
inline double dist_inf(const Matrix& u, const Matrix& v) {
  auto f = [&](double phi) { return spectral_norm(u - std::polar(1.0, phi) * v); };
  const int grid = 720;
  double step = 2 * std::numbers::pi / grid;
  int best = 0;
  double best_val = f(0.0);
  for (int k = 1; k < grid; ++k) {
    double val = f(k * step);
    if (val < best_val) {
      best_val = val;
      best = k;
    }
  }
  double lo = (best - 1) * step, hi = (best + 1) * step;
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min(best_val, std::min(f1, f2));
}

/// Leading slope s0 of g(t) = s0 t + c t² + ... from the two smallest times.
inline double richardson_slope(const std::vector<double>& ts, const std::vector<double>& gs) {
  std::size_t n = ts.size();
  if (n < 2) throw ArgumentError("slope fit needs at least two times");
  double t1 = ts[n - 2], t2 = ts[n - 1];
  double s1 = gs[n - 2] / t1, s2 = gs[n - 1] / t2;
  return (t1 * s2 - t2 * s1) / (t1 - t2);
}

struct NormProbe {
  std::vector<double> times;
  std::vector<double> choi;
  std::vector<double> dist;
  double frobenius_slope = 0;
  double inf_slope = 0;
  double frobenius_reference = 0;  // (1/√d)‖H − H̃‖₂
  double operator_reference = 0;   // ‖H − H̃‖_∞
  double spread_reference = 0;     // (λmax − λmin)/2 of H − H̃
  CheckResult frobenius;
  CheckResult operator_norm;
  CheckResult sandwich;
};

/// Fits the short-time slopes of D(U_t, Ũ_t) and dist_∞(U_t, Ũ_t) with
/// U_t = e^{-itH}, and compares them against the Hamiltonian distances.
inline NormProbe norm_relation_probe(const DenseHamiltonian& h, const DenseHamiltonian& ht, std::vector<double> ts,
                                     double rel_tol = 0.05) {
  if (h.n != ht.n) throw DimensionError("norm probe Hamiltonians differ in size");
  double scale = std::max(1.0, h.matrix.cwiseAbs().maxCoeff());
  if (std::abs(h.matrix.trace() - ht.matrix.trace()) > 1e-10 * scale * static_cast<double>(h.dim())) {
    throw ArgumentError("norm_relation_probe needs Tr H = Tr H~");
  }
  if (ts.size() < 2) throw ArgumentError("norm_relation_probe needs at least two times");
  for (std::size_t k = 1; k < ts.size(); ++k) {
    if (!(ts[k] < ts[k - 1]) || ts[k] <= 0) throw ArgumentError("t_list must decrease toward 0");
  }
  NormProbe p;
  p.times = ts;
  SpectralEvolution eh(h), et(ht);
  for (double t : ts) {
    Matrix u = eh.compute(-t), v = et.compute(-t);
    p.choi.push_back(choi_distance(u, v));
    p.dist.push_back(dist_inf(u, v));
  }
  Matrix diff = h.matrix - ht.matrix;
  Eigen::VectorXd ev = hermitian_eigenvalues(diff);
  p.frobenius_reference = diff.norm() / std::sqrt(static_cast<double>(h.dim()));
  p.operator_reference = ev.cwiseAbs().maxCoeff();
  p.spread_reference = 0.5 * (ev.maxCoeff() - ev.minCoeff());
  p.frobenius_slope = richardson_slope(ts, p.choi);
  p.inf_slope = richardson_slope(ts, p.dist);
  auto rel = [&](double ref) { return rel_tol * std::max(ref, 1e-300); };
  p.frobenius = make_check("choi slope vs (1/sqrt d)|H-H~|_2", p.frobenius_slope, p.frobenius_reference,
                           rel(p.frobenius_reference));
  p.operator_norm =
      make_check("dist_inf slope vs |H-H~|_inf", p.inf_slope, p.operator_reference, rel(p.operator_reference));
  double lo = 0.5 * p.operator_reference * (1 - rel_tol), hi = p.operator_reference * (1 + rel_tol);
  p.sandwich = make_check("dist_inf slope in [|H-H~|_inf/2, |H-H~|_inf]", p.inf_slope, 0.5 * (lo + hi), 0.5 * (hi - lo),
                          0, "spread (lmax-lmin)/2 = " + std::to_string(p.spread_reference));
  return p;
}

// ---------------------------------------------------------------------------
// MUB invariants

/// Independent route to the exact violation rate: basis vectors from the
/// projector formula, e^{itH} from the scaling-and-squaring exponential, and
/// the relation from dense overlaps |<φ_l|P|φ_j>| over P ∈ S ∪ {I}.
inline double violation_rate_reference(const DenseHamiltonian& h, double t, const PropertySet& s, const MubFamily& f) {
  std::size_t d = f.dim();
  Matrix u = (cplx(0, t) * h.matrix).exp();
  std::vector<Matrix> ops{Matrix::Identity(d, d)};
  for (const auto& p : s.paulis()) ops.push_back(pauli_to_matrix(p));
  double total = 0;
  for (std::size_t i = 0; i < f.num_bases(); ++i) {
    Matrix basis(d, d);
    for (std::size_t j = 0; j < d; ++j) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(stabilizer_projector(f, i, j));
      basis.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(static_cast<Eigen::Index>(d) - 1);
    }
    Matrix amp = basis.adjoint() * u * basis;
    std::vector<Matrix> overlaps;
    for (const auto& op : ops) overlaps.push_back(basis.adjoint() * op * basis);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t l = 0; l < d; ++l) {
        bool related = false;
        for (const auto& ov : overlaps) related = related || std::abs(ov(l, j)) > 0.5;
        if (!related) total += std::norm(amp(l, j));
      }
    }
  }
  return total / static_cast<double>(d * (d + 1));
}

inline std::vector<CheckResult> mub_invariant_suite(const MubFamily& f, double tol = 1e-9) {
  int n = f.qubits();
  require_dense(n, "mub_invariant_suite");
  std::size_t d = f.dim();
  std::size_t m = f.num_bases();
  std::vector<CheckResult> out;

  double ortho = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const Matrix& b = f.basis(i);
    ortho = std::max(ortho, (b.adjoint() * b - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
  }
  out.push_back(make_check("orthonormality", ortho, 0, tol));

  double unb = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = i + 1; k < m; ++k) {
      Eigen::MatrixXd ov = (f.basis(i).adjoint() * f.basis(k)).cwiseAbs2();
      unb = std::max(unb, (ov.array() - 1.0 / static_cast<double>(d)).abs().maxCoeff());
    }
  }
  out.push_back(make_check("unbiasedness |<phi_ij|phi_kl>|^2 = 1/d", unb, 0, tol));

  {
    std::size_t d2 = d * d;
    Matrix w(d2, m * d);
    for (std::size_t i = 0; i < m; ++i) {
      const Matrix& b = f.basis(i);
      for (std::size_t j = 0; j < d; ++j) {
        Eigen::Index col = static_cast<Eigen::Index>(i * d + j);
        for (std::size_t a = 0; a < d; ++a) {
          for (std::size_t c = 0; c < d; ++c) w(a * d + c, col) = b(a, j) * b(c, j);
        }
      }
    }
    Matrix avg = w * w.adjoint();
    Matrix target = Matrix::Identity(d2, d2);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t c = 0; c < d; ++c) target(a * d + c, c * d + a) += 1.0;
    }
    double norm = static_cast<double>(d * (d + 1));
    out.push_back(make_check("2-design identity", ((avg - target) / norm).cwiseAbs().maxCoeff(), 0, tol));
  }

  {
    // The sign-sum identity plus closure of the signed members, which is the
    // group hypothesis it relies on.
    double worst = 0;
    std::size_t bad_closure = 0;
    std::uint64_t all = std::uint64_t{1} << (2 * n);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& g = f.group(i);
      for (std::size_t a = 0; a < g.members.size(); ++a) {
        if (!g.members[a].is_real()) ++bad_closure;
        for (std::size_t b = a; b < g.members.size(); ++b) {
          if (pauli_multiply(g.members[a], g.members[b]) != g.members[a ^ b]) ++bad_closure;
        }
      }
      if (g.members[0].phase != 0) ++bad_closure;
      for (std::uint64_t key = 0; key < all; ++key) {
        PauliString q = PauliString::from_key(n, key);
        double sum = 0;
        for (const auto& p : g.members) sum += commutation_bit(p.pauli, q) ? -1.0 : 1.0;
        sum /= static_cast<double>(g.members.size());
        worst = std::max(worst, std::abs(sum - (g.contains(q) ? 1.0 : 0.0)));
      }
    }
    out.push_back(make_check("sign-sum lemma", worst + static_cast<double>(bad_closure), 0, tol, 0,
                             "closure failures: " + std::to_string(bad_closure)));
  }

  {
    double worst = 0;
    std::size_t mismatches = 0;
    std::uint64_t all = std::uint64_t{1} << (2 * n);
    for (std::size_t i = 0; i < m; ++i) {
      const Matrix& b = f.basis(i);
      Matrix pb(d, d);
      for (std::uint64_t key = 0; key < all; ++key) {
        PauliString q = PauliString::from_key(n, key);
        SignedPauli sq(q);
        for (std::size_t j = 0; j < d; ++j) {
          apply_pauli(sq, b.col(static_cast<Eigen::Index>(j)).data(), pb.col(static_cast<Eigen::Index>(j)).data(), n);
        }
        Eigen::MatrixXd ov = (b.adjoint() * pb).cwiseAbs();
        for (std::size_t j = 0; j < d; ++j) {
          for (std::size_t l = 0; l < d; ++l) {
            double v = ov(l, j);
            worst = std::max(worst, std::min(v, std::abs(1 - v)));
            bool shortcut = f.contains(i, f.label(i, l) * f.label(i, j) * q);
            if (shortcut != (v > 0.5)) ++mismatches;
          }
        }
      }
    }
    out.push_back(make_check("overlap dichotomy", worst + static_cast<double>(mismatches), 0, tol, 0,
                             "shortcut mismatches: " + std::to_string(mismatches)));
  }

  {
    double worst = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const Matrix& b = f.basis(i);
      Vector w(d);
      for (const auto& p : f.group(i).members) {
        for (std::size_t j = 0; j < d; ++j) {
          Vector phi = b.col(static_cast<Eigen::Index>(j));
          apply_pauli(p, phi.data(), w.data(), n);
          double s = commutation_bit(p.pauli, f.label(i, j)) ? -1.0 : 1.0;
          worst = std::max(worst, (w - s * phi).cwiseAbs().maxCoeff());
        }
      }
    }
    out.push_back(make_check("eigenvalue pattern", worst, 0, tol));
  }
  return out;
}

}  // namespace hamtest
