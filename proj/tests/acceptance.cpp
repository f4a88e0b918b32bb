/*
 * Acceptance suite: one pass/fail line per criterion, nonzero exit iff any
 * criterion fails.  Tolerances are pinned here from the build contract; the
 * recovery-scenario constants (bump width/center, probe lattice, eps) were
 * calibrated against the direct quadrature oracle before being frozen.
 */

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "mse/cgo.hpp"
#include "mse/pipeline.hpp"

using namespace mse;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<Criterion> g_results;

template <class F>
void run_criterion(int id, const std::string& name, F&& body) {
  Criterion c;
  c.id = id;
  c.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail = std::string("exception: ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion-%02d %s: %s (%.1fs)\n", c.pass ? "PASS" : "FAIL", c.id,
              c.name.c_str(), c.detail.c_str(), c.seconds);
  std::fflush(stdout);
  g_results.push_back(c);
}

Grid box2(double half, int n) { return Grid(Domain{Vec{-half, -half}, Vec{half, half}}, n); }

NewtonConfig open_cfg() {
  NewtonConfig cfg;
  cfg.enforce_amplitude_gate = false;
  return cfg;
}

std::vector<ConformalFactor> catalog3() {
  std::vector<ConformalFactor> cs;
  for (const char* id : {"constant", "exp-tangential", "bump-cubic", "bump-cubic-var", "quartic"})
    cs.push_back(make_scenario(id, 3));
  return cs;
}

char buf_[512];
template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf_, sizeof(buf_), f, a...);
  return buf_;
}

// ---------------------------------------------------------------- criteria

void c1_derivation(Criterion& c) {
  std::mt19937_64 rng(101);
  double worst_id = 0.0, worst_fac = 0.0;
  for (int n : {3, 4}) {
    for (const char* id : {"constant", "exp-tangential", "bump-cubic", "bump-cubic-var", "quartic"}) {
      const ConformalFactor cf = make_scenario(id, n);
      std::uniform_real_distribution<double> U(-0.8, 0.8);
      for (int s = 0; s < 20; ++s) {
        JetPoint j;
        const int d = n - 1;
        j.x = Vec::zero(d);
        j.p = Vec::zero(d);
        j.P = Mat::zero(d);
        for (int a = 0; a < d; ++a) j.x[a] = U(rng);
        j.u = 0.4 * U(rng);
        for (int a = 0; a < d; ++a) j.p[a] = U(rng);
        for (int a = 0; a < d; ++a)
          for (int b = a; b < d; ++b) j.P(a, b) = j.P(b, a) = U(rng);
        const double gr = graph_residual_at(cf, j);
        const double ir = implicit_residual_at(cf, j);
        const double dr = divergence_residual_at(cf, j);
        const double W2 = 1.0 + j.p.dot(j.p);
        worst_id = std::max(worst_id, std::abs(ir - W2 * gr) / std::max(1.0, std::abs(ir)));
        worst_fac = std::max(worst_fac, std::abs(gr - std::sqrt(W2) * dr) / std::max(1.0, std::abs(gr)));
      }
    }
  }
  c.pass = worst_id <= 1e-10 && worst_fac <= 1e-10;
  c.detail = fmt("implicit=(1+|∇u|²)·graph worst rel %.2e; graph=√(1+|∇u|²)·divergence worst rel %.2e",
                 worst_id, worst_fac);
}

void c2_euclidean(Criterion& c) {
  const ConformalFactor flat = make_scenario("constant", 3);
  // affine reproduced exactly
  const Grid ga = box2(1.0, 65);
  const Vec a{0.3, -0.45};
  const BoundaryField fa = BoundaryField::sample(ga, [&](const Vec& x) { return a.dot(x); });
  const SolveResult sa = solve_mse(flat, ga, fa, open_cfg());
  double aff_err = 1e300;
  if (sa.converged) {
    aff_err = 0.0;
    for (long i = 0; i < ga.num_nodes(); ++i)
      aff_err = std::max(aff_err, std::abs(sa.u[i] - a.dot(ga.coords(i))));
  }
  // Scherk grid-halving ratios across 65 -> 129 -> 257
  ScherkField sch;
  auto scherk_err = [&](int n) {
    const Grid g = box2(1.2, n);
    const BoundaryField f = BoundaryField::sample(g, [&](const Vec& x) { return sch.value(x); });
    const SolveResult sr = solve_mse(flat, g, f, open_cfg());
    if (!sr.converged) return -1.0;
    double w = 0.0;
    for (long i = 0; i < g.num_nodes(); ++i)
      w = std::max(w, std::abs(sr.u[i] - sch.value(g.coords(i))));
    return w;
  };
  const double e65 = scherk_err(65), e129 = scherk_err(129), e257 = scherk_err(257);
  const double r1 = e65 / e129, r2 = e129 / e257;
  c.pass = aff_err <= 1e-10 && e65 > 0 && e129 > 0 && e257 > 0 && r1 >= 3.5 && r1 <= 4.5 &&
           r2 >= 3.5 && r2 <= 4.5;
  c.detail = fmt("affine sup err %.1e; scherk errors %.2e/%.2e/%.2e ratios %.2f, %.2f", aff_err,
                 e65, e129, e257, r1, r2);
}

void c3_small_data(Criterion& c) {
  bool ok = true;
  std::string rec;
  for (const auto& cf : catalog3()) {
    const Grid g = box2(M_PI_2, 65);
    BoundaryField shape = BoundaryField::sample(
        g, [](const Vec& x) { return std::cos(0.9 * x[0] + 0.3) * std::cos(0.7 * x[1] - 0.2); });
    const double nrm = boundary_surrogate_norm(shape);
    for (long b = 0; b < g.num_boundary(); ++b) shape[b] /= nrm;
    NewtonConfig cfg;  // gate on: delta = 0.05
    const std::vector<double> amps{0.00625, 0.0125, 0.025, 0.05};
    const AmplitudeSweep sweep = amplitude_sweep(cf, g, shape, amps, cfg);
    double C = 0.0, tailK = 0.0;
    bool conv = true, quad = true;
    for (const auto& row : sweep.rows) {
      conv = conv && row.converged && row.iterations <= 8;
      C = std::max(C, row.ratio);
    }
    // quadratic tail at the largest amplitude
    BoundaryField f(g);
    for (long b = 0; b < g.num_boundary(); ++b) f[b] = 0.05 * shape[b];
    const SolveResult sr = solve_mse(cf, g, f, cfg);
    for (size_t k = 0; sr.converged && k + 1 < sr.residual_history.size(); ++k) {
      const double rk = sr.residual_history[k], rn = sr.residual_history[k + 1];
      if (rk <= 1e-4 && rk > 1e-14 && rn > 1e-14) {
        const double K = rn / (rk * rk);
        tailK = std::max(tailK, K);
        if (rn > std::max(100.0 * rk * rk, 1e-14)) quad = false;
      }
    }
    // ratio converging as eps -> 0
    const double rconv = std::abs(sweep.rows[0].ratio - sweep.rows[1].ratio);
    ok = ok && conv && quad && C < 10.0 && rconv <= 0.02 * std::max(1.0, C);
    rec += fmt("%s C=%.3f K=%.1f; ", cf.scenario().c_str(), C, tailK);
  }
  c.pass = ok;
  c.detail = rec;
}

void c4_first_lin(Criterion& c) {
  const ConformalFactor bump = make_scenario("bump-cubic", 3);
  const Grid g = box2(M_PI_2, 33);
  const BoundaryField f = BoundaryField::sample(
      g, [](const Vec& x) { return std::cos(0.8 * x[0] + 0.3) * std::cos(0.6 * x[1] - 0.2); });
  const ScalarField v = solve_first_lin(bump, g, f);
  NewtonConfig cfg = open_cfg();
  const DividedDifference dd =
      divided_difference(bump, g, {f}, EpsilonSchedule::dyadic(0.1, 6), cfg);
  std::vector<double> errs;
  for (size_t l = 0; l < dd.eps.size(); ++l) {
    if (!dd.level_ok[l]) continue;
    const double e = sup_diff(dd.interior[l], v);
    if (e > 50.0 * cfg.residual_tolerance / dd.eps[l]) errs.push_back(e);
  }
  const SlopeFit fit = dyadic_slopes(errs);

  const ConformalFactor q = make_scenario("quartic", 3);
  auto form_gap = [&](int n) {
    const Grid gg = box2(M_PI_2, n);
    const BoundaryField ff = BoundaryField::sample(
        gg, [](const Vec& x) { return std::cos(0.8 * x[0] + 0.3) * std::cos(0.6 * x[1] - 0.2); });
    return sup_diff(solve_first_lin(q, gg, ff, LinForm::Convection),
                    solve_first_lin(q, gg, ff, LinForm::Conductivity));
  };
  const double g1 = form_gap(17), g2 = form_gap(33), g3 = form_gap(65);
  const double s1 = std::log2(g1 / g2), s2 = std::log2(g2 / g3);
  c.pass = errs.size() >= 3 && fit.best3_min >= 1.8 && s1 >= 1.8 && s2 >= 1.8;
  c.detail = fmt("dd1 slope %.2f over %zu levels; form agreement orders %.2f, %.2f", fit.best3_min,
                 errs.size(), s1, s2);
}

void c5_second_lin(Criterion& c) {
  const ConformalFactor bump = make_scenario("bump-cubic", 3);
  const Grid g = box2(M_PI_2, 33);
  const BoundaryField f1 = BoundaryField::sample(
      g, [](const Vec& x) { return std::cos(0.8 * x[0] + 0.3) * std::cos(0.6 * x[1] - 0.2); });
  const BoundaryField f2 = BoundaryField::sample(
      g, [](const Vec& x) { return std::cos(0.5 * x[0]) * std::sin(0.9 * x[1] + 0.4); });
  const ScalarField v1 = solve_first_lin(bump, g, f1);
  const ScalarField v2 = solve_first_lin(bump, g, f2);
  const ScalarField w = solve_second_lin(bump, g, v1, v2);
  NewtonConfig cfg = open_cfg();
  const DividedDifference dd =
      divided_difference(bump, g, {f1, f2}, EpsilonSchedule::dyadic(0.1, 6), cfg);
  std::vector<double> errs;
  for (size_t l = 0; l < dd.eps.size(); ++l) {
    if (!dd.level_ok[l]) continue;
    const double e = sup_diff(dd.interior[l], w);
    if (e > 50.0 * cfg.residual_tolerance / (dd.eps[l] * dd.eps[l])) errs.push_back(e);
  }
  const SlopeFit fit = dyadic_slopes(errs);
  c.pass = errs.size() >= 3 && fit.best3_min >= 1.5;
  c.detail = fmt("dd2 slope %.2f over %zu levels", fit.best3_min, errs.size());
}

void c6_adjoint(Criterion& c) {
  const ConformalFactor q = make_scenario("quartic", 3);
  auto res = [&](int n) { return sup_norm(adjoint_residual(q, box2(M_PI_2, n))); };
  const double r33 = res(33), r65 = res(65), r129 = res(129);
  const double ratio1 = r33 / r65, ratio2 = r65 / r129;
  // 3-D check of the explicit adjoint solution
  const ConformalFactor q4 = make_scenario("quartic", 4);
  const Grid g3a(Domain{Vec{-1.2, -1.2, -1.2}, Vec{1.2, 1.2, 1.2}}, 17);
  const Grid g3b(Domain{Vec{-1.2, -1.2, -1.2}, Vec{1.2, 1.2, 1.2}}, 33);
  const double q1 = sup_norm(adjoint_residual(q4, g3a));
  const double q2 = sup_norm(adjoint_residual(q4, g3b));
  c.pass = ratio1 >= 3.5 && ratio1 <= 4.5 && ratio2 >= 3.5 && ratio2 <= 4.5 && q1 / q2 >= 3.2;
  c.detail = fmt("n=3 ratios %.2f, %.2f; n=4 ratio %.2f", ratio1, ratio2, q1 / q2);
}

void c7_ibp_identity(Criterion& c) {
  const ConformalFactor bump = make_scenario("bump-cubic", 3);
  auto resid = [&](int n, bool osc) {
    const Grid g = box2(M_PI_2, n);
    const BoundaryField f =
        osc ? BoundaryField::sample(g, [](const Vec& x) {
            return std::cos(0.8 * x[0] + 0.3) * std::cos(0.6 * x[1] - 0.2);
          })
            : BoundaryField::sample(g, [](const Vec&) { return 1.0; });
    const ScalarField v = solve_first_lin(bump, g, f);
    return boundary_interior_identity(bump, g, v, v).residual;
  };
  const double c1 = resid(33, false), c2 = resid(65, false), c3 = resid(129, false);
  const double o1 = resid(33, true), o2 = resid(65, true), o3 = resid(129, true);
  const double sc1 = std::log2(c1 / c2), sc2 = std::log2(c2 / c3);
  const double so1 = std::log2(o1 / o2), so2 = std::log2(o2 / o3);
  c.pass = sc1 >= 1.6 && sc2 >= 1.6 && so1 >= 1.6 && so2 >= 1.6;
  c.detail = fmt("constant-pair orders %.2f, %.2f (res %.1e); oscillatory %.2f, %.2f (res %.1e)",
                 sc1, sc2, c3, so1, so2, o3);
}

void c8_zeta(Criterion& c) {
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  std::uniform_real_distribution<double> H(0.05, 1.0);
  double worst = 0.0;
  int produced = 0;
  while (produced < 1000) {
    const int d = (produced % 2) ? 2 : 3;
    Vec xi = Vec::zero(d);
    for (int a = 0; a < d; ++a) xi[a] = U(rng);
    if (xi.norm() < 0.3) continue;
    double h = H(rng);
    if (h * xi.norm() >= 2.0) h = 1.8 / xi.norm();
    const ZetaPair zp = make_zeta_pair_auto(xi, h);
    const double scale = std::max(1.0, zp.zeta1.norm() * zp.zeta1.norm());
    worst = std::max(worst, std::abs(zp.zeta1.dot(zp.zeta1)) / scale);
    worst = std::max(worst, std::abs(zp.zeta2.dot(zp.zeta2)) / scale);
    for (int a = 0; a < d; ++a) {
      const std::complex<double> sum = zp.zeta1[a] + zp.zeta2[a];
      worst = std::max(worst,
                       std::abs(sum - std::complex<double>(0.0, h * xi[a])) / (1.0 + h * xi.norm()));
    }
    ++produced;
  }
  bool rejects = false;
  try {
    make_zeta_pair_2d(Vec{1.0, 0.0}, 2.5);
  } catch (const std::domain_error&) {
    rejects = true;
  }
  c.pass = worst <= 1e-14 && rejects;
  c.detail = fmt("worst scaled defect %.2e over 1000 samples; h|xi|>=2 rejected", worst);
}

void c9_cauchy(Criterion& c) {
  const Vec e1{1.0, 0.0}, e2{0.0, 1.0};
  const double s = 0.5;
  auto gexact = [&](const Vec& x) { return std::exp(-0.5 * x.dot(x) / (s * s)); };
  auto f = [&](const Vec& x) -> std::complex<double> {
    const double gx = gexact(x);
    return std::complex<double>(-x[0] / (s * s) * gx, -x[1] / (s * s) * gx);
  };
  auto rel_err = [&](int cells) {
    CauchyTransform N(e1, e2, 6.0, cells);
    const Grid grid = box2(1.2, 17);
    double num = 0.0, den = 0.0;
    for (long i = 0; i < grid.num_nodes(); ++i) {
      const Vec x = grid.coords(i);
      num += std::norm(N.apply(f, x) - gexact(x)) * grid.interior_weight(i);
      den += gexact(x) * gexact(x) * grid.interior_weight(i);
    }
    return std::sqrt(num / den);
  };
  const double e129 = rel_err(129), e257 = rel_err(257);
  // exact antisymmetry
  CauchyTransform Np(e1, e2, 4.0, 65);
  CauchyTransform Nm(Vec{-1.0, 0.0}, Vec{0.0, -1.0}, 4.0, 65);
  auto fg = [](const Vec& x) -> std::complex<double> {
    return {std::exp(-x.dot(x)), 0.2 * x[1] * std::exp(-x.dot(x))};
  };
  bool anti = true;
  for (double t : {-0.7, 0.1, 0.9}) {
    const Vec x{t, 0.3 * t};
    const std::complex<double> a = Np.apply(fg, x);
    const std::complex<double> b = Nm.apply(fg, x);
    anti = anti && (a.real() == -b.real()) && (a.imag() == -b.imag());
  }
  c.pass = e129 <= 0.01 && e257 < e129 && anti;
  c.detail = fmt("inversion rel L2 %.4f (129 cells) -> %.4f (257); antisymmetry exact: %s", e129,
                 e257, anti ? "yes" : "no");
}

void c10_cgo(Criterion& c) {
  bool ok = true;
  std::string rec;
  // per-scenario dyadic h sweep on the primary d = 2 path (h-free pair:
  // remainders constant, hence non-increasing; grid refinement shows decay)
  for (const auto& cf : catalog3()) {
    const Grid g = box2(M_PI_2, 65);
    const Vec xi{2.0, 0.0};
    double prev = -1.0;
    bool mono = true;
    double rem_last = 0.0;
    for (double h : {0.8, 0.4, 0.2, 0.1}) {
      const ZetaPair zp = make_zeta_pair_2d(xi, h);
      const CGOSolution s1 = build_cgo(cf, g, zp, 1);
      rem_last = s1.remainder_norm;
      if (prev >= 0.0 && s1.remainder_norm > 1.05 * prev) mono = false;
      prev = s1.remainder_norm;
    }
    ok = ok && mono;
    rec += fmt("%s rem=%.1e; ", cf.scenario().c_str(), rem_last);
  }
  // grid refinement decay (desk-scale o(1) analog)
  {
    const ConformalFactor bump = make_scenario("bump-cubic", 3);
    const ZetaPair zp = make_zeta_pair_2d(Vec{2.0, 0.0}, 0.5);
    const double r33 = build_cgo(bump, box2(M_PI_2, 33), zp, 1).remainder_norm;
    const double r65 = build_cgo(bump, box2(M_PI_2, 65), zp, 1).remainder_norm;
    ok = ok && (r33 / r65 >= 3.0);
    rec += fmt("grid decay %.2f; ", r33 / r65);
  }
  // phase cancellation on the nontrivial magnetic path (d = 3)
  {
    const ConformalFactor q4 = make_scenario("quartic", 4);
    const Grid g(Domain{Vec{-1.2, -1.2, -1.2}, Vec{1.2, 1.2, 1.2}}, 21);
    CGOOptions opts;
    opts.cauchy_cells = 65;
    std::string curve = "d3 remainders";
    double cancel = 0.0, phimax = 0.0;
    for (double h : {1.6, 0.8, 0.4}) {
      const ZetaPair zp = make_zeta_pair_auto(Vec{1.0, 0.0, 0.0}, h);
      const CGOSolution s1 = build_cgo(q4, g, zp, 1, opts);
      const CGOSolution s2 = build_cgo(q4, g, zp, 2, opts);
      for (long i = 0; i < g.num_nodes(); ++i) {
        cancel = std::max(cancel, std::abs(s1.phi[i] + s2.phi[i]));
        phimax = std::max(phimax, std::abs(s1.phi[i]));
      }
      curve += fmt(" %.3f", std::max(s1.remainder_norm, s2.remainder_norm));
    }
    ok = ok && cancel <= 1e-13 && phimax > 1e-3;
    rec += fmt("phase cancel %.1e (|phi| up to %.3f); %s", cancel, phimax, curve.c_str());
  }
  c.pass = ok;
  c.detail = rec;
}

ExperimentConfig recovery_config(double alpha) {
  ExperimentConfig cfg;
  cfg.scenario_id = "bump-cubic";
  cfg.params.alpha = alpha;
  cfg.params.bump_center = Vec{0.15, -0.1};
  cfg.params.bump_width = 0.55;
  cfg.grid_nodes = {129, 129};
  cfg.recover_eps = 0.02;
  cfg.xi_step = 2.0;
  cfg.xi_radius = 4.0;
  cfg.cgo_h = 0.5;
  cfg.newton.enforce_amplitude_gate = false;
  return cfg;
}

void c11_recovery(Criterion& c) {
  const ExperimentConfig cfg = recovery_config(0.08);
  const RecoveryResult r = recover_d3c(cfg);
  double worst_coeff = 0.0;
  for (size_t k = 0; k < r.xis.size(); ++k)
    if (!r.excluded[k]) worst_coeff = std::max(worst_coeff, r.coeff_rel_err[k]);

  // linearity in alpha: doubling the bump amplitude doubles the recovery
  const ExperimentConfig cfg2 = recovery_config(0.16);
  const RecoveryResult r2 = recover_d3c(cfg2);
  const Grid g = cfg.make_grid();
  ScalarField lin_diff(g);
  for (long i = 0; i < g.num_nodes(); ++i) lin_diff[i] = r2.recovered[i] - 2.0 * r.recovered[i];
  const double lin_rel = l2_norm(lin_diff) / l2_norm(r2.recovered);

  // floor accounting: the measured field error may exceed the oracle-fed
  // truncation floor of the same inversion by at most the safety margin
  const bool floor_ok = r.l2_rel_error <= 1.5 * r.oracle_l2_error + 0.02;
  c.pass = worst_coeff <= 0.10 && r.l2_rel_error <= 0.20 && lin_rel <= 0.02 &&
           r.excluded_count == 0 && floor_ok;
  c.detail = fmt(
      "coeff err max %.1f%% (|xi|<=4), field L2 err %.1f%% (oracle floor %.1f%%), "
      "alpha-linearity %.2f%%, excluded %d",
      100 * worst_coeff, 100 * r.l2_rel_error, 100 * r.oracle_l2_error, 100 * lin_rel,
      r.excluded_count);
}

void c12_higher_order(Criterion& c) {
  const ConformalFactor q = make_scenario("quartic", 3);
  const Grid g = box2(M_PI_2, 65);
  NewtonConfig cfg = open_cfg();
  const BoundaryField one = BoundaryField::sample(g, [](const Vec&) { return 1.0; });
  const HigherOrderReport rep = verify_higher_order(q, g, 3, {one, one, one}, 0.02, cfg);
  const double cratio = rep.top_truth != 0.0 ? rep.top_implied / rep.top_truth : 0.0;
  c.pass = rep.within_budget && std::abs(cratio - 1.0) <= 0.08;
  c.detail = fmt("m=3 top implied %.5f vs truth %.5f (C-ratio %.4f), |diff| %.2e <= floor %.2e",
                 rep.top_implied, rep.top_truth, cratio, rep.residual_abs, rep.noise_floor);
}

void c13_contrapositive(Criterion& c) {
  const Grid g = box2(M_PI_2, 33);
  NewtonConfig cfg = open_cfg();
  std::vector<BoundaryField> probes{
      make_boundary_shape(g, "one"),
      BoundaryField::sample(g, [](const Vec& x) {
        return std::cos(0.8 * x[0] + 0.3) * std::cos(0.6 * x[1] - 0.2);
      }),
      make_boundary_shape(g, "harmonic-cubic")};

  bool ok = true;
  std::string rec;
  {  // identical scenarios: below floor everywhere
    const ConformalFactor a = make_scenario("bump-cubic", 3);
    const CompareReport rep = verify_theorem_consistency(a, a, g, probes, 0.02, cfg, 3);
    ok = ok && rep.first_order_above == -1;
    rec += fmt("identical: first=%d; ", rep.first_order_above);
  }
  {  // cubic bumps with different alpha: differ first at k = 3 -> dd order 2
    ScenarioParams p2;
    p2.alpha = 0.16;
    const ConformalFactor a = make_scenario("bump-cubic", 3);
    const ConformalFactor b = make_scenario("bump-cubic", 3, p2);
    const CompareReport rep = verify_theorem_consistency(a, b, g, probes, 0.02, cfg, 3);
    ok = ok && rep.first_order_above == 2 && !rep.above_floor[0] && rep.above_floor[1] &&
         rep.above_floor[2];
    rec += fmt("cubic pair: first=%d; ", rep.first_order_above);
  }
  {  // quartic scenarios with different gamma: differ first at k = 4 -> order 3
    ScenarioParams p2;
    p2.gamma = 1.0;
    const ConformalFactor a = make_scenario("quartic", 3);
    const ConformalFactor b = make_scenario("quartic", 3, p2);
    const CompareReport rep = verify_theorem_consistency(a, b, g, probes, 0.02, cfg, 3);
    ok = ok && rep.first_order_above == 3 && !rep.above_floor[0] && !rep.above_floor[1] &&
         rep.above_floor[2];
    rec += fmt("quartic pair: first=%d", rep.first_order_above);
  }
  c.pass = ok;
  c.detail = rec;
}

}  // namespace

int main() {
  run_criterion(1, "derivation identity", c1_derivation);
  run_criterion(2, "euclidean exact solutions", c2_euclidean);
  run_criterion(3, "small-data well-posedness surrogate", c3_small_data);
  run_criterion(4, "first-linearization consistency", c4_first_lin);
  run_criterion(5, "second-linearization consistency", c5_second_lin);
  run_criterion(6, "adjoint solution", c6_adjoint);
  run_criterion(7, "integration-by-parts identity", c7_ibp_identity);
  run_criterion(8, "zeta-pair algebra", c8_zeta);
  run_criterion(9, "cauchy transform", c9_cauchy);
  run_criterion(10, "cgo remainder and phase cancellation", c10_cgo);
  run_criterion(11, "recovery of the third normal derivative", c11_recovery);
  run_criterion(12, "higher-order identity (m = 3)", c12_higher_order);
  run_criterion(13, "contrapositive theorem check", c13_contrapositive);

  int failures = 0;
  for (const auto& r : g_results)
    if (!r.pass) ++failures;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failures,
              g_results.size());
  return failures == 0 ? 0 : 1;
}
