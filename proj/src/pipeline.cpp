#include "mse/pipeline.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "mse/parallel.hpp"

namespace mse {

namespace {

Vec vec_from_json(const json& j) {
  Vec v;
  v.n = static_cast<int>(j.size());
  for (int i = 0; i < v.n; ++i) v[i] = j[i].get<double>();
  return v;
}

json vec_to_json(const Vec& v) {
  json j = json::array();
  for (int i = 0; i < v.dim(); ++i) j.push_back(v[i]);
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("scenario")) {
    const json& s = j["scenario"];
    c.scenario_id = s.value("id", c.scenario_id);
    c.params.alpha = s.value("alpha", c.params.alpha);
    c.params.gamma = s.value("gamma", c.params.gamma);
    c.params.beta_amp = s.value("beta_amp", c.params.beta_amp);
    c.params.kappa = s.value("kappa", c.params.kappa);
    c.params.bump_width = s.value("bump_width", c.params.bump_width);
    c.params.beta_width = s.value("beta_width", c.params.beta_width);
    if (s.contains("bump_center")) c.params.bump_center = vec_from_json(s["bump_center"]);
    if (s.contains("beta_center")) c.params.beta_center = vec_from_json(s["beta_center"]);
    if (s.contains("exp_rate")) c.params.exp_rate = vec_from_json(s["exp_rate"]);
  }
  c.dimension = j.value("dimension", c.dimension);
  if (j.contains("domain")) {
    c.lower = vec_from_json(j["domain"]["lower"]);
    c.upper = vec_from_json(j["domain"]["upper"]);
  }
  if (j.contains("grid")) {
    c.grid_nodes.clear();
    if (j["grid"].is_array())
      for (const auto& v : j["grid"]) c.grid_nodes.push_back(v.get<int>());
    else
      c.grid_nodes.assign(static_cast<size_t>(c.dimension - 1), j["grid"].get<int>());
  }
  if (j.contains("newton")) {
    const json& n = j["newton"];
    c.newton.residual_tolerance = n.value("tolerance", c.newton.residual_tolerance);
    c.newton.max_iterations = n.value("max_iterations", c.newton.max_iterations);
    c.newton.max_backtracks = n.value("max_backtracks", c.newton.max_backtracks);
    c.newton.continuation_steps = n.value("continuation_steps", c.newton.continuation_steps);
    c.newton.amplitude_limit = n.value("amplitude_limit", c.newton.amplitude_limit);
    c.newton.enforce_amplitude_gate = n.value("gate", c.newton.enforce_amplitude_gate);
    c.newton.linear_rel_tol = n.value("linear_rel_tol", c.newton.linear_rel_tol);
  }
  if (j.contains("eps_schedule")) {
    c.eps0 = j["eps_schedule"].value("eps0", c.eps0);
    c.eps_levels = j["eps_schedule"].value("levels", c.eps_levels);
  }
  if (j.contains("recover")) {
    const json& r = j["recover"];
    c.recover_eps = r.value("eps", c.recover_eps);
    c.xi_step = r.value("xi_step", c.xi_step);
    c.xi_radius = r.value("xi_radius", c.xi_radius);
    c.cgo_h = r.value("h", c.cgo_h);
    c.exclude_remainder_above = r.value("exclude_remainder_above", c.exclude_remainder_above);
    c.tikhonov_safety = r.value("tikhonov_safety", c.tikhonov_safety);
  }
  if (j.contains("cgo")) {
    const json& s = j["cgo"];
    if (s.contains("h_sweep")) {
      c.h_sweep.clear();
      for (const auto& v : s["h_sweep"]) c.h_sweep.push_back(v.get<double>());
    }
    c.cgo.cauchy_radius_factor = s.value("radius_factor", c.cgo.cauchy_radius_factor);
    c.cgo.cauchy_cells = s.value("cells", c.cgo.cauchy_cells);
  }
  c.output_dir = j.value("output_dir", c.output_dir);
  c.seed = j.value("seed", c.seed);
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["scenario"] = {{"id", scenario_id},
                   {"alpha", params.alpha},
                   {"gamma", params.gamma},
                   {"beta_amp", params.beta_amp},
                   {"kappa", params.kappa},
                   {"bump_center", vec_to_json(params.bump_center)},
                   {"bump_width", params.bump_width},
                   {"beta_center", vec_to_json(params.beta_center)},
                   {"beta_width", params.beta_width},
                   {"exp_rate", vec_to_json(params.exp_rate)}};
  j["dimension"] = dimension;
  j["domain"] = {{"lower", vec_to_json(lower)}, {"upper", vec_to_json(upper)}};
  j["grid"] = grid_nodes;
  j["newton"] = {{"tolerance", newton.residual_tolerance},
                 {"max_iterations", newton.max_iterations},
                 {"max_backtracks", newton.max_backtracks},
                 {"continuation_steps", newton.continuation_steps},
                 {"amplitude_limit", newton.amplitude_limit},
                 {"gate", newton.enforce_amplitude_gate},
                 {"linear_rel_tol", newton.linear_rel_tol}};
  j["eps_schedule"] = {{"eps0", eps0}, {"levels", eps_levels}};
  j["recover"] = {{"eps", recover_eps},
                  {"xi_step", xi_step},
                  {"xi_radius", xi_radius},
                  {"h", cgo_h},
                  {"exclude_remainder_above", exclude_remainder_above},
                  {"tikhonov_safety", tikhonov_safety}};
  j["cgo"] = {{"h_sweep", h_sweep},
              {"radius_factor", cgo.cauchy_radius_factor},
              {"cells", cgo.cauchy_cells}};
  j["output_dir"] = output_dir;
  j["seed"] = seed;
  return j;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  json j;
  is >> j;
  return from_json(j);
}

Grid ExperimentConfig::make_grid() const {
  Domain dom{lower, upper};
  return Grid(dom, grid_nodes);
}

void ExperimentConfig::validate() const {
  make_factor();  // throws on unknown scenario
  if (static_cast<int>(grid_nodes.size()) != dimension - 1)
    throw std::invalid_argument("config: grid size list must have n-1 entries");
  if (newton.enforce_amplitude_gate) {
    // the recovery stencil stacks two unit-surrogate directions at eps each
    if (2.0 * recover_eps > newton.amplitude_limit)
      throw std::invalid_argument("config: recovery eps exceeds the amplitude gate delta");
    for (double e : EpsilonSchedule::dyadic(eps0, eps_levels).levels)
      if (e > newton.amplitude_limit)
        throw std::invalid_argument("config: eps schedule exceeds the amplitude gate delta");
  }
  if (cgo_h * xi_radius >= 2.0 && dimension - 1 >= 3)
    throw std::invalid_argument("config: need h|xi| < 2 over the xi grid");
}

BoundaryField make_boundary_shape(const Grid& g, const std::string& spec, unsigned seed) {
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t p = 0;
    while (p <= s.size()) {
      const size_t q = s.find(sep, p);
      if (q == std::string::npos) {
        out.push_back(s.substr(p));
        break;
      }
      out.push_back(s.substr(p, q - p));
      p = q + 1;
    }
    return out;
  };
  const auto parts = split(spec, ':');
  const std::string& kind = parts[0];
  std::vector<double> args;
  if (parts.size() > 1)
    for (const auto& a : split(parts[1], ',')) args.push_back(std::stod(a));

  if (kind == "zero") return BoundaryField(g);
  if (kind == "one")
    return BoundaryField::sample(g, [](const Vec&) { return 1.0; });
  if (kind == "affine") {
    Vec a = Vec::zero(g.dim());
    for (int i = 0; i < g.dim() && i < static_cast<int>(args.size()); ++i) a[i] = args[i];
    return BoundaryField::sample(g, [a](const Vec& x) { return a.dot(x); });
  }
  if (kind == "cos") {
    Vec k = Vec::zero(g.dim());
    for (int i = 0; i < g.dim() && i < static_cast<int>(args.size()); ++i) k[i] = args[i];
    return BoundaryField::sample(g, [k](const Vec& x) { return std::cos(k.dot(x)); });
  }
  if (kind == "harmonic-cubic")
    return BoundaryField::sample(
        g, [](const Vec& x) { return x[0] * x[0] * x[0] - 3.0 * x[0] * x[1] * x[1]; });
  if (kind == "scherk") {
    const double s = args.empty() ? 1.0 : args[0];
    ScherkField sf(s);
    return BoundaryField::sample(g, [&sf](const Vec& x) { return sf.value(x); });
  }
  if (kind == "gauss") {
    const double s = args.empty() ? 0.5 : args[0];
    return BoundaryField::sample(g, [s](const Vec& x) {
      return std::exp(-0.5 * x.dot(x) / (s * s));
    });
  }
  if (kind == "random") {
    const unsigned sd = args.empty() ? seed : static_cast<unsigned>(args[0]);
    SeparableSum p = random_cubic_polynomial(g.dim(), sd, 0.5);
    return BoundaryField::sample(g, [&p](const Vec& x) { return p(x); });
  }
  throw std::invalid_argument("unknown boundary shape: " + spec);
}

namespace {

std::vector<Vec> xi_half_lattice(int dim, double step, double radius) {
  std::vector<Vec> xs;
  const int kmax = static_cast<int>(std::floor(radius / step));
  const int k3lo = (dim >= 3) ? -kmax : 0;
  const int k3hi = (dim >= 3) ? kmax : 0;
  for (int k1 = -kmax; k1 <= kmax; ++k1)
    for (int k2 = -kmax; k2 <= kmax; ++k2)
      for (int k3 = k3lo; k3 <= k3hi; ++k3) {
        if (k1 == 0 && k2 == 0 && k3 == 0) continue;
        Vec xi = Vec::zero(dim);
        xi[0] = k1 * step;
        xi[1] = k2 * step;
        if (dim >= 3) xi[2] = k3 * step;
        if (xi.norm() > radius + 1e-12) continue;
        // canonical half: the first nonzero component positive (mirror = conj)
        if (k1 < 0 || (k1 == 0 && k2 < 0) || (k1 == 0 && k2 == 0 && k3 < 0)) continue;
        xs.push_back(xi);
      }
  return xs;
}

/// dd2 of the solution map with directions (f, g) at amplitude eps: four
/// nonlinear solves, weights (s1 s2)/(4 eps²).
ScalarField solution_dd2(const ConformalFactor& c, const Grid& grid, const BoundaryField& f,
                         const BoundaryField& g2, double eps, const NewtonConfig& cfg) {
  std::array<ScalarField, 4> us;
  std::array<bool, 4> ok{};
  parallel_for(4, [&](long s) {
    const double s1 = (s & 1) ? 1.0 : -1.0;
    const double s2 = (s & 2) ? 1.0 : -1.0;
    BoundaryField data(grid);
    for (long b = 0; b < grid.num_boundary(); ++b)
      data[b] = eps * (s1 * f[b] + s2 * g2[b]);
    SolveResult sr = solve_mse(c, grid, data, cfg);
    ok[s] = sr.converged;
    if (sr.converged) us[s] = sr.u;
  });
  for (int s = 0; s < 4; ++s)
    if (!ok[s]) throw std::runtime_error("recover: forward solve failed in dd2 stencil");
  ScalarField out(grid);
  for (int s = 0; s < 4; ++s) {
    const double s1 = (s & 1) ? 1.0 : -1.0;
    const double s2 = (s & 2) ? 1.0 : -1.0;
    const double w = s1 * s2 / (4.0 * eps * eps);
    for (long i = 0; i < grid.num_nodes(); ++i) out[i] += w * us[s][i];
  }
  return out;
}

/// ∮ v0 ∂_ν(dd2 u) dS (per-face flux rule) with shapes normalized to unit
/// surrogate norm; returns the un-normalized bilinear value.
double dn_bilinear(const ConformalFactor& c, const Grid& grid, const ScalarField& v0,
                   const BoundaryField& f, const BoundaryField& g2, double eps,
                   const NewtonConfig& cfg) {
  const double nf = boundary_surrogate_norm(f);
  const double ng = boundary_surrogate_norm(g2);
  if (nf == 0.0 || ng == 0.0) return 0.0;
  BoundaryField fn(grid), gn(grid);
  for (long b = 0; b < grid.num_boundary(); ++b) {
    fn[b] = f[b] / nf;
    gn[b] = g2[b] / ng;
  }
  const ScalarField dd = solution_dd2(c, grid, fn, gn, eps, cfg);
  return integrate_flux(dd, trace(v0)) * nf * ng;
}

}  // namespace

RecoveryResult recover_d3c(const ExperimentConfig& cfg) {
  const ConformalFactor c = cfg.make_factor();
  if (!c.admissible()) throw std::invalid_argument("recover: scenario must be admissible");
  RecoveryResult res;
  res.grid = std::make_shared<Grid>(cfg.make_grid());
  const Grid& g = *res.grid;
  const int d = g.dim();
  const int n = c.dimension();
  const double eps = cfg.recover_eps;
  NewtonConfig ncfg = cfg.newton;

  res.truth = ScalarField::sample(
      g, [&](const Vec& xp) { return c.normal_derivative_at_zero(xp, 3); });
  const ScalarField v0 = adjoint_solution(c, g);

  // weighted unknown S and its path-dependent weight back to ∂³c
  ScalarField S_true(g), weight(g);
  for (long i = 0; i < g.num_nodes(); ++i) {
    const Vec xp = g.coords(i);
    const double cv = c.boundary_value(xp);
    if (d == 2) {
      weight[i] = cv;  // S = ∂³c / c
    } else {
      weight[i] = 2.0 * cv / ((n - 1) * v0[i]);  // S = (n−1) v0 ∂³c / (2c)
    }
    S_true[i] = res.truth[i] / weight[i];
  }

  // probe set: ξ = 0 (constants) + canonical half lattice
  res.xis.push_back(Vec::zero(d));
  for (const Vec& xi : xi_half_lattice(d, cfg.xi_step, cfg.xi_radius)) res.xis.push_back(xi);
  const size_t nxi = res.xis.size();
  res.data.resize(nxi);
  res.oracle.resize(nxi);
  res.cgo_remainder.assign(nxi, 0.0);
  res.excluded.assign(nxi, false);
  res.coeff_rel_err.assign(nxi, 0.0);

  // oracle: direct quadrature of S e^{i x·ξ}
  for (size_t k = 0; k < nxi; ++k) {
    std::complex<double> o = 0.0;
    for (long i = 0; i < g.num_nodes(); ++i)
      o += S_true[i] * std::exp(std::complex<double>(0.0, res.xis[k].dot(g.coords(i)))) *
           g.interior_weight(i);
    res.oracle[k] = o;
  }

  const double l2S = l2_norm(S_true);
  double hmin = 1e300;
  for (int a = 0; a < d; ++a) hmin = std::min(hmin, g.spacing(a));

  // ξ = 0: constants probe, B(1,1)
  const BoundaryField ones = make_boundary_shape(g, "one");
  res.data[0] = dn_bilinear(c, g, v0, ones, ones, eps, ncfg);

  std::vector<double> row_noise(nxi, 0.0);
  row_noise[0] = ncfg.residual_tolerance / (eps * eps) * 10.0 + eps * eps * std::abs(res.data[0]);

  // nonzero ξ: CGO pair traces, four real bilinear probes each
  for (size_t k = 1; k < nxi; ++k) {
    const Vec& xi = res.xis[k];
    const double hxi = std::min(cfg.cgo_h, 1.8 / xi.norm());
    const ZetaPair zp = make_zeta_pair_auto(xi, hxi);
    const CGOSolution s1 = build_cgo(c, g, zp, 1, cfg.cgo);
    const CGOSolution s2 = build_cgo(c, g, zp, 2, cfg.cgo);
    res.cgo_remainder[k] = std::max(s1.remainder_norm, s2.remainder_norm);
    if (res.cgo_remainder[k] > cfg.exclude_remainder_above) {
      res.excluded[k] = true;
      ++res.excluded_count;
      continue;
    }
    // boundary data of the first-linearization solutions: d = 2 divides the
    // Schrödinger trace by √γ, d >= 3 uses the traces as built
    ComplexBoundaryField f1(g), f2(g);
    for (long b = 0; b < g.num_boundary(); ++b) {
      const Vec xp = g.coords(g.node_of_boundary(b));
      const double scale = (d == 2) ? 1.0 / std::sqrt(c.boundary_value(xp)) : 1.0;
      f1[b] = scale * s1.trace[b];
      f2[b] = scale * s2.trace[b];
    }
    BoundaryField re1(g), im1(g), re2(g), im2(g);
    for (long b = 0; b < g.num_boundary(); ++b) {
      re1[b] = f1[b].real();
      im1[b] = f1[b].imag();
      re2[b] = f2[b].real();
      im2[b] = f2[b].imag();
    }
    const double Brr = dn_bilinear(c, g, v0, re1, re2, eps, ncfg);
    const double Bii = dn_bilinear(c, g, v0, im1, im2, eps, ncfg);
    const double Bri = dn_bilinear(c, g, v0, re1, im2, eps, ncfg);
    const double Bir = dn_bilinear(c, g, v0, im1, re2, eps, ncfg);
    const std::complex<double> B(Brr - Bii, Bri + Bir);
    res.data[k] = B * std::exp(s1.scale_log + s2.scale_log);
    row_noise[k] = l2S * (s1.remainder_norm + s2.remainder_norm +
                          s1.remainder_norm * s2.remainder_norm) +
                   ncfg.residual_tolerance / (eps * eps) * (3.0 / hmin) *
                       std::exp(s1.scale_log + s2.scale_log) +
                   eps * eps * std::abs(res.data[k]) * 10.0;
  }

  // per-coefficient relative errors against the oracle
  for (size_t k = 0; k < nxi; ++k) {
    const double denom = std::abs(k == 0 ? res.oracle[0] : res.oracle[k]);
    if (denom > 1e-14 && !res.excluded[k]) {
      // the ξ = 0 datum measures ∫ S·(c or 1) dx; compare in oracle units
      if (k == 0) {
        std::complex<double> o0 = 0.0;
        for (long i = 0; i < g.num_nodes(); ++i)
          o0 += S_true[i] * ((d == 2) ? c.boundary_value(g.coords(i)) : 1.0) *
                g.interior_weight(i);
        res.coeff_rel_err[k] =
            std::abs(o0) > 1e-14 ? std::abs(res.data[0] - o0) / std::abs(o0) : 0.0;
      } else {
        res.coeff_rel_err[k] = std::abs(res.data[k] - res.oracle[k]) / denom;
      }
    }
  }

  // regularized least squares onto the truncated Fourier basis
  const std::vector<Vec> basis_k = xi_half_lattice(d, cfg.xi_step, cfg.xi_radius);
  const int nbasis = 1 + 2 * static_cast<int>(basis_k.size());
  std::vector<int> row_of;  // data rows
  int nrows = 1;            // ξ = 0 row
  for (size_t k = 1; k < nxi; ++k)
    if (!res.excluded[k]) nrows += 2;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nrows, nbasis);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nrows);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(nrows);

  auto basis_at = [&](int m, const Vec& x) -> double {
    if (m == 0) return 1.0;
    const int kk = (m - 1) / 2;
    const double ph = basis_k[kk].dot(x);
    return ((m - 1) % 2 == 0) ? std::cos(ph) : std::sin(ph);
  };

  {
    // ξ = 0 row: ∫ S̃ · W0 dx = B(1,1), W0 = c (d = 2) or 1 (d >= 3)
    for (int m = 0; m < nbasis; ++m) {
      double s = 0.0;
      for (long i = 0; i < g.num_nodes(); ++i) {
        const double w0 = (d == 2) ? c.boundary_value(g.coords(i)) : 1.0;
        s += basis_at(m, g.coords(i)) * w0 * g.interior_weight(i);
      }
      M(0, m) = s;
    }
    rhs[0] = res.data[0].real();
    eta[0] = row_noise[0];
  }
  {
    int r = 1;
    for (size_t k = 1; k < nxi; ++k) {
      if (res.excluded[k]) continue;
      for (int m = 0; m < nbasis; ++m) {
        double sc = 0.0, ss = 0.0;
        for (long i = 0; i < g.num_nodes(); ++i) {
          const Vec x = g.coords(i);
          const double ph = res.xis[k].dot(x);
          const double bm = basis_at(m, x) * g.interior_weight(i);
          sc += bm * std::cos(ph);
          ss += bm * std::sin(ph);
        }
        M(r, m) = sc;
        M(r + 1, m) = ss;
      }
      rhs[r] = res.data[k].real();
      rhs[r + 1] = res.data[k].imag();
      eta[r] = row_noise[k];
      eta[r + 1] = row_noise[k];
      r += 2;
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  res.lsq_condition = sv.size() ? sv(0) / sv(sv.size() - 1) : 0.0;

  const double target = cfg.tikhonov_safety * eta.norm();
  res.noise_estimate = eta.norm();
  const Eigen::MatrixXd MtM = M.transpose() * M;
  const Eigen::VectorXd Mtb = M.transpose() * rhs;
  auto solve_mu = [&](double mu) {
    Eigen::MatrixXd A = MtM;
    for (int i = 0; i < nbasis; ++i) A(i, i) += mu;
    return Eigen::VectorXd(A.ldlt().solve(Mtb));
  };
  // discrepancy principle: smallest mu with ||Ma − b|| >= target (monotone in mu)
  double lo = 1e-14, hi = 1e2, mu = lo;
  Eigen::VectorXd a = solve_mu(lo);
  if ((M * a - rhs).norm() < target) {
    for (int it = 0; it < 60; ++it) {
      const double mid = std::sqrt(lo * hi);
      a = solve_mu(mid);
      if ((M * a - rhs).norm() < target)
        lo = mid;
      else
        hi = mid;
    }
    mu = hi;
    a = solve_mu(mu);
  }
  res.tikhonov_mu = mu;

  res.weighted = ScalarField(g);
  for (long i = 0; i < g.num_nodes(); ++i) {
    double s = 0.0;
    for (int m = 0; m < nbasis; ++m) s += a[m] * basis_at(m, g.coords(i));
    res.weighted[i] = s;
  }
  res.recovered = ScalarField(g);
  for (long i = 0; i < g.num_nodes(); ++i) res.recovered[i] = res.weighted[i] * weight[i];

  ScalarField diff(g);
  for (long i = 0; i < g.num_nodes(); ++i) diff[i] = res.recovered[i] - res.truth[i];
  const double tn = l2_norm(res.truth);
  res.l2_rel_error = tn > 0.0 ? l2_norm(diff) / tn : l2_norm(diff);

  // method floor: the identical inversion fed exact quadrature data measures
  // what the truncated basis can represent at all
  {
    Eigen::VectorXd rhs_o = Eigen::VectorXd::Zero(nrows);
    {
      double o0 = 0.0;
      for (long i = 0; i < g.num_nodes(); ++i) {
        const double w0 = (d == 2) ? c.boundary_value(g.coords(i)) : 1.0;
        o0 += S_true[i] * w0 * g.interior_weight(i);
      }
      rhs_o[0] = o0;
    }
    int r = 1;
    for (size_t k = 1; k < nxi; ++k) {
      if (res.excluded[k]) continue;
      rhs_o[r] = res.oracle[k].real();
      rhs_o[r + 1] = res.oracle[k].imag();
      r += 2;
    }
    Eigen::MatrixXd A = MtM;
    for (int i = 0; i < nbasis; ++i) A(i, i) += 1e-12;
    const Eigen::VectorXd ao = A.ldlt().solve(M.transpose() * rhs_o);
    ScalarField od(g);
    for (long i = 0; i < g.num_nodes(); ++i) {
      double s = 0.0;
      for (int m = 0; m < nbasis; ++m) s += ao[m] * basis_at(m, g.coords(i));
      od[i] = s * weight[i] - res.truth[i];
    }
    res.oracle_l2_error = tn > 0.0 ? l2_norm(od) / tn : l2_norm(od);
  }

  const double h2 = hmin * hmin;
  res.noise_floor = h2 + eps * eps + ncfg.residual_tolerance / (eps * eps);
  return res;
}

CompareReport verify_theorem_consistency(const ConformalFactor& c1, const ConformalFactor& c2,
                                         const Grid& g, const std::vector<BoundaryField>& probes,
                                         double eps, const NewtonConfig& cfg, int max_order) {
  if (probes.empty()) throw std::invalid_argument("compare: need at least one probe");
  CompareReport rep;

  // boundary normalization c1(x0',0) = c2(x0',0) at some boundary point
  double bmin = 1e300;
  for (long b = 0; b < g.num_boundary(); ++b) {
    const Vec xp = g.coords(g.node_of_boundary(b));
    bmin = std::min(bmin, std::abs(c1.boundary_value(xp) - c2.boundary_value(xp)));
  }
  if (bmin > 1e-8)
    throw std::invalid_argument("compare: scenarios must agree at a boundary point");

  // Taylor coefficient discrepancies at x_n = 0, orders 0..5
  for (int k = 0; k <= 5; ++k) {
    double m = 0.0;
    for (long i = 0; i < g.num_nodes(); ++i) {
      const Vec xp = g.coords(i);
      m = std::max(m, std::abs(c1.normal_derivative_at_zero(xp, k) -
                               c2.normal_derivative_at_zero(xp, k)));
    }
    rep.taylor_discrepancy.push_back(m);
  }

  // direct DN discrepancy over the probe set
  for (const BoundaryField& f : probes) {
    BoundaryField fe(g);
    for (long b = 0; b < g.num_boundary(); ++b) fe[b] = eps * f[b];
    const DNRecord r1 = dn_map(c1, g, fe, cfg);
    const DNRecord r2 = dn_map(c2, g, fe, cfg);
    double m = 0.0;
    for (long b = 0; b < g.num_boundary(); ++b)
      m = std::max(m, std::abs(r1.response[b] - r2.response[b]));
    rep.dn_direct_discrepancy = std::max(rep.dn_direct_discrepancy, m);
  }

  // divided-difference discrepancies per order, with Richardson floors
  EpsilonSchedule two;
  two.levels = {eps, 0.5 * eps};
  for (int m = 1; m <= max_order; ++m) {
    std::vector<BoundaryField> dirs;
    for (int k = 0; k < m; ++k) dirs.push_back(probes[k % probes.size()]);
    const DividedDifference d1 = divided_difference(c1, g, dirs, two, cfg);
    const DividedDifference d2 = divided_difference(c2, g, dirs, two, cfg);
    if (!d1.level_ok[0] || !d1.level_ok[1] || !d2.level_ok[0] || !d2.level_ok[1])
      throw std::runtime_error("compare: forward solve failed in dd stencil");
    double disc = 0.0, rich = 0.0;
    for (long b = 0; b < g.num_boundary(); ++b) {
      const double D = d1.dn[0][b] - d2.dn[0][b];
      const double Dh = d1.dn[1][b] - d2.dn[1][b];
      disc = std::max(disc, std::abs(D));
      rich = std::max(rich, std::abs(D - Dh));
    }
    const double noise = cfg.residual_tolerance / std::pow(eps, m) * 4.0;
    const double floor = (4.0 / 3.0) * rich + noise;
    rep.orders.push_back(m);
    rep.discrepancy.push_back(disc);
    rep.floor.push_back(floor);
    const bool above = disc > 3.0 * floor;
    rep.above_floor.push_back(above);
    if (above && rep.first_order_above < 0) rep.first_order_above = m;
  }
  return rep;
}

namespace {

void write_table_csv(const StageTable& t, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path);
  for (size_t i = 0; i < t.columns.size(); ++i)
    std::fprintf(fp, "%s%s", t.columns[i].c_str(), i + 1 < t.columns.size() ? "," : "\n");
  for (const auto& row : t.rows)
    for (size_t i = 0; i < row.size(); ++i)
      std::fprintf(fp, "%.17g%s", row[i], i + 1 < row.size() ? "," : "\n");
  std::fclose(fp);
}

}  // namespace

std::string resolve_output_dir(const std::string& configured) {
  const char* env = std::getenv("MSELAB_OUT_DIR");
  return env && *env ? std::string(env) : configured;
}

int report(const ExperimentRun& run, const std::string& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  fs::create_directories(outdir + "/tables");
  fs::create_directories(outdir + "/fields");

  json summary;
  summary["config"] = run.config;
  summary["stages"] = json::array();
  for (const auto& t : run.tables) {
    summary["stages"].push_back({{"name", t.name}, {"rows", t.rows.size()}});
    write_table_csv(t, outdir + "/tables/" + t.name + ".csv");
  }
  for (const auto& [name, field] : run.fields) {
    write_csv(field, outdir + "/fields/" + name + ".csv");
    summary["fields"].push_back(name);
  }
  json checks = json::array();
  json failures = json::array();
  bool ok = true;
  for (const auto& [name, pass] : run.checks) {
    checks.push_back({{"name", name}, {"pass", pass}});
    if (!pass) {
      ok = false;
      failures.push_back(name);
    }
  }
  summary["checks"] = checks;
  summary["failures"] = failures;
  {
    std::ofstream os(outdir + "/run.json");
    os << summary.dump(2) << "\n";
  }
  {
    json t;
    for (const auto& [k, v] : run.wallclock_seconds) t[k] = v;
    std::ofstream os(outdir + "/timings.json");
    os << t.dump(2) << "\n";
  }
  return ok ? 0 : 1;
}

}  // namespace mse
