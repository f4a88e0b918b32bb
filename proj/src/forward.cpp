#include "mse/forward.hpp"

#include <cmath>

namespace mse {

double boundary_surrogate_norm(const BoundaryField& f) {
  const Grid& g = f.grid();
  const int d = g.dim();
  double m = sup_norm(f);
  int idx[3];
  // per-face tangential divided differences
  for (long b = 0; b < g.num_boundary(); ++b) {
    const long node = g.node_of_boundary(b);
    g.unflatten(node, idx);
    for (int a = 0; a < d; ++a) {
      if (!(idx[a] == 0 || idx[a] == g.npts(a) - 1)) continue;  // node lies on face ⟂ a
      for (int t = 0; t < d; ++t) {
        if (t == a) continue;
        const double h = g.spacing(t);
        const int it = idx[t];
        // only difference along the face (stay on boundary nodes of this face)
        if (it + 1 < g.npts(t)) {
          const long nb = g.shift(node, t, 1);
          m = std::max(m, std::abs(f[g.boundary_id(nb)] - f[b]) / h);
        }
        if (it > 0 && it + 1 < g.npts(t)) {
          const long np = g.shift(node, t, 1);
          const long nm = g.shift(node, t, -1);
          m = std::max(m, std::abs(f[g.boundary_id(np)] - 2.0 * f[b] + f[g.boundary_id(nm)]) /
                              (h * h));
        }
      }
    }
  }
  return m;
}

JetPoint interior_jet(const ScalarField& u, long node) {
  const Grid& g = u.grid();
  const int d = g.dim();
  JetPoint j;
  j.x = g.coords(node);
  j.u = u[node];
  j.p = Vec::zero(d);
  j.P = Mat::zero(d);
  for (int a = 0; a < d; ++a) {
    const double h = g.spacing(a);
    const double up = u[g.shift(node, a, 1)];
    const double um = u[g.shift(node, a, -1)];
    j.p[a] = (up - um) / (2.0 * h);
    j.P(a, a) = (up - 2.0 * u[node] + um) / (h * h);
    for (int b = a + 1; b < d; ++b) {
      const double hb = g.spacing(b);
      const double v = (u[g.shift(g.shift(node, a, 1), b, 1)] -
                        u[g.shift(g.shift(node, a, 1), b, -1)] -
                        u[g.shift(g.shift(node, a, -1), b, 1)] +
                        u[g.shift(g.shift(node, a, -1), b, -1)]) /
                       (4.0 * h * hb);
      j.P(a, b) = v;
      j.P(b, a) = v;
    }
  }
  return j;
}

namespace {

Eigen::VectorXd residual_vector(const ConformalFactor& c, const ScalarField& u) {
  const Grid& g = u.grid();
  Eigen::VectorXd r(g.num_interior());
  for (long i = 0; i < g.num_interior(); ++i) {
    r[i] = eval_F(c, interior_jet(u, g.node_of_interior(i)));
  }
  return r;
}

SpMat jacobian_matrix(const ConformalFactor& c, const ScalarField& u) {
  const Grid& g = u.grid();
  const int d = g.dim();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(g.num_interior()) * (2 * d * d + 2 * d + 1));
  auto add = [&](long row, long node, double w) {
    const long col = g.interior_id(node);
    if (col >= 0) trip.emplace_back(static_cast<int>(row), static_cast<int>(col), w);
  };
  for (long i = 0; i < g.num_interior(); ++i) {
    const long node = g.node_of_interior(i);
    const FDerivatives df = dF(c, interior_jet(u, node));
    add(i, node, df.Fu);
    for (int a = 0; a < d; ++a) {
      const double ha = g.spacing(a);
      add(i, g.shift(node, a, 1), df.Fp[a] / (2.0 * ha));
      add(i, g.shift(node, a, -1), -df.Fp[a] / (2.0 * ha));
      add(i, node, -2.0 * df.FP(a, a) / (ha * ha));
      add(i, g.shift(node, a, 1), df.FP(a, a) / (ha * ha));
      add(i, g.shift(node, a, -1), df.FP(a, a) / (ha * ha));
      for (int b = a + 1; b < d; ++b) {
        const double hb = g.spacing(b);
        const double w = 2.0 * df.FP(a, b) / (4.0 * ha * hb);
        add(i, g.shift(g.shift(node, a, 1), b, 1), w);
        add(i, g.shift(g.shift(node, a, 1), b, -1), -w);
        add(i, g.shift(g.shift(node, a, -1), b, 1), -w);
        add(i, g.shift(g.shift(node, a, -1), b, -1), w);
      }
    }
  }
  SpMat J(g.num_interior(), g.num_interior());
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

double sup(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
double rms(const Eigen::VectorXd& v) {
  return v.size() ? v.norm() / std::sqrt(static_cast<double>(v.size())) : 0.0;
}

/// Apply the u = 0 linearization L to a field (dF at zero jets contracted
/// with the centered stencils); used to build smooth initial guesses.
Eigen::VectorXd apply_zero_linearization(const ConformalFactor& c, const ScalarField& z) {
  const Grid& g = z.grid();
  const int d = g.dim();
  Eigen::VectorXd out(g.num_interior());
  for (long i = 0; i < g.num_interior(); ++i) {
    const long node = g.node_of_interior(i);
    JetPoint zero;
    zero.x = g.coords(node);
    zero.u = 0.0;
    zero.p = Vec::zero(d);
    zero.P = Mat::zero(d);
    const FDerivatives df = dF(c, zero);
    const JetPoint jz = interior_jet(z, node);
    double s = df.Fu * jz.u;
    for (int a = 0; a < d; ++a) s += df.Fp[a] * jz.p[a];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) s += df.FP(a, b) * jz.P(a, b);
    out[i] = s;
  }
  return out;
}

/// Smooth extension of boundary data by the u = 0 linearized operator:
/// L v = 0 in Ω, v = gdata on ∂Ω.  Removes the O(f/h) boundary layer of the
/// naive zero-interior initial state.
ScalarField linearized_extension(const ConformalFactor& c, const Grid& g,
                                 const LinearSolver& J0, const BoundaryField& gdata) {
  ScalarField z(g);
  apply_dirichlet(z, gdata);
  Eigen::VectorXd rhs = -apply_zero_linearization(c, z);
  Eigen::VectorXd x = J0.solve(rhs);
  for (long i = 0; i < g.num_interior(); ++i) z[g.node_of_interior(i)] = x[i];
  return z;
}

/// Newton iteration at fixed boundary data (already applied to u).  The line
/// search backtracks on the RMS residual (Newton directions with the exact
/// Jacobian are descent directions for it); convergence is declared on the
/// sup norm.  residual_history records the RMS merit, non-increasing by
/// construction and bounded by the sup norm.
SolveStatus newton_fixed_bc(const ConformalFactor& c, ScalarField& u, const NewtonConfig& cfg,
                            std::vector<double>& history, int& iterations, bool& near_singular) {
  const Grid& g = u.grid();
  const SolveMethod method =
      cfg.method.value_or(LinearSolver::choose(g.num_interior(), g.dim()));
  Eigen::VectorXd r = residual_vector(c, u);
  double merit = rms(r);
  history.push_back(merit);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (sup(r) <= cfg.residual_tolerance) return SolveStatus::Converged;
    LinearSolver solver(jacobian_matrix(c, u), method, cfg.linear_rel_tol);
    LinearReport rep;
    Eigen::VectorXd delta = solver.solve(Eigen::VectorXd(-r), &rep);
    near_singular = near_singular || rep.near_singular;
    if (!solver.factorization_ok()) return SolveStatus::LinearSolveFailed;
    double step = 1.0;
    bool accepted = false;
    ScalarField trial = u;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      for (long k = 0; k < g.num_interior(); ++k)
        trial[g.node_of_interior(k)] = u[g.node_of_interior(k)] + step * delta[k];
      Eigen::VectorXd rt = residual_vector(c, trial);
      const double mt = rms(rt);
      if (mt < merit) {
        u = trial;
        r = std::move(rt);
        merit = mt;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++iterations;
    if (!accepted) return SolveStatus::LineSearchStalled;
    history.push_back(merit);
  }
  return sup(r) <= cfg.residual_tolerance ? SolveStatus::Converged : SolveStatus::MaxIterations;
}

}  // namespace

ScalarField graph_residual(const ConformalFactor& c, const ScalarField& u) {
  const Grid& g = u.grid();
  ScalarField r(g);
  for (long i = 0; i < g.num_interior(); ++i) {
    const long node = g.node_of_interior(i);
    r[node] = graph_residual_at(c, interior_jet(u, node));
  }
  return r;
}

ScalarField implicit_residual(const ConformalFactor& c, const ScalarField& u) {
  const Grid& g = u.grid();
  ScalarField r(g);
  for (long i = 0; i < g.num_interior(); ++i) {
    const long node = g.node_of_interior(i);
    r[node] = implicit_residual_at(c, interior_jet(u, node));
  }
  return r;
}

ScalarField divergence_residual(const ConformalFactor& c, const ScalarField& u) {
  const Grid& g = u.grid();
  ScalarField r(g);
  for (long i = 0; i < g.num_interior(); ++i) {
    const long node = g.node_of_interior(i);
    r[node] = divergence_residual_at(c, interior_jet(u, node));
  }
  return r;
}

SolveResult solve_mse(const ConformalFactor& c, const Grid& g, const BoundaryField& f,
                      const NewtonConfig& cfg) {
  SolveResult res;
  res.u = ScalarField(g);
  const double amp = boundary_surrogate_norm(f);
  if (cfg.enforce_amplitude_gate && amp > cfg.amplitude_limit) {
    res.converged = false;
    res.status = SolveStatus::RejectedAmplitude;
    res.diagnostic = "small-data regime: surrogate norm " + std::to_string(amp) +
                     " exceeds delta = " + std::to_string(cfg.amplitude_limit);
    return res;
  }

  // the u = 0 linearized operator, factored once for initial guesses
  const SolveMethod method = cfg.method.value_or(LinearSolver::choose(g.num_interior(), g.dim()));
  const LinearSolver J0(jacobian_matrix(c, ScalarField(g)), method, cfg.linear_rel_tol);

  // direct attempt, then amplitude continuation on failure
  const int first_attempt = cfg.always_continue ? 1 : 0;
  for (int attempt = first_attempt; attempt < 2; ++attempt) {
    const int stages = (attempt == 0) ? 1 : std::max(1, cfg.continuation_steps);
    if (attempt == 1 && first_attempt == 0 && cfg.continuation_steps <= 1) break;
    res.u = ScalarField(g);
    res.iterations = 0;
    res.residual_history.clear();
    res.near_singular_jacobian = false;
    res.continuation_stages = stages;
    SolveStatus st = SolveStatus::Converged;
    BoundaryField prev(g);
    for (int s = 1; s <= stages; ++s) {
      BoundaryField fs(g), df(g);
      const double ramp = static_cast<double>(s) / stages;
      for (long b = 0; b < g.num_boundary(); ++b) {
        fs[b] = ramp * f[b];
        df[b] = fs[b] - prev[b];
      }
      // warm start: previous stage plus the smooth extension of the data jump
      const ScalarField bump = linearized_extension(c, g, J0, df);
      for (long i = 0; i < g.num_nodes(); ++i) res.u[i] += bump[i];
      apply_dirichlet(res.u, fs);
      st = newton_fixed_bc(c, res.u, cfg, res.residual_history, res.iterations,
                           res.near_singular_jacobian);
      if (st != SolveStatus::Converged) break;
      prev = fs;
    }
    res.status = st;
    res.converged = (st == SolveStatus::Converged);
    if (res.converged) break;
  }
  if (!res.converged && res.diagnostic.empty()) {
    res.diagnostic = "newton did not converge; final residual " +
                     std::to_string(res.residual_history.empty() ? 0.0
                                                                 : res.residual_history.back());
  }
  return res;
}

DNRecord dn_map(const ConformalFactor& c, const Grid& g, const BoundaryField& f,
                const NewtonConfig& cfg) {
  SolveResult sr = solve_mse(c, g, f, cfg);
  if (!sr.converged) {
    throw std::runtime_error("dn_map: forward solve failed (" + sr.diagnostic + ")");
  }
  DNRecord rec;
  rec.f = f;
  rec.response = normal_derivative(sr.u);
  rec.amplitude = boundary_surrogate_norm(f);
  rec.scenario = c.scenario();
  return rec;
}

AmplitudeSweep amplitude_sweep(const ConformalFactor& c, const Grid& g,
                               const BoundaryField& f_shape, const std::vector<double>& amplitudes,
                               const NewtonConfig& cfg) {
  AmplitudeSweep sweep;
  for (double eps : amplitudes) {
    BoundaryField f(g);
    for (long b = 0; b < g.num_boundary(); ++b) f[b] = eps * f_shape[b];
    SolveResult sr = solve_mse(c, g, f, cfg);
    AmplitudeSweepRow row;
    row.eps = eps;
    row.converged = sr.converged;
    row.iterations = sr.iterations;
    row.sup_u = sr.converged ? sup_norm(sr.u) : 0.0;
    row.ratio = (eps != 0.0 && sr.converged) ? row.sup_u / eps : 0.0;
    if (!sr.converged && !sweep.first_failure) sweep.first_failure = eps;
    sweep.rows.push_back(row);
  }
  return sweep;
}

}  // namespace mse
