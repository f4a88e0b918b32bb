#include "mse/linearize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>

#include "mse/parallel.hpp"

namespace mse {

namespace {

/// Source coefficient s_k = (n-1)/(2c) ∂^{k+1}_{x_n} c at x_n = 0.
double source_coeff(const ConformalFactor& c, const Vec& xp, int k) {
  const double cv = c.boundary_value(xp);
  return (c.dimension() - 1) / (2.0 * cv) * c.normal_derivative_at_zero(xp, k + 1);
}

/// t-vector −(n−1)/2 · ∇'[∂^q_{x_n}c / c](x',0); enters the order-(q+1)
/// singleton terms of the higher-order identities.
Vec tvec(const ConformalFactor& c, const Vec& xp, int q) {
  const int d = c.base_dim();
  const Vec x0 = c.ambient(xp, 0.0);
  const double cv = c.boundary_value(xp);
  const double dq = c.normal_derivative_at_zero(xp, q);
  Vec t = Vec::zero(d);
  for (int i = 0; i < d; ++i) {
    MultiIndex mi = MultiIndex::unit(c.dimension(), c.dimension() - 1, q);
    mi[i] += 1;
    const double dqi = c.eval(x0, mi);   // ∂_i ∂^q_n c
    const double ci = c.d1(x0, i);
    t[i] = -(c.dimension() - 1) / 2.0 * (dqi / cv - dq * ci / (cv * cv));
  }
  return t;
}

struct TripletAcc {
  std::vector<Eigen::Triplet<double>> a, b;
  const Grid* g;
  void add(long row, long node, double w) {
    const long ci = g->interior_id(node);
    if (ci >= 0)
      a.emplace_back(static_cast<int>(row), static_cast<int>(ci), w);
    else
      b.emplace_back(static_cast<int>(row), static_cast<int>(g->boundary_id(node)), w);
  }
  AssembledOp finish() const {
    AssembledOp op;
    op.A = SpMat(g->num_interior(), g->num_interior());
    op.A.setFromTriplets(a.begin(), a.end());
    op.B = SpMat(g->num_interior(), g->num_boundary());
    op.B.setFromTriplets(b.begin(), b.end());
    return op;
  }
};

}  // namespace

LinearizedOperator linearized_operator(const ConformalFactor& c, const Grid& g) {
  LinearizedOperator op;
  op.c = &c;
  op.grid = &g;
  op.n_equals_3 = (c.dimension() == 3);
  return op;
}

AssembledOp LinearizedOperator::assemble(LinForm form) const {
  const Grid& g = *grid;
  const int d = g.dim();
  TripletAcc acc;
  acc.g = &g;
  for (long i = 0; i < g.num_interior(); ++i) {
    const long node = g.node_of_interior(i);
    const Vec xp = g.coords(node);
    if (form == LinForm::Convection) {
      const Vec b = c->convection(xp);
      for (int a = 0; a < d; ++a) {
        const double h = g.spacing(a);
        acc.add(i, g.shift(node, a, 1), 1.0 / (h * h) + b[a] / (2.0 * h));
        acc.add(i, g.shift(node, a, -1), 1.0 / (h * h) - b[a] / (2.0 * h));
        acc.add(i, node, -2.0 / (h * h));
      }
    } else {
      if (c->dimension() != 3)
        throw std::invalid_argument("conductivity form requires n = 3");
      for (int a = 0; a < d; ++a) {
        const double h = g.spacing(a);
        Vec xm = xp, xq = xp;
        xm[a] -= 0.5 * h;
        xq[a] += 0.5 * h;
        const double gm = c->boundary_value(xm);
        const double gq = c->boundary_value(xq);
        acc.add(i, g.shift(node, a, 1), gq / (h * h));
        acc.add(i, g.shift(node, a, -1), gm / (h * h));
        acc.add(i, node, -(gq + gm) / (h * h));
      }
    }
  }
  return acc.finish();
}

AssembledOp LinearizedOperator::assemble_transpose() const {
  const Grid& g = *grid;
  const int d = g.dim();
  TripletAcc acc;
  acc.g = &g;
  for (long i = 0; i < g.num_interior(); ++i) {
    const long node = g.node_of_interior(i);
    for (int a = 0; a < d; ++a) {
      const double h = g.spacing(a);
      const long np = g.shift(node, a, 1);
      const long nm = g.shift(node, a, -1);
      const double bp = c->convection(g.coords(np))[a];
      const double bm = c->convection(g.coords(nm))[a];
      acc.add(i, np, 1.0 / (h * h) - bp / (2.0 * h));
      acc.add(i, nm, 1.0 / (h * h) + bm / (2.0 * h));
      acc.add(i, node, -2.0 / (h * h));
    }
  }
  return acc.finish();
}

AssembledOp LinearizedOperator::assemble_schrodinger() const {
  const Grid& g = *grid;
  const int d = g.dim();
  TripletAcc acc;
  acc.g = &g;
  for (long i = 0; i < g.num_interior(); ++i) {
    const long node = g.node_of_interior(i);
    const Vec xp = g.coords(node);
    for (int a = 0; a < d; ++a) {
      const double h = g.spacing(a);
      acc.add(i, g.shift(node, a, 1), 1.0 / (h * h));
      acc.add(i, g.shift(node, a, -1), 1.0 / (h * h));
      acc.add(i, node, -2.0 / (h * h));
    }
    acc.add(i, node, -c->schrodinger_potential(xp));
  }
  return acc.finish();
}

namespace {

template <class T>
ScalarFieldT<T> solve_dirichlet_impl(const AssembledOp& op, const Grid& g,
                                     const BoundaryFieldT<T>& f, const ScalarFieldT<T>* source,
                                     double rel_tol, LinearReport* rep) {
  using Dense = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  Dense fb(g.num_boundary());
  for (long b = 0; b < g.num_boundary(); ++b) fb[b] = f[b];
  Dense rhs = Dense::Zero(g.num_interior());
  if (source)
    for (long i = 0; i < g.num_interior(); ++i) rhs[i] = (*source)[g.node_of_interior(i)];
  rhs -= op.B * fb;
  LinearSolver solver(op.A, LinearSolver::choose(g.num_interior(), g.dim()), rel_tol);
  if (!solver.factorization_ok())
    throw std::runtime_error("linear operator factorization failed (singular discrete operator)");
  Dense x;
  if constexpr (std::is_same_v<T, double>)
    x = solver.solve(rhs, rep);
  else
    x = solver.solve_complex(rhs, rep);
  ScalarFieldT<T> v(g);
  for (long i = 0; i < g.num_interior(); ++i) v[g.node_of_interior(i)] = x[i];
  for (long b = 0; b < g.num_boundary(); ++b) v[g.node_of_boundary(b)] = f[b];
  return v;
}

}  // namespace

ScalarField solve_dirichlet(const AssembledOp& op, const Grid& g, const BoundaryField& f,
                            const ScalarField* source, double rel_tol, LinearReport* rep) {
  return solve_dirichlet_impl(op, g, f, source, rel_tol, rep);
}
ComplexField solve_dirichlet(const AssembledOp& op, const Grid& g, const ComplexBoundaryField& f,
                             const ComplexField* source, double rel_tol, LinearReport* rep) {
  return solve_dirichlet_impl(op, g, f, source, rel_tol, rep);
}

ScalarField solve_first_lin(const ConformalFactor& c, const Grid& g, const BoundaryField& f,
                            LinForm form) {
  if (!c.admissible()) throw std::invalid_argument("solve_first_lin requires an admissible scenario");
  const LinearizedOperator lop = linearized_operator(c, g);
  return solve_dirichlet(lop.assemble(form), g, f, nullptr);
}

ScalarField adjoint_solution(const ConformalFactor& c, const Grid& g) {
  ScalarField v0(g);
  for (long i = 0; i < g.num_nodes(); ++i) v0[i] = c.adjoint_weight(g.coords(i));
  return v0;
}

ScalarField adjoint_residual(const ConformalFactor& c, const Grid& g) {
  // Δ v0 − ∇·(v0 b) with grid stencils on sampled fields
  const int d = g.dim();
  ScalarField v0 = adjoint_solution(c, g);
  std::vector<ScalarField> v0b(d, ScalarField(g));
  for (long i = 0; i < g.num_nodes(); ++i) {
    const Vec b = c.convection(g.coords(i));
    for (int a = 0; a < d; ++a) v0b[a][i] = v0[i] * b[a];
  }
  ScalarField r(g);
  for (long k = 0; k < g.num_interior(); ++k) {
    const long node = g.node_of_interior(k);
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += axis_d2(v0, node, a) - axis_d1(v0b[a], node, a);
    r[node] = s;
  }
  return r;
}

ScalarField solve_second_lin(const ConformalFactor& c, const Grid& g, const ScalarField& v_l,
                             const ScalarField& v_a, LinForm form) {
  const LinearizedOperator lop = linearized_operator(c, g);
  ScalarField src(g);
  if (form == LinForm::Convection) {
    // (Δ + b·∇) w = s_2 v_l v_a
    for (long i = 0; i < g.num_nodes(); ++i)
      src[i] = source_coeff(c, g.coords(i), 2) * v_l[i] * v_a[i];
  } else {
    // div(γ ∇ w) = ∂³_{x_n}c · v_l v_a   (n = 3)
    for (long i = 0; i < g.num_nodes(); ++i)
      src[i] = c.normal_derivative_at_zero(g.coords(i), 3) * v_l[i] * v_a[i];
  }
  BoundaryField zero(g);
  return solve_dirichlet(lop.assemble(form), g, zero, &src);
}

namespace {

/// Q(v1,v2,v3) = 2[∇v2ᵀ(∇²v1)∇v3 + ∇v1ᵀ(∇²v2)∇v3 + ∇v1ᵀ(∇²v3)∇v2]
/// evaluated with grid stencils; the P-p-p third derivative of F.
ScalarField q_term(const Grid& g, const ScalarField& v1, const ScalarField& v2,
                   const ScalarField& v3) {
  const int d = g.dim();
  auto g1 = gradient_fd(v1), g2 = gradient_fd(v2), g3 = gradient_fd(v3);
  auto h1 = hessian_fd(v1), h2 = hessian_fd(v2), h3 = hessian_fd(v3);
  ScalarField q(g);
  for (long i = 0; i < g.num_nodes(); ++i) {
    double s = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        s += g2[a][i] * h1[a * d + b][i] * g3[b][i];
        s += g1[a][i] * h2[a * d + b][i] * g3[b][i];
        s += g1[a][i] * h3[a * d + b][i] * g2[b][i];
      }
    q[i] = 2.0 * s;
  }
  return q;
}

}  // namespace

ScalarField solve_third_lin(const ConformalFactor& c, const Grid& g,
                            const std::array<ScalarField, 3>& v,
                            const std::array<ScalarField, 3>& w_pairs) {
  const LinearizedOperator lop = linearized_operator(c, g);
  const ScalarField q = q_term(g, v[0], v[1], v[2]);
  ScalarField src(g);
  for (long i = 0; i < g.num_nodes(); ++i) {
    const Vec xp = g.coords(i);
    const double s2 = source_coeff(c, xp, 2);
    const double s3 = source_coeff(c, xp, 3);
    src[i] = s2 * (w_pairs[0][i] * v[2][i] + w_pairs[1][i] * v[1][i] + w_pairs[2][i] * v[0][i]) +
             s3 * v[0][i] * v[1][i] * v[2][i] + q[i];
  }
  BoundaryField zero(g);
  return solve_dirichlet(lop.assemble(LinForm::Convection), g, zero, &src);
}

ScalarField apply_convection(const ConformalFactor& c, const ScalarField& phi) {
  const Grid& g = phi.grid();
  ScalarField r(g);
  for (long k = 0; k < g.num_interior(); ++k) {
    const long node = g.node_of_interior(k);
    const Vec b = c.convection(g.coords(node));
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) s += axis_d2(phi, node, a) + b[a] * axis_d1(phi, node, a);
    r[node] = s;
  }
  return r;
}

ScalarField apply_adjoint(const ConformalFactor& c, const ScalarField& phi) {
  const Grid& g = phi.grid();
  const int d = g.dim();
  std::vector<ScalarField> pb(d, ScalarField(g));
  for (long i = 0; i < g.num_nodes(); ++i) {
    const Vec b = c.convection(g.coords(i));
    for (int a = 0; a < d; ++a) pb[a][i] = phi[i] * b[a];
  }
  ScalarField r(g);
  for (long k = 0; k < g.num_interior(); ++k) {
    const long node = g.node_of_interior(k);
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += axis_d2(phi, node, a) - axis_d1(pb[a], node, a);
    r[node] = s;
  }
  return r;
}

EpsilonSchedule EpsilonSchedule::dyadic(double eps0, int nlevels) {
  EpsilonSchedule s;
  double e = eps0;
  for (int i = 0; i < nlevels; ++i) {
    s.levels.push_back(e);
    e *= 0.5;
  }
  return s;
}

namespace {

struct DDSingle {
  ScalarField interior;
  BoundaryField dn;
  bool ok = true;
  std::string note;
};

/// One central mixed divided difference at a single ε (2^m parallel solves).
DDSingle dd_single(const ConformalFactor& c, const Grid& g,
                   const std::vector<BoundaryField>& dirs, double eps, const NewtonConfig& cfg) {
  const int m = static_cast<int>(dirs.size());
  const int combos = 1 << m;
  std::vector<SolveResult> sols(combos);
  std::vector<std::string> notes(combos);
  std::atomic<bool> all_ok{true};
  parallel_for(combos, [&](long s) {
    BoundaryField f(g);
    for (long b = 0; b < g.num_boundary(); ++b) {
      double v = 0.0;
      for (int k = 0; k < m; ++k) {
        const double sign = (s >> k) & 1 ? 1.0 : -1.0;
        v += sign * eps * dirs[k][b];
      }
      f[b] = v;
    }
    sols[s] = solve_mse(c, g, f, cfg);
    if (!sols[s].converged) {
      all_ok = false;
      notes[s] = sols[s].diagnostic;
    }
  });
  DDSingle r;
  r.interior = ScalarField(g);
  r.dn = BoundaryField(g);
  if (!all_ok) {
    r.ok = false;
    for (const auto& n : notes)
      if (!n.empty()) {
        r.note = "forward solve failed in dd stencil: " + n;
        break;
      }
    return r;
  }
  double wdenom = 1.0;
  for (int k = 0; k < m; ++k) wdenom *= 2.0 * eps;
  for (int s = 0; s < combos; ++s) {
    double sign = 1.0;
    for (int k = 0; k < m; ++k) sign *= ((s >> k) & 1) ? 1.0 : -1.0;
    const double w = sign / wdenom;
    for (long i = 0; i < g.num_nodes(); ++i) r.interior[i] += w * sols[s].u[i];
    const BoundaryField nd = normal_derivative(sols[s].u);
    for (long b = 0; b < g.num_boundary(); ++b) r.dn[b] += w * nd[b];
  }
  return r;
}

}  // namespace

DividedDifference divided_difference(const ConformalFactor& c, const Grid& g,
                                     const std::vector<BoundaryField>& directions,
                                     const EpsilonSchedule& schedule, const NewtonConfig& cfg) {
  DividedDifference dd;
  dd.order = static_cast<int>(directions.size());
  for (double eps : schedule.levels) {
    DDSingle s = dd_single(c, g, directions, eps, cfg);
    dd.eps.push_back(eps);
    dd.interior.push_back(std::move(s.interior));
    dd.dn.push_back(std::move(s.dn));
    dd.level_ok.push_back(s.ok);
    dd.level_note.push_back(s.note);
  }
  return dd;
}

IdentityReport boundary_interior_identity(const ConformalFactor& c, const Grid& g,
                                          const ScalarField& v_l, const ScalarField& v_a) {
  const ScalarField w = solve_second_lin(c, g, v_l, v_a);
  const ScalarField v0 = adjoint_solution(c, g);
  ScalarField rhs_f(g);
  for (long i = 0; i < g.num_nodes(); ++i)
    rhs_f[i] = source_coeff(c, g.coords(i), 2) * v0[i] * v_l[i] * v_a[i];
  IdentityReport rep;
  rep.lhs = integrate_flux(w, trace(v0));
  rep.rhs = integrate_interior(rhs_f);
  const double scale = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
  rep.residual = scale > 1e-14 ? std::abs(rep.lhs - rep.rhs) / scale : std::abs(rep.lhs - rep.rhs);
  return rep;
}

namespace {

/// Ppp(A,B,C) = 2[∇Bᵀ(∇²A)∇C + ∇Aᵀ(∇²B)∇C + ∇Aᵀ(∇²C)∇B]  (the P-p-p third
/// derivative of F contracted with three fields); equals q_term when all
/// three arguments coincide with the roles there.
ScalarField ppp_term(const Grid& g, const ScalarField& A, const ScalarField& B,
                     const ScalarField& C) {
  return q_term(g, A, B, C);
}

}  // namespace

HigherOrderReport verify_higher_order(const ConformalFactor& c, const Grid& g, int m,
                                      const std::vector<BoundaryField>& fs, double eps,
                                      const NewtonConfig& cfg, double budget_safety) {
  if (m < 3 || m > 5) throw std::invalid_argument("verify_higher_order: 3 <= m <= 5");
  if (static_cast<int>(fs.size()) != m)
    throw std::invalid_argument("verify_higher_order: need m test functions");

  const int d = g.dim();
  auto dd_subset = [&](std::vector<int> idx) {
    std::vector<BoundaryField> dirs;
    for (int k : idx) dirs.push_back(fs[k]);
    DDSingle s = dd_single(c, g, dirs, eps, cfg);
    if (!s.ok) throw std::runtime_error("verify_higher_order: " + s.note);
    return s;
  };

  // order-1 and order-2 fields for all needed subsets
  std::vector<ScalarField> v(m);
  for (int k = 0; k < m; ++k) v[k] = dd_subset({k}).interior;
  std::vector<std::vector<ScalarField>> w(m, std::vector<ScalarField>(m));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      w[a][b] = dd_subset({a, b}).interior;
      w[b][a] = w[a][b];
    }
  // order-3 fields (m >= 4), order-4 fields (m = 5)
  std::map<std::array<int, 3>, ScalarField> T3;
  std::map<std::array<int, 4>, ScalarField> T4;
  if (m >= 4) {
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        for (int e = b + 1; e < m; ++e) T3[{a, b, e}] = dd_subset({a, b, e}).interior;
  }
  if (m == 5) {
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        for (int e = b + 1; e < m; ++e)
          for (int f4 = e + 1; f4 < m; ++f4) T4[{a, b, e, f4}] = dd_subset({a, b, e, f4}).interior;
  }
  auto t3_of = [&](int a, int b, int e) -> const ScalarField& {
    std::array<int, 3> k{a, b, e};
    std::sort(k.begin(), k.end());
    return T3.at(k);
  };

  // boundary functional of the order-m divided difference
  std::vector<int> all(m);
  for (int k = 0; k < m; ++k) all[k] = k;
  DDSingle top = dd_subset(all);
  const ScalarField v0 = adjoint_solution(c, g);
  const double lhs = integrate_flux(top.interior, trace(v0));

  // assemble the interior remainder field (everything except the top term)
  ScalarField rem(g);
  auto add_field = [&](const std::function<double(long)>& f) {
    for (long i = 0; i < g.num_nodes(); ++i) rem[i] += f(i);
  };

  // coefficient fields
  ScalarField s2f(g), s3f(g), s4f(g);
  std::vector<ScalarField> t3v(d, ScalarField(g)), t4v(d, ScalarField(g));
  ScalarField u5_extra(g);  // m = 5 only: −5(n−1)(∂³c)²/c² from ∂⁵_u F
  for (long i = 0; i < g.num_nodes(); ++i) {
    const Vec xp = g.coords(i);
    s2f[i] = source_coeff(c, xp, 2);
    if (m >= 4) s3f[i] = source_coeff(c, xp, 3);
    if (m == 5) s4f[i] = source_coeff(c, xp, 4);
    if (m >= 4) {
      const Vec t = tvec(c, xp, 3);
      for (int a = 0; a < d; ++a) t3v[a][i] = t[a];
    }
    if (m == 5) {
      const Vec t = tvec(c, xp, 4);
      for (int a = 0; a < d; ++a) t4v[a][i] = t[a];
      const double cv = c.boundary_value(xp);
      const double d3 = c.normal_derivative_at_zero(xp, 3);
      u5_extra[i] = -5.0 * (c.dimension() - 1) * d3 * d3 / (cv * cv);
    }
  }

  if (m == 3) {
    const ScalarField q = q_term(g, v[0], v[1], v[2]);
    add_field([&](long i) {
      return s2f[i] * (w[0][1][i] * v[2][i] + w[0][2][i] * v[1][i] + w[1][2][i] * v[0][i]) + q[i];
    });
  } else if (m == 4) {
    // {abc}{d}: s2 T3 v  over the 4 complementary choices
    for (int dslot = 0; dslot < 4; ++dslot) {
      std::vector<int> abc;
      for (int k = 0; k < 4; ++k)
        if (k != dslot) abc.push_back(k);
      const ScalarField& T = t3_of(abc[0], abc[1], abc[2]);
      add_field([&](long i) { return s2f[i] * T[i] * v[dslot][i]; });
    }
    // {ab}{cd}: s2 w w over the 3 pairings
    const int pair3[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
    for (auto& pr : pair3)
      add_field([&](long i) { return s2f[i] * w[pr[0]][pr[1]][i] * w[pr[2]][pr[3]][i]; });
    // {ab}{c}{d}: s3 w v v + Ppp(w, v, v) over the 6 choices
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        std::vector<int> rest;
        for (int k = 0; k < 4; ++k)
          if (k != a && k != b) rest.push_back(k);
        const ScalarField ppp = ppp_term(g, w[a][b], v[rest[0]], v[rest[1]]);
        add_field([&](long i) {
          return s3f[i] * w[a][b][i] * v[rest[0]][i] * v[rest[1]][i] + ppp[i];
        });
      }
    // singletons: Σ_a t3·∇v^a Π_{b≠a} v^b   (the s4 Πv part is the top term)
    for (int a = 0; a < 4; ++a) {
      auto ga = gradient_fd(v[a]);
      add_field([&](long i) {
        double tg = 0.0;
        for (int ax = 0; ax < d; ++ax) tg += t3v[ax][i] * ga[ax][i];
        double pv = 1.0;
        for (int b = 0; b < 4; ++b)
          if (b != a) pv *= v[b][i];
        return tg * pv;
      });
    }
  } else {  // m == 5
    // {abcd}{e}: s2 T4 v
    for (int e = 0; e < 5; ++e) {
      std::array<int, 4> k4{};
      int j = 0;
      for (int k = 0; k < 5; ++k)
        if (k != e) k4[j++] = k;
      const ScalarField& T = T4.at(k4);
      add_field([&](long i) { return s2f[i] * T[i] * v[e][i]; });
    }
    // {abc}{de}: s2 T3 w over all 10 splits
    for (int a = 0; a < 5; ++a)
      for (int b = a + 1; b < 5; ++b)
        for (int e = b + 1; e < 5; ++e) {
          std::vector<int> rest;
          for (int k = 0; k < 5; ++k)
            if (k != a && k != b && k != e) rest.push_back(k);
          const ScalarField& T = t3_of(a, b, e);
          add_field([&](long i) { return s2f[i] * T[i] * w[rest[0]][rest[1]][i]; });
        }
    // {abc}{d}{e}: s3 T3 v v + Ppp(T3, v, v)
    for (int a = 0; a < 5; ++a)
      for (int b = a + 1; b < 5; ++b)
        for (int e = b + 1; e < 5; ++e) {
          std::vector<int> rest;
          for (int k = 0; k < 5; ++k)
            if (k != a && k != b && k != e) rest.push_back(k);
          const ScalarField& T = t3_of(a, b, e);
          const ScalarField ppp = ppp_term(g, T, v[rest[0]], v[rest[1]]);
          add_field([&](long i) {
            return s3f[i] * T[i] * v[rest[0]][i] * v[rest[1]][i] + ppp[i];
          });
        }
    // {ab}{cd}{e}: s3 w w v + Ppp(w, w, v) over 15 splits
    for (int a = 0; a < 5; ++a)
      for (int b = a + 1; b < 5; ++b)
        for (int e = 0; e < 5; ++e) {
          if (e == a || e == b) continue;
          std::vector<int> rest;
          for (int k = 0; k < 5; ++k)
            if (k != a && k != b && k != e) rest.push_back(k);
          const int cA = rest[0], cB = rest[1];
          if (cA > cB) continue;  // unordered pair {cd}
          if (a > cA) continue;   // count each {ab}{cd} split once
          const ScalarField ppp = ppp_term(g, w[a][b], w[cA][cB], v[e]);
          add_field([&](long i) {
            return s3f[i] * w[a][b][i] * w[cA][cB][i] * v[e][i] + ppp[i];
          });
        }
    // {ab}{c}{d}{e}: s4 w v v v + t3-pattern over the four arguments
    for (int a = 0; a < 5; ++a)
      for (int b = a + 1; b < 5; ++b) {
        std::vector<int> rest;
        for (int k = 0; k < 5; ++k)
          if (k != a && k != b) rest.push_back(k);
        auto gw = gradient_fd(w[a][b]);
        std::array<std::vector<ScalarField>, 3> gv;
        for (int r = 0; r < 3; ++r) gv[r] = gradient_fd(v[rest[r]]);
        add_field([&](long i) {
          const double wv = w[a][b][i];
          const double vv0 = v[rest[0]][i], vv1 = v[rest[1]][i], vv2 = v[rest[2]][i];
          double s = s4f[i] * wv * vv0 * vv1 * vv2;
          double tg = 0.0;
          for (int ax = 0; ax < d; ++ax) tg += t3v[ax][i] * gw[ax][i];
          s += tg * vv0 * vv1 * vv2;
          const double prods[3] = {wv * vv1 * vv2, wv * vv0 * vv2, wv * vv0 * vv1};
          for (int r = 0; r < 3; ++r) {
            double tgr = 0.0;
            for (int ax = 0; ax < d; ++ax) tgr += t3v[ax][i] * gv[r][ax][i];
            s += tgr * prods[r];
          }
          return s;
        });
      }
    // singletons: u5_extra Πv + Σ t4·∇v^a Π v^b + P-p⁴ contraction
    {
      std::array<std::vector<ScalarField>, 5> gv;
      std::array<std::vector<ScalarField>, 5> hv;
      for (int k = 0; k < 5; ++k) {
        gv[k] = gradient_fd(v[k]);
        hv[k] = hessian_fd(v[k]);
      }
      add_field([&](long i) {
        double pv_all = 1.0;
        for (int k = 0; k < 5; ++k) pv_all *= v[k][i];
        double s = u5_extra[i] * pv_all;
        for (int a = 0; a < 5; ++a) {
          double tg = 0.0;
          for (int ax = 0; ax < d; ++ax) tg += t4v[ax][i] * gv[a][ax][i];
          double pv = 1.0;
          for (int b = 0; b < 5; ++b)
            if (b != a) pv *= v[b][i];
          s += tg * pv;
        }
        // −2 Σ_{P-slot e} Σ_{pairs {α,β}⊂rest} (∇v_αᵀ ∇²v_e ∇v_β)(∇v_γ·∇v_δ)
        for (int e = 0; e < 5; ++e) {
          int rest[4], j = 0;
          for (int k = 0; k < 5; ++k)
            if (k != e) rest[j++] = k;
          for (int p1 = 0; p1 < 4; ++p1)
            for (int p2 = p1 + 1; p2 < 4; ++p2) {
              int oth[2], q = 0;
              for (int r = 0; r < 4; ++r)
                if (r != p1 && r != p2) oth[q++] = r;
              double quad = 0.0, dotp = 0.0;
              for (int ax = 0; ax < d; ++ax) {
                for (int bx = 0; bx < d; ++bx)
                  quad += gv[rest[p1]][ax][i] * hv[e][ax * d + bx][i] * gv[rest[p2]][bx][i];
                dotp += gv[rest[oth[0]]][ax][i] * gv[rest[oth[1]]][ax][i];
              }
              s += -2.0 * quad * dotp;
            }
        }
        return s;
      });
    }
  }

  ScalarField rem_weighted(g), top_truth_f(g);
  ScalarField top_coeff(g);
  for (long i = 0; i < g.num_nodes(); ++i) {
    top_coeff[i] = source_coeff(c, g.coords(i), m);  // (n−1)/(2c) ∂^{m+1}_{x_n}c
    double pv = 1.0;
    for (int k = 0; k < m; ++k) pv *= v[k][i];
    top_truth_f[i] = v0[i] * top_coeff[i] * pv;
    rem_weighted[i] = v0[i] * rem[i];
  }

  HigherOrderReport rep;
  rep.order = m;
  rep.eps = eps;
  rep.lhs = lhs;
  rep.remainder = integrate_interior(rem_weighted);
  rep.top_implied = lhs - rep.remainder;
  rep.top_truth = integrate_interior(top_truth_f);
  rep.residual_abs = std::abs(rep.top_implied - rep.top_truth);
  const double scale = std::max({std::abs(rep.top_truth), std::abs(rep.lhs), 1.0});
  rep.residual_rel = rep.residual_abs / scale;
  double h2 = 0.0;
  for (int a = 0; a < d; ++a) h2 = std::max(h2, g.spacing(a) * g.spacing(a));
  rep.noise_floor = budget_safety * (scale * (h2 + eps * eps) +
                                     cfg.residual_tolerance / std::pow(eps, m));
  rep.within_budget = rep.residual_abs <= rep.noise_floor;
  return rep;
}

SlopeFit dyadic_slopes(const std::vector<double>& errs) {
  SlopeFit fit;
  for (size_t i = 0; i + 1 < errs.size(); ++i) {
    if (errs[i] <= 0.0 || errs[i + 1] <= 0.0) {
      fit.pairwise.push_back(0.0);
      continue;
    }
    fit.pairwise.push_back(std::log2(errs[i] / errs[i + 1]));
  }
  for (size_t i = 0; i + 1 < fit.pairwise.size(); ++i) {
    const double m = std::min(fit.pairwise[i], fit.pairwise[i + 1]);
    fit.best3_min = std::max(fit.best3_min, m);
  }
  if (fit.pairwise.size() == 1) fit.best3_min = fit.pairwise[0];
  return fit;
}

}  // namespace mse
