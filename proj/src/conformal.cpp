#include "mse/conformal.hpp"

#include <cmath>

namespace mse {

namespace {

void require_positive(double cval, const char* where) {
  if (!(cval > 0.0)) {
    throw std::domain_error(std::string(where) + ": conformal factor is not positive");
  }
}

std::vector<Factor1D> ones(int n) {
  return std::vector<Factor1D>(static_cast<size_t>(n), Factor1D::constant(1.0));
}

}  // namespace

double ConformalFactor::lambda(const Vec& x) const {
  const double cv = value(x);
  require_positive(cv, "lambda");
  return 0.5 * std::log(cv);
}

double ConformalFactor::dlambda(const Vec& x, int i) const {
  const double cv = value(x);
  require_positive(cv, "dlambda");
  return d1(x, i) / (2.0 * cv);
}

Vec ConformalFactor::ambient(const Vec& xprime, double xn) const {
  Vec x = Vec::zero(n_);
  for (int i = 0; i < n_ - 1; ++i) x[i] = xprime[i];
  x[n_ - 1] = xn;
  return x;
}

double ConformalFactor::normal_derivative_at_zero(const Vec& xprime, int k) const {
  return eval(ambient(xprime, 0.0), MultiIndex::unit(n_, n_ - 1, k));
}

double ConformalFactor::boundary_value(const Vec& xprime) const {
  return value(ambient(xprime, 0.0));
}

Vec ConformalFactor::tangential_gradient(const Vec& xprime) const {
  Vec g = Vec::zero(n_ - 1);
  const Vec x = ambient(xprime, 0.0);
  for (int i = 0; i < n_ - 1; ++i) g[i] = d1(x, i);
  return g;
}

Vec ConformalFactor::convection(const Vec& xprime) const {
  const double cv = boundary_value(xprime);
  require_positive(cv, "convection");
  Vec b = tangential_gradient(xprime);
  const double s = (n_ - 1) / (2.0 * cv);
  for (int i = 0; i < n_ - 1; ++i) b[i] *= s;
  return b;
}

double ConformalFactor::adjoint_weight(const Vec& xprime) const {
  const double cv = boundary_value(xprime);
  require_positive(cv, "adjoint_weight");
  return std::pow(cv, 0.5 * (n_ - 1));
}

double ConformalFactor::schrodinger_potential(const Vec& xprime) const {
  // q = Δ'√γ/√γ = Δ'γ/(2γ) − |∇'γ|²/(4γ²) with γ = c(·,0)
  const Vec x = ambient(xprime, 0.0);
  const double g = value(x);
  require_positive(g, "schrodinger_potential");
  double lap = 0.0, grad2 = 0.0;
  for (int i = 0; i < n_ - 1; ++i) {
    lap += d2(x, i, i);
    const double gi = d1(x, i);
    grad2 += gi * gi;
  }
  return lap / (2.0 * g) - grad2 / (4.0 * g * g);
}

ConformalFactor make_scenario(const std::string& id, int ambient_dim, const ScenarioParams& p) {
  const int n = ambient_dim;
  const int d = n - 1;
  const int M = 8;  // max cached derivative order per axis
  SeparableSum c(n, M);

  auto gauss_bump = [&](const Vec& center, double width) {
    // prod over base axes of a unit Gaussian; ambient factor on x_n supplied by caller
    std::vector<Factor1D> f;
    for (int a = 0; a < d; ++a) f.push_back(Factor1D::gaussian(center[std::min(a, center.dim() - 1)], width));
    return f;
  };

  // Product of two axis-aligned Gaussian bumps folded analytically into a single
  // Gaussian per axis times an amplitude: G(m1,s1)G(m2,s2) = A G(m,s).
  struct Folded {
    double amp;
    std::vector<Factor1D> factors;
  };
  auto fold_bumps = [&](const Vec& c1, double s1, const Vec& c2, double s2) {
    Folded r;
    r.amp = 1.0;
    for (int a = 0; a < d; ++a) {
      const double m1 = c1[std::min(a, c1.dim() - 1)];
      const double m2 = c2[std::min(a, c2.dim() - 1)];
      const double is = 1.0 / (s1 * s1) + 1.0 / (s2 * s2);
      const double s = std::sqrt(1.0 / is);
      const double m = (m1 / (s1 * s1) + m2 / (s2 * s2)) * s * s;
      r.amp *= std::exp(-0.5 * (m1 * m1 / (s1 * s1) + m2 * m2 / (s2 * s2) - m * m / (s * s)));
      r.factors.push_back(Factor1D::gaussian(m, s));
    }
    return r;
  };

  bool admissible = true;
  if (id == "constant") {
    auto f = ones(n);
    c.add_term(p.kappa, f);
  } else if (id == "exp-normal") {
    // c = e^{2 x_n}: geometry tests only (∂_{x_n}c(x',0) = 2 ≠ 0)
    auto f = ones(n);
    f[n - 1] = Factor1D::exponential(2.0);
    c.add_term(1.0, f);
    admissible = false;
  } else if (id == "exp-tangential") {
    // c = exp(a·x'), independent of x_n
    auto f = ones(n);
    for (int a = 0; a < d; ++a) f[a] = Factor1D::exponential(p.exp_rate[std::min(a, p.exp_rate.dim() - 1)]);
    c.add_term(1.0, f);
  } else if (id == "bump-cubic") {
    // c = 1 + alpha x_n^3 rho(x'), rho a Gaussian bump; ∂³_{x_n}c(x',0) = 6 alpha rho
    c.add_term(1.0, ones(n));
    auto f = gauss_bump(p.bump_center, p.bump_width);
    f.push_back(Factor1D::monomial(3));
    c.add_term(p.alpha, f);
  } else if (id == "bump-cubic-var") {
    // c = beta(x') (1 + alpha x_n^3 rho(x')) with beta = 1 + beta_amp * rho_beta(x')
    c.add_term(1.0, ones(n));
    {
      auto f = gauss_bump(p.beta_center, p.beta_width);
      f.push_back(Factor1D::constant(1.0));
      c.add_term(p.beta_amp, f);
    }
    {
      auto f = gauss_bump(p.bump_center, p.bump_width);
      f.push_back(Factor1D::monomial(3));
      c.add_term(p.alpha, f);
    }
    {
      Folded fb = fold_bumps(p.beta_center, p.beta_width, p.bump_center, p.bump_width);
      fb.factors.push_back(Factor1D::monomial(3));
      c.add_term(p.beta_amp * p.alpha * fb.amp, std::move(fb.factors));
    }
  } else if (id == "quartic") {
    // c = beta(x') (1 + gamma x_n^4 sigma(x')); ∂⁴_{x_n}c(x',0) = 24 gamma beta sigma
    c.add_term(1.0, ones(n));
    {
      auto f = gauss_bump(p.beta_center, p.beta_width);
      f.push_back(Factor1D::constant(1.0));
      c.add_term(p.beta_amp, f);
    }
    {
      auto f = gauss_bump(p.bump_center, p.bump_width);
      f.push_back(Factor1D::monomial(4));
      c.add_term(p.gamma, f);
    }
    {
      Folded fb = fold_bumps(p.beta_center, p.beta_width, p.bump_center, p.bump_width);
      fb.factors.push_back(Factor1D::monomial(4));
      c.add_term(p.beta_amp * p.gamma * fb.amp, std::move(fb.factors));
    }
  } else {
    throw std::invalid_argument("unknown scenario id: " + id);
  }
  return ConformalFactor(id, n, M, admissible, std::move(c));
}

Christoffel christoffel(const ConformalFactor& c, const Vec& x) {
  const int n = c.dimension();
  const double cv = c.value(x);
  require_positive(cv, "christoffel");
  Vec dl = Vec::zero(n);
  for (int i = 0; i < n; ++i) dl[i] = c.d1(x, i) / (2.0 * cv);
  Christoffel G;
  G.n = n;
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        G.at(m, i, j) = dl[i] * (j == m) + dl[j] * (i == m) - dl[m] * (i == j);
  return G;
}

double eval_F(const ConformalFactor& c, const JetPoint& jet) {
  const int d = c.base_dim();
  const Vec x = c.ambient(jet.x, jet.u);
  const double cv = c.value(x);
  require_positive(cv, "eval_F");
  double trP = 0.0;
  for (int i = 0; i < d; ++i) trP += jet.P(i, i);
  double pc = 0.0;
  for (int i = 0; i < d; ++i) pc += jet.p[i] * c.d1(x, i);
  const double dnc = c.d1(x, d);
  const double p2 = jet.p.dot(jet.p);
  const double PqP = jet.P.quad(jet.p, jet.p);
  return -trP - (d / (2.0 * cv)) * (pc - dnc) + PqP / (1.0 + p2);
}

FDerivatives dF(const ConformalFactor& c, const JetPoint& jet) {
  const int d = c.base_dim();
  const Vec x = c.ambient(jet.x, jet.u);
  const double cv = c.value(x);
  require_positive(cv, "dF");
  const double p2 = jet.p.dot(jet.p);
  const double w = 1.0 + p2;
  const double PqP = jet.P.quad(jet.p, jet.p);
  const double nd = static_cast<double>(d);  // n-1

  FDerivatives r;
  r.Fp = Vec::zero(d);
  r.FP = Mat::zero(d);

  // ∂F/∂P_{kl} = -δ_{kl} + p_k p_l / (1+|p|²)
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) r.FP(k, l) = -(k == l ? 1.0 : 0.0) + jet.p[k] * jet.p[l] / w;

  // ∂F/∂p_k
  for (int k = 0; k < d; ++k) {
    double Pp = 0.0;  // sum_j (P_{kj}+P_{jk}) p_j
    for (int j = 0; j < d; ++j) Pp += (jet.P(k, j) + jet.P(j, k)) * jet.p[j];
    r.Fp[k] = -nd / (2.0 * cv) * c.d1(x, k) - 2.0 * jet.p[k] * PqP / (w * w) + Pp / w;
  }

  // ∂F/∂u: c depends on u through x_n
  const double dnc = c.d1(x, d);
  double pc = 0.0, pdc = 0.0;
  for (int i = 0; i < d; ++i) {
    pc += jet.p[i] * c.d1(x, i);
    pdc += jet.p[i] * c.d2(x, i, d);
  }
  const double d2nc = c.d2(x, d, d);
  r.Fu = nd * dnc / (2.0 * cv * cv) * (pc - dnc) - nd / (2.0 * cv) * (pdc - d2nc);
  return r;
}

double graph_residual_at(const ConformalFactor& c, const JetPoint& jet) {
  // identical to eval_F on the jet; kept as a named operation
  return eval_F(c, jet);
}

double implicit_residual_at(const ConformalFactor& c, const JetPoint& jet) {
  // f(x', x_n) = x_n - u(x'); residual = c²(|∇_g f|² Δ_g f − ∇²_g f(∇_g f, ∇_g f))
  // assembled from the Riemannian gradient/Hessian via the Christoffel symbols.
  const int n = c.dimension();
  const int d = n - 1;
  const Vec x = c.ambient(jet.x, jet.u);
  Vec df = Vec::zero(n);
  for (int i = 0; i < d; ++i) df[i] = -jet.p[i];
  df[d] = 1.0;
  Mat d2f = Mat::zero(n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) d2f(i, j) = -jet.P(i, j);

  const Christoffel G = christoffel(c, x);
  Mat hess = Mat::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = d2f(i, j);
      for (int m = 0; m < n; ++m) s -= G(m, i, j) * df[m];
      hess(i, j) = s;
    }
  const double grad2 = df.dot(df);           // = c²|∇_g f|² / c ... scaled below
  const double tr = hess.trace();            // Σ hess_ii
  const double hff = hess.quad(df, df);      // hess_ij ∂_i f ∂_j f
  // c²|∇_g f|²Δ_g f = grad2 * tr ; c²∇²_g f(∇_g f,∇_g f) = hff
  return grad2 * tr - hff;
}

double divergence_residual_at(const ConformalFactor& c, const JetPoint& jet) {
  // −div_{g_{n-1}}(∇u / W) + (n−1)∂_{x_n}c / (2 c W), W = (1+|∇u|²)^{1/2},
  // with div_g(a) = Σ_i ∂_i a_i + Σ_{i,j} a_j Γ^i_{ij} (first n−1 variables).
  const int d = c.base_dim();
  const Vec x = c.ambient(jet.x, jet.u);
  const double cv = c.value(x);
  require_positive(cv, "divergence_residual");
  const double p2 = jet.p.dot(jet.p);
  const double W = std::sqrt(1.0 + p2);
  // Euclidean part: div(p/W) evaluated from the jet (chain rule through u):
  // ∂_i (p_i / W) = P_ii / W − p_i (P p)_i / W³
  double divE = 0.0;
  for (int i = 0; i < d; ++i) {
    double Ppi = 0.0;
    for (int j = 0; j < d; ++j) Ppi += jet.P(i, j) * jet.p[j];
    divE += jet.P(i, i) / W - jet.p[i] * Ppi / (W * W * W);
  }
  // Γ term: Σ_{i,j<=d} (p_j/W) Γ^i_{ij} evaluated on the graph
  const Christoffel G = christoffel(c, x);
  double gterm = 0.0;
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += G(i, i, j);
    gterm += jet.p[j] / W * s;
  }
  const double dnc = c.d1(x, d);
  return -(divE + gterm) + d * dnc / (2.0 * cv * W);
}

double euclidean_residual_at(const JetPoint& jet) {
  const int d = jet.x.dim();
  const double p2 = jet.p.dot(jet.p);
  const double W = std::sqrt(1.0 + p2);
  double divE = 0.0;
  for (int i = 0; i < d; ++i) {
    double Ppi = 0.0;
    for (int j = 0; j < d; ++j) Ppi += jet.P(i, j) * jet.p[j];
    divE += jet.P(i, i) / W - jet.p[i] * Ppi / (W * W * W);
  }
  return -divE * W;
}

double admissibility_defect(const ConformalFactor& c, const std::vector<Vec>& xprimes) {
  double worst = 0.0;
  for (const Vec& xp : xprimes) {
    worst = std::max(worst, std::abs(c.normal_derivative_at_zero(xp, 1)));
    worst = std::max(worst, std::abs(c.normal_derivative_at_zero(xp, 2)));
  }
  return worst;
}

}  // namespace mse
