#include "mse/cgo.hpp"

#include <cmath>

#include "mse/parallel.hpp"

namespace mse {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

ZetaPair make_zeta_pair(const Vec& xi, double h, const Vec& mu1, const Vec& mu2) {
  const int d = xi.dim();
  if (d < 3) throw std::invalid_argument("make_zeta_pair: frame construction needs d >= 3");
  const double nxi = xi.norm();
  if (!(nxi > 0.0)) throw std::invalid_argument("make_zeta_pair: |xi| must be positive");
  if (!(h > 0.0) || h * nxi >= 2.0)
    throw std::domain_error("make_zeta_pair: need h|xi| < 2");
  const double tol = 1e-12;
  if (std::abs(mu1.norm() - 1.0) > tol || std::abs(mu2.norm() - 1.0) > tol ||
      std::abs(mu1.dot(mu2)) > tol || std::abs(mu1.dot(xi)) > tol * nxi ||
      std::abs(mu2.dot(xi)) > tol * nxi)
    throw std::invalid_argument("make_zeta_pair: frame must be orthonormal and ⟂ xi");

  const double root = std::sqrt(1.0 - 0.25 * h * h * nxi * nxi);
  ZetaPair zp;
  zp.mu1 = mu1;
  zp.mu2 = mu2;
  zp.xi = xi;
  zp.h = h;
  zp.zeta1 = CVec(d);
  zp.zeta2 = CVec(d);
  for (int i = 0; i < d; ++i) {
    zp.zeta1[i] = std::complex<double>(mu1[i], 0.5 * h * xi[i] + root * mu2[i]);
    zp.zeta2[i] = std::complex<double>(-mu1[i], 0.5 * h * xi[i] - root * mu2[i]);
  }
  return zp;
}

ZetaPair make_zeta_pair_2d(const Vec& xi, double h) {
  if (xi.dim() != 2) throw std::invalid_argument("make_zeta_pair_2d: d must be 2");
  const double nxi = xi.norm();
  if (!(nxi > 0.0)) throw std::invalid_argument("make_zeta_pair_2d: |xi| must be positive");
  if (!(h > 0.0) || h * nxi >= 2.0)
    throw std::domain_error("make_zeta_pair_2d: need h|xi| < 2");
  const Vec perp{-xi[1], xi[0]};
  ZetaPair zp;
  zp.xi = xi;
  zp.h = h;
  zp.mu1 = perp * (1.0 / nxi);
  zp.mu2 = xi * (1.0 / nxi);
  zp.zeta1 = CVec(2);
  zp.zeta2 = CVec(2);
  for (int i = 0; i < 2; ++i) {
    zp.zeta1[i] = 0.5 * h * std::complex<double>(perp[i], xi[i]);
    zp.zeta2[i] = 0.5 * h * std::complex<double>(-perp[i], xi[i]);
  }
  return zp;
}

void default_frame(const Vec& xi, Vec& mu1, Vec& mu2) {
  const int d = xi.dim();
  if (d != 3) throw std::invalid_argument("default_frame: d must be 3");
  const double nxi = xi.norm();
  Vec hat = xi * (1.0 / nxi);
  // seed axis with the smallest |component| for stability; |xi_k| is even in
  // xi, so mu1 is even and mu2 = (−ξ̂)×mu1 is odd under xi → −xi.
  int k = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(hat[a]) < std::abs(hat[k])) k = a;
  Vec e = Vec::zero(3);
  e[k] = 1.0;
  const double proj = e.dot(hat);
  Vec m1 = e - hat * proj;
  m1 = m1 * (1.0 / m1.norm());
  Vec m2{hat[1] * m1[2] - hat[2] * m1[1], hat[2] * m1[0] - hat[0] * m1[2],
         hat[0] * m1[1] - hat[1] * m1[0]};
  mu1 = m1;
  mu2 = m2;
}

ZetaPair make_zeta_pair_auto(const Vec& xi, double h) {
  if (xi.dim() == 2) return make_zeta_pair_2d(xi, h);
  Vec m1, m2;
  default_frame(xi, m1, m2);
  return make_zeta_pair(xi, h, m1, m2);
}

CauchyTransform::CauchyTransform(const Vec& re, const Vec& im, double radius, int cells)
    : e1_(re), e2_(im), radius_(radius), cells_(cells) {
  const double tol = 1e-10;
  if (std::abs(e1_.norm() - 1.0) > tol || std::abs(e2_.norm() - 1.0) > tol ||
      std::abs(e1_.dot(e2_)) > tol)
    throw std::invalid_argument("CauchyTransform: Re ζ0, Im ζ0 must be orthonormal");
  if (cells_ % 2 == 0) ++cells_;  // keep a cell centered at y = 0
}

std::complex<double> CauchyTransform::apply(const Fn& f, const Vec& x) const {
  const double delta = 2.0 * radius_ / cells_;
  const int half = cells_ / 2;
  std::complex<double> sum = 0.0;
  // pair every cell center y with −y; the y = 0 cell integrates to zero
  // analytically and is skipped.
  for (int iy = -half; iy <= half; ++iy) {
    for (int jy = -half; jy <= half; ++jy) {
      if (iy < 0 || (iy == 0 && jy <= 0)) continue;  // half-plane of pairs
      const double y1 = iy * delta;
      const double y2 = jy * delta;
      if (y1 * y1 + y2 * y2 > radius_ * radius_) continue;
      Vec xm = x, xp = x;
      for (int a = 0; a < x.dim(); ++a) {
        const double off = y1 * e1_[a] + y2 * e2_[a];
        xm[a] -= off;
        xp[a] += off;
      }
      const std::complex<double> kern =
          delta * delta / (2.0 * M_PI * std::complex<double>(y1, y2));
      sum += (f(xm) - f(xp)) * kern;
    }
  }
  return sum;
}

ComplexField CauchyTransform::apply_to_grid(const Fn& f, const Grid& g) const {
  ComplexField out(g);
  parallel_for(g.num_nodes(), [&](long i) { out[i] = apply(f, g.coords(i)); });
  return out;
}

double CauchyTransform::tail_estimate(const Fn& f, const Vec& x0) const {
  double m = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double th = 2.0 * M_PI * k / 64.0;
    Vec x = x0;
    for (int a = 0; a < x.dim(); ++a)
      x[a] += radius_ * (std::cos(th) * e1_[a] + std::sin(th) * e2_[a]);
    m = std::max(m, std::abs(f(x)));
  }
  return m;
}

CGOSolution build_cgo(const ConformalFactor& c, const Grid& g, const ZetaPair& zp, int member,
                      const CGOOptions& opts) {
  if (member != 1 && member != 2) throw std::invalid_argument("build_cgo: member must be 1 or 2");
  const int d = g.dim();
  const CVec zeta = (member == 1) ? zp.zeta1 : zp.zeta2;
  const double h = zp.h;

  CGOSolution sol;
  sol.zeta = zeta;
  sol.h = h;
  sol.phi = ComplexField(g);

  // overflow guard: cap Re(x·ζ)/h over the grid
  double mx = -1e300, mn = 1e300;
  for (long i = 0; i < g.num_nodes(); ++i) {
    const Vec x = g.coords(i);
    const double re = zeta.real().dot(x) / h;
    mx = std::max(mx, re);
    mn = std::min(mn, re);
  }
  if (mx - mn > 600.0)
    throw std::runtime_error("build_cgo: h too small for grid (exponent range " +
                             std::to_string(mx - mn) + ")");
  sol.scale_log = mx;

  const LinearizedOperator lop = linearized_operator(c, g);
  AssembledOp op;
  if (d == 2) {
    // Schrödinger reduction path: (Δ − q) g = 0, Φ = 0
    op = lop.assemble_schrodinger();
  } else {
    // magnetic path: phase from the directional Cauchy transform
    op = (member == 1) ? lop.assemble(LinForm::Convection) : lop.assemble_transpose();
    const Vec zr0 = zp.mu1 * (member == 1 ? 1.0 : -1.0);
    const Vec zi0 = zp.mu2 * (member == 1 ? 1.0 : -1.0);
    const CVec zeta0 = CVec::from(zp.mu1, zp.mu2);  // ζ0 of member 1
    // transport argument g(x') = −(1/2) b(x')·ζ0, identical for both members
    auto arg = [&](const Vec& xp) -> std::complex<double> {
      return -0.5 * zeta0.dot(c.convection(xp));
    };
    // Φ constant/zero when the conductivity is constant (A = 0)
    bool trivial = true;
    for (long i = 0; i < g.num_nodes() && trivial; i += std::max<long>(1, g.num_nodes() / 64))
      if (std::abs(arg(g.coords(i))) > 1e-15) trivial = false;
    if (!trivial) {
      double diam2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double s = g.domain().upper[a] - g.domain().lower[a];
        diam2 += s * s;
      }
      const double radius = opts.cauchy_radius_factor * std::sqrt(diam2);
      CauchyTransform N(zr0, zi0, radius, opts.cauchy_cells);
      sol.phi = N.apply_to_grid(arg, g);
      Vec center = Vec::zero(d);
      for (int a = 0; a < d; ++a)
        center[a] = 0.5 * (g.domain().lower[a] + g.domain().upper[a]);
      sol.cauchy_tail = N.tail_estimate(arg, center);
    }
  }

  // ideal trace e^{x·ζ/h − M} e^{Φ} on ∂Ω, exact discrete solve, remainder
  ComplexBoundaryField f(g);
  for (long b = 0; b < g.num_boundary(); ++b) {
    const long node = g.node_of_boundary(b);
    const Vec x = g.coords(node);
    f[b] = std::exp(zeta.dot(x) / h - sol.scale_log + sol.phi[node]);
  }
  sol.trace = f;
  sol.interior = solve_dirichlet(op, g, f, nullptr, opts.linear_rel_tol, &sol.solve_report);

  ComplexField dev(g);
  for (long i = 0; i < g.num_nodes(); ++i) {
    const Vec x = g.coords(i);
    const std::complex<double> carrier = std::exp(-(zeta.dot(x) / h - sol.scale_log));
    dev[i] = carrier * sol.interior[i] - std::exp(sol.phi[i]);
  }
  double l2 = 0.0;
  for (long i = 0; i < g.num_nodes(); ++i) l2 += std::norm(dev[i]) * g.interior_weight(i);
  sol.remainder_norm = std::sqrt(l2);
  return sol;
}

std::vector<FourierProbeRow> fourier_probe(const ConformalFactor& c, const Grid& g,
                                           const ScalarField& target, const std::vector<Vec>& xis,
                                           double h, const CGOOptions& opts) {
  std::vector<FourierProbeRow> rows(xis.size());
  for (size_t k = 0; k < xis.size(); ++k) {
    FourierProbeRow row;
    row.xi = xis[k];
    std::complex<double> ref = 0.0;
    for (long i = 0; i < g.num_nodes(); ++i) {
      const Vec x = g.coords(i);
      ref += target[i] * std::exp(kI * row.xi.dot(x)) * g.interior_weight(i);
    }
    row.reference = ref;
    if (row.xi.norm() == 0.0) {
      // constants cover the ξ = 0 mode
      std::complex<double> p = 0.0;
      for (long i = 0; i < g.num_nodes(); ++i) p += target[i] * g.interior_weight(i);
      row.probe = p;
    } else {
      // keep h|ξ| < 2 across the grid (the d = 2 fields are h-free anyway)
      const double hxi = std::min(h, 1.8 / row.xi.norm());
      const ZetaPair zp = make_zeta_pair_auto(row.xi, hxi);
      const CGOSolution s1 = build_cgo(c, g, zp, 1, opts);
      const CGOSolution s2 = build_cgo(c, g, zp, 2, opts);
      row.remainder1 = s1.remainder_norm;
      row.remainder2 = s2.remainder_norm;
      std::complex<double> p = 0.0;
      for (long i = 0; i < g.num_nodes(); ++i)
        p += target[i] * s1.interior[i] * s2.interior[i] * g.interior_weight(i);
      row.probe = p * std::exp(s1.scale_log + s2.scale_log);
    }
    rows[k] = row;
  }
  return rows;
}

}  // namespace mse
