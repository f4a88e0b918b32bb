#include "mse/analytic.hpp"

#include <cmath>
#include <random>

namespace mse {

double Factor1D::operator()(double t) const {
  double p = 0.0;
  for (int i = static_cast<int>(poly_.size()) - 1; i >= 0; --i) p = p * t + poly_[i];
  double e = alpha_ * t;
  if (inv_s2_ != 0.0) {
    const double d = t - mu_;
    e -= 0.5 * d * d * inv_s2_;
  }
  return p * std::exp(e);
}

Factor1D Factor1D::derivative() const {
  // (p e^{αt} e^{-(t-μ)²/2s²})' = [p' + p(α + μ/s² - t/s²)] e^{...}
  const int np = static_cast<int>(poly_.size());
  std::vector<double> q(np + 1, 0.0);
  for (int i = 1; i < np; ++i) q[i - 1] += i * poly_[i];
  const double c0 = alpha_ + mu_ * inv_s2_;
  for (int i = 0; i < np; ++i) {
    q[i] += c0 * poly_[i];
    q[i + 1] -= inv_s2_ * poly_[i];
  }
  while (q.size() > 1 && q.back() == 0.0) q.pop_back();
  return Factor1D(std::move(q), alpha_, mu_, inv_s2_);
}

void SeparableSum::add_term(double coef, std::vector<Factor1D> factors) {
  Term t;
  t.coef = coef;
  t.chain.resize(dim_);
  for (int a = 0; a < dim_; ++a) {
    t.chain[a].reserve(max_order_ + 1);
    t.chain[a].push_back(factors[a]);
    for (int k = 1; k <= max_order_; ++k) t.chain[a].push_back(t.chain[a].back().derivative());
  }
  terms_.push_back(std::move(t));
}

double SeparableSum::eval(const Vec& x, const MultiIndex& deriv) const {
  double sum = 0.0;
  for (const Term& t : terms_) {
    double prod = t.coef;
    for (int a = 0; a < dim_; ++a) prod *= t.chain[a][deriv[a]](x[a]);
    sum += prod;
  }
  return sum;
}

Jet2 SeparableField::jet(const Vec& x) const {
  Jet2 j;
  const int d = f_.dim();
  j.u = f_(x);
  j.grad = Vec::zero(d);
  j.hess = Mat::zero(d);
  for (int a = 0; a < d; ++a) {
    j.grad[a] = f_.eval(x, MultiIndex::unit(d, a));
    for (int b = a; b < d; ++b) {
      MultiIndex k = MultiIndex::zero(d);
      k[a] += 1;
      k[b] += 1;
      const double v = f_.eval(x, k);
      j.hess(a, b) = v;
      j.hess(b, a) = v;
    }
  }
  return j;
}

Jet2 ScherkField::jet(const Vec& x) const {
  // u = s (log cos x1 - log cos x2)
  Jet2 j;
  j.grad = Vec::zero(2);
  j.hess = Mat::zero(2);
  const double t1 = std::tan(x[0]);
  const double t2 = std::tan(x[1]);
  j.u = scale_ * (std::log(std::cos(x[0])) - std::log(std::cos(x[1])));
  j.grad[0] = -scale_ * t1;
  j.grad[1] = scale_ * t2;
  j.hess(0, 0) = -scale_ * (1.0 + t1 * t1);
  j.hess(1, 1) = scale_ * (1.0 + t2 * t2);
  return j;
}

Jet2 AffineField::jet(const Vec& x) const {
  Jet2 j;
  j.u = b_ + a_.dot(x);
  j.grad = a_;
  j.hess = Mat::zero(x.dim());
  return j;
}

SeparableSum random_cubic_polynomial(int dim, unsigned seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-amplitude, amplitude);
  SeparableSum f(dim, 8);
  // all monomials x^k with total degree <= 3
  std::vector<MultiIndex> mons;
  MultiIndex k = MultiIndex::zero(dim);
  std::function<void(int, int)> rec = [&](int axis, int budget) {
    if (axis == dim) {
      mons.push_back(k);
      return;
    }
    for (int e = 0; e <= budget; ++e) {
      k[axis] = e;
      rec(axis + 1, budget - e);
    }
    k[axis] = 0;
  };
  rec(0, 3);
  for (const MultiIndex& m : mons) {
    std::vector<Factor1D> fac;
    for (int a = 0; a < dim; ++a) fac.push_back(Factor1D::monomial(m[a]));
    f.add_term(coef(rng), std::move(fac));
  }
  return f;
}

}  // namespace mse
