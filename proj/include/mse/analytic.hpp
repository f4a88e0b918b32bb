#ifndef MSE_ANALYTIC_HPP
#define MSE_ANALYTIC_HPP

/*
 * Closed algebra of 1-D analytic factors p(t)·e^{αt}·e^{−(t−μ)²/(2s²)} and
 * separable sums of their tensor products.  The family is closed under
 * differentiation, so partial derivatives of any catalog function are exact
 * to machine precision at every order.
 */

#include <functional>
#include <vector>

#include "mse/smallvec.hpp"

namespace mse {

/// One-dimensional factor p(t) * exp(alpha t) * exp(-(t-mu)^2 / (2 s^2)).
/// inv_s2 == 0 disables the Gaussian part.
class Factor1D {
 public:
  Factor1D() : poly_{1.0} {}

  static Factor1D constant(double c) { return Factor1D(std::vector<double>{c}, 0.0, 0.0, 0.0); }
  static Factor1D polynomial(std::vector<double> coeffs_ascending) {
    return Factor1D(std::move(coeffs_ascending), 0.0, 0.0, 0.0);
  }
  static Factor1D monomial(int k, double scale = 1.0) {
    std::vector<double> c(k + 1, 0.0);
    c[k] = scale;
    return Factor1D(std::move(c), 0.0, 0.0, 0.0);
  }
  static Factor1D exponential(double alpha) { return Factor1D({1.0}, alpha, 0.0, 0.0); }
  static Factor1D gaussian(double mu, double sigma) {
    return Factor1D({1.0}, 0.0, mu, 1.0 / (sigma * sigma));
  }

  double operator()(double t) const;

  /// Exact derivative; stays in the family.
  Factor1D derivative() const;

  const std::vector<double>& poly() const { return poly_; }

 private:
  Factor1D(std::vector<double> p, double alpha, double mu, double inv_s2)
      : poly_(std::move(p)), alpha_(alpha), mu_(mu), inv_s2_(inv_s2) {}

  std::vector<double> poly_;  // ascending coefficients
  double alpha_ = 0.0;
  double mu_ = 0.0;
  double inv_s2_ = 0.0;
};

/// Analytic function on R^dim written as sum_k coef_k * prod_a f_{k,a}(x_a),
/// with derivative chains cached up to max_order per axis.
class SeparableSum {
 public:
  SeparableSum(int dim, int max_order) : dim_(dim), max_order_(max_order) {}

  void add_term(double coef, std::vector<Factor1D> factors);

  /// Exact partial derivative  ∂^deriv f(x).  Requires deriv[a] <= max_order.
  double eval(const Vec& x, const MultiIndex& deriv) const;
  double operator()(const Vec& x) const { return eval(x, MultiIndex::zero(dim_)); }

  int dim() const { return dim_; }
  int max_order() const { return max_order_; }

 private:
  struct Term {
    double coef;
    // chain[a][k] = k-th derivative of the axis-a factor
    std::vector<std::vector<Factor1D>> chain;
  };
  int dim_;
  int max_order_;
  std::vector<Term> terms_;
};

/// Value, gradient and Hessian of a scalar function at a point.
struct Jet2 {
  double u = 0.0;
  Vec grad;
  Mat hess;
};

/// Analytic surface-height providers u(x') used by the residual cross-checks;
/// these supply exact derivatives so algebraic identities are tested free of
/// discretization error.
class AnalyticField {
 public:
  virtual ~AnalyticField() = default;
  virtual Jet2 jet(const Vec& x) const = 0;
  double value(const Vec& x) const { return jet(x).u; }
};

/// u built from a SeparableSum (polynomials, gaussians, ...).
class SeparableField : public AnalyticField {
 public:
  explicit SeparableField(SeparableSum f) : f_(std::move(f)) {}
  Jet2 jet(const Vec& x) const override;

 private:
  SeparableSum f_;
};

/// Scherk's surface sample log(cos x1 / cos x2) on (-pi/2, pi/2)^2.
class ScherkField : public AnalyticField {
 public:
  explicit ScherkField(double scale = 1.0) : scale_(scale) {}
  Jet2 jet(const Vec& x) const override;

 private:
  double scale_;
};

/// Affine field a·x + b.
class AffineField : public AnalyticField {
 public:
  AffineField(const Vec& a, double b) : a_(a), b_(b) {}
  Jet2 jet(const Vec& x) const override;

 private:
  Vec a_;
  double b_;
};

/// Random polynomial of total degree <= 3 with seeded coefficients, for
/// property tests over u-jets.
SeparableSum random_cubic_polynomial(int dim, unsigned seed, double amplitude = 0.5);

}  // namespace mse

#endif
