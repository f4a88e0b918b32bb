#ifndef MSE_CONFORMAL_HPP
#define MSE_CONFORMAL_HPP

/*
 * Conformally Euclidean geometry: the scalar factor c(x) with exact
 * derivatives, Christoffel symbols, the quasilinear form F(x',u,p,P) of the
 * minimal surface equation and its first derivatives, and the three
 * equivalent residual forms (graph, implicit, Riemannian divergence).
 */

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mse/analytic.hpp"
#include "mse/smallvec.hpp"

namespace mse {

/// Scenario parameters for the closed analytic catalog.
struct ScenarioParams {
  double alpha = 0.08;          // cubic-in-x_n amplitude
  double gamma = 0.5;           // quartic-in-x_n amplitude
  double beta_amp = 0.4;        // tangential bump amplitude of beta(x')
  double kappa = 1.0;           // constant level
  Vec bump_center{0.15, -0.10}; // center of the x'-bump (first base_dim entries used)
  double bump_width = 0.55;     // Gaussian width of the x'-bump
  Vec beta_center{-0.30, 0.25};
  double beta_width = 0.70;
  Vec exp_rate{0.30, -0.20};    // tangential exponential rates
};

/// Conformal factor c(x) > 0 on R^n with exact partial derivatives up to
/// max_derivative_order().  Instances come from the scenario catalog; the
/// admissibility flag records whether ∂_{x_n}c(x',0) = ∂²_{x_n}c(x',0) = 0.
class ConformalFactor {
 public:
  ConformalFactor(std::string id, int ambient_dim, int max_order, bool admissible,
                  SeparableSum c)
      : id_(std::move(id)),
        n_(ambient_dim),
        max_order_(max_order),
        admissible_(admissible),
        c_(std::move(c)) {}

  int dimension() const { return n_; }       // ambient n
  int base_dim() const { return n_ - 1; }    // d = n-1
  int max_derivative_order() const { return max_order_; }
  bool admissible() const { return admissible_; }
  const std::string& scenario() const { return id_; }

  /// Exact partial derivative; throws std::domain_error on non-positive c
  /// only where positivity is contractually required (christoffel, eval_F).
  double eval(const Vec& x, const MultiIndex& k) const { return c_.eval(x, k); }
  double value(const Vec& x) const { return c_(x); }
  double d1(const Vec& x, int i) const { return c_.eval(x, MultiIndex::unit(n_, i)); }
  double d2(const Vec& x, int i, int j) const {
    MultiIndex k = MultiIndex::zero(n_);
    k[i] += 1;
    k[j] += 1;
    return c_.eval(x, k);
  }

  /// lambda = 1/2 log c, derived on demand (never stored).
  double lambda(const Vec& x) const;
  /// ∂_i lambda = ∂_i c / (2c).
  double dlambda(const Vec& x, int i) const;

  /// Ambient point (x', x_n) from base point and height.
  Vec ambient(const Vec& xprime, double xn) const;

  /// Pure-normal derivative ∂^k_{x_n} c(x', 0).
  double normal_derivative_at_zero(const Vec& xprime, int k) const;

  /// Trace quantities at x_n = 0 used by the linearized problems.
  double boundary_value(const Vec& xprime) const;       // c(x',0)
  Vec tangential_gradient(const Vec& xprime) const;     // ∇'c(x',0)
  Vec convection(const Vec& xprime) const;              // b = (n-1)∇'c/(2c) at x_n=0
  double adjoint_weight(const Vec& xprime) const;       // v0 = c(x',0)^{(n-1)/2}
  double schrodinger_potential(const Vec& xprime) const;// q = Δ'√γ/√γ, γ = c(·,0)

 private:
  std::string id_;
  int n_;
  int max_order_;
  bool admissible_;
  SeparableSum c_;
};

/// Catalog factory.  Known ids: "constant", "exp-normal", "exp-tangential",
/// "bump-cubic", "bump-cubic-var", "quartic".  ambient_dim = n >= 3.
ConformalFactor make_scenario(const std::string& id, int ambient_dim,
                              const ScenarioParams& p = {});

/// Second-order jet of the unknown graph function at a base point.
struct JetPoint {
  Vec x;      // x' in R^{n-1}
  double u = 0.0;
  Vec p;      // gradient of u
  Mat P;      // Hessian of u (symmetric)
};

/// Christoffel symbols Γ^m_{ij} = ∂_iλ δ_{jm} + ∂_jλ δ_{im} − ∂_mλ δ_{ij}
/// of the conformal metric at an ambient point.  Symmetric in (i,j).
struct Christoffel {
  std::array<double, kMaxDim * kMaxDim * kMaxDim> g{};
  int n = 0;
  double operator()(int m, int i, int j) const { return g[(m * kMaxDim + i) * kMaxDim + j]; }
  double& at(int m, int i, int j) { return g[(m * kMaxDim + i) * kMaxDim + j]; }
};
Christoffel christoffel(const ConformalFactor& c, const Vec& x_ambient);

/// F(x',u,p,P) of the minimal surface equation (graph form).
double eval_F(const ConformalFactor& c, const JetPoint& jet);

/// First derivatives of F with respect to (u, p, P) at a jet; these assemble
/// the exact Newton Jacobian and the linearized operators.
struct FDerivatives {
  double Fu = 0.0;
  Vec Fp;
  Mat FP;
};
FDerivatives dF(const ConformalFactor& c, const JetPoint& jet);

/// The three pointwise residual forms evaluated on an exact jet.
double graph_residual_at(const ConformalFactor& c, const JetPoint& jet);
double implicit_residual_at(const ConformalFactor& c, const JetPoint& jet);
double divergence_residual_at(const ConformalFactor& c, const JetPoint& jet);

/// Classical Euclidean MSE residual −div(∇u/√(1+|∇u|²))·(1+|∇u|²)^{1/2},
/// used for the c ≡ 1 reduction check.
double euclidean_residual_at(const JetPoint& jet);

/// Numeric admissibility check over a set of base points: returns the max of
/// |∂_{x_n}c(x',0)| and |∂²_{x_n}c(x',0)|.
double admissibility_defect(const ConformalFactor& c, const std::vector<Vec>& xprimes);

}  // namespace mse

#endif
