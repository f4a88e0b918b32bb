#ifndef MSE_LINEARIZE_HPP
#define MSE_LINEARIZE_HPP

/*
 * First and second linearizations of the minimal-surface problem at u = 0,
 * the explicit adjoint solution, divided-difference extraction of
 * linearizations from the nonlinear solver, and the boundary/interior
 * integral identities up to order five.
 *
 * Conventions (admissible scenarios, at x_n = 0):
 *   b  = (n-1) ∇'c / (2c)                      convection field
 *   s_k = (n-1)/(2c) ∂^{k+1}_{x_n} c           source coefficients, k = 2,3,4
 *   first linearization:   (Δ + b·∇) v = 0,            v|∂Ω = f
 *   second linearization:  (Δ + b·∇) w = s_2 v_l v_a,  w|∂Ω = 0
 *   adjoint:               Δ v0 − ∇·(v0 b) = 0,        v0 = c(·,0)^{(n-1)/2}
 */

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mse/conformal.hpp"
#include "mse/forward.hpp"
#include "mse/grid.hpp"
#include "mse/linsolve.hpp"

namespace mse {

enum class LinForm { Convection, Conductivity };

/// Assembled linear operator on interior nodes with boundary coupling:
/// rows satisfy (A v_int) = rhs − B f for Dirichlet data f.
struct AssembledOp {
  SpMat A;  // interior x interior
  SpMat B;  // interior x boundary
};

/// Linearized operator data on a grid: convection field b(x'), conductivity
/// γ(x') = c(x',0) and the n = 3 equivalence flag.
struct LinearizedOperator {
  const ConformalFactor* c = nullptr;
  const Grid* grid = nullptr;
  bool n_equals_3 = false;
  AssembledOp assemble(LinForm form) const;
  AssembledOp assemble_transpose() const;   // Δ − ∇·(b ·)
  AssembledOp assemble_schrodinger() const; // Δ − q, q = Δ'√γ/√γ  (d = 2 path)
};

LinearizedOperator linearized_operator(const ConformalFactor& c, const Grid& g);

/// Solve L v = source with Dirichlet data (source may be null for zero).
ScalarField solve_dirichlet(const AssembledOp& op, const Grid& g, const BoundaryField& f,
                            const ScalarField* source, double rel_tol = 1e-12,
                            LinearReport* rep = nullptr);
ComplexField solve_dirichlet(const AssembledOp& op, const Grid& g,
                             const ComplexBoundaryField& f, const ComplexField* source,
                             double rel_tol = 1e-12, LinearReport* rep = nullptr);

/// First linearization with boundary data f_l (convection form by default;
/// the conductivity form is available for n = 3 cross-checks).
ScalarField solve_first_lin(const ConformalFactor& c, const Grid& g, const BoundaryField& f,
                            LinForm form = LinForm::Convection);

/// Explicit positive adjoint solution v0 = c(·,0)^{(n-1)/2}.
ScalarField adjoint_solution(const ConformalFactor& c, const Grid& g);
/// Discrete residual field Δ v0 − ∇·(v0 b) of the sampled adjoint solution.
ScalarField adjoint_residual(const ConformalFactor& c, const Grid& g);

/// Second linearization with homogeneous Dirichlet data.
ScalarField solve_second_lin(const ConformalFactor& c, const Grid& g, const ScalarField& v_l,
                             const ScalarField& v_a, LinForm form = LinForm::Convection);

/// Analytic third-linearization ladder (Δ+b·∇)T = s2 Σ w v + s3 Πv + Q, used
/// as a cross-check against the order-3 divided difference.
ScalarField solve_third_lin(const ConformalFactor& c, const Grid& g,
                            const std::array<ScalarField, 3>& v,
                            const std::array<ScalarField, 3>& w_pairs);  // w12, w13, w23

/// Apply the discrete operators to arbitrary fields (interior nodes).
ScalarField apply_convection(const ConformalFactor& c, const ScalarField& phi);
ScalarField apply_adjoint(const ConformalFactor& c, const ScalarField& phi);

struct EpsilonSchedule {
  std::vector<double> levels;   // dyadic amplitudes, descending
  int central_order = 2;        // symmetric ±ε stencils per direction
  static EpsilonSchedule dyadic(double eps0 = 1e-1, int nlevels = 7);
};

struct DividedDifference {
  int order = 0;
  std::vector<double> eps;                  // per level
  std::vector<ScalarField> interior;        // dd of the solution map
  std::vector<BoundaryField> dn;            // dd of the DN map
  std::vector<bool> level_ok;               // provenance: failed forward solves
  std::vector<std::string> level_note;
};

/// Central mixed divided differences of order m = directions.size() of the
/// solution and DN maps at ε = 0 (2^m forward solves per level, run in
/// parallel).
DividedDifference divided_difference(const ConformalFactor& c, const Grid& g,
                                     const std::vector<BoundaryField>& directions,
                                     const EpsilonSchedule& schedule, const NewtonConfig& cfg);

struct IdentityReport {
  double lhs = 0.0;       // ∮ v0 ∂_ν w dS
  double rhs = 0.0;       // ∫ s2 v0 v_l v_a dx'
  double residual = 0.0;  // relative
};

/// Integration-by-parts identity of the second linearization.
IdentityReport boundary_interior_identity(const ConformalFactor& c, const Grid& g,
                                          const ScalarField& v_l, const ScalarField& v_a);

struct HigherOrderReport {
  int order = 0;
  double eps = 0.0;
  double lhs = 0.0;             // ∮ v0 ∂_ν(dd_m u) dS
  double remainder = 0.0;       // ∫ v0 · (assembled lower-order terms)
  double top_implied = 0.0;     // lhs − remainder
  double top_truth = 0.0;       // ∫ v0 s_m Π v dx', s_m from the catalog
  double residual_abs = 0.0;
  double residual_rel = 0.0;
  double noise_floor = 0.0;     // h² + ε² + ε^{−m}·solver_tol budget
  bool within_budget = false;
};

/// Order-m identity (3 <= m <= 5): boundary functional of dd_m u versus the
/// top-coefficient integral plus the numerically assembled remainder.
HigherOrderReport verify_higher_order(const ConformalFactor& c, const Grid& g, int m,
                                      const std::vector<BoundaryField>& test_functions,
                                      double eps, const NewtonConfig& cfg,
                                      double budget_safety = 25.0);

/// Pairwise dyadic slopes log2(err_k/err_{k+1}) and the best minimum over a
/// window of three consecutive levels.
struct SlopeFit {
  std::vector<double> pairwise;
  double best3_min = 0.0;
};
SlopeFit dyadic_slopes(const std::vector<double>& errs);

}  // namespace mse

#endif
