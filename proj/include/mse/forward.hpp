#ifndef MSE_FORWARD_HPP
#define MSE_FORWARD_HPP

/*
 * Newton solution of the discretized minimal-surface boundary value problem
 * in the small-data regime, with exact analytic Jacobian, backtracking line
 * search, boundary-amplitude continuation and the simulated
 * Dirichlet-to-Neumann map.
 */

#include <optional>
#include <string>
#include <vector>

#include "mse/conformal.hpp"
#include "mse/grid.hpp"
#include "mse/linsolve.hpp"

namespace mse {

struct NewtonConfig {
  double residual_tolerance = 1e-11;  // sup norm of the discrete residual
  int max_iterations = 25;
  int max_backtracks = 20;            // halving line search
  int continuation_steps = 4;         // boundary amplitude ramp used on failure
  bool always_continue = false;       // take the ramp even if a direct solve would do
  double amplitude_limit = 0.05;      // delta gate in the surrogate norm
  bool enforce_amplitude_gate = true;
  double linear_rel_tol = 1e-12;
  std::optional<SolveMethod> method;  // default: LinearSolver::choose
};

enum class SolveStatus {
  Converged,
  RejectedAmplitude,
  LineSearchStalled,
  MaxIterations,
  LinearSolveFailed,
};

struct SolveResult {
  ScalarField u;
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  SolveStatus status = SolveStatus::Converged;
  bool near_singular_jacobian = false;
  int continuation_stages = 1;
  std::string diagnostic;
};

struct DNRecord {
  BoundaryField f;
  BoundaryField response;  // ∂_ν u_f
  double amplitude = 0.0;  // surrogate norm of f
  std::string scenario;
};

/// Discrete C^s surrogate: sup of boundary values and of first/second
/// tangential divided differences along every boundary face.
double boundary_surrogate_norm(const BoundaryField& f);

/// Discrete second-order jet at an interior node (centered stencils).
JetPoint interior_jet(const ScalarField& u, long node);

/// Pointwise residual of the discretized graph-form MSE at interior nodes
/// (boundary slots zero).
ScalarField graph_residual(const ConformalFactor& c, const ScalarField& u);
/// Same contract for the other two forms, using discrete jets.
ScalarField implicit_residual(const ConformalFactor& c, const ScalarField& u);
ScalarField divergence_residual(const ConformalFactor& c, const ScalarField& u);

SolveResult solve_mse(const ConformalFactor& c, const Grid& g, const BoundaryField& f,
                      const NewtonConfig& cfg);

DNRecord dn_map(const ConformalFactor& c, const Grid& g, const BoundaryField& f,
                const NewtonConfig& cfg);

struct AmplitudeSweepRow {
  double eps = 0.0;
  double sup_u = 0.0;
  double ratio = 0.0;  // sup_u / eps
  int iterations = 0;
  bool converged = false;
};

struct AmplitudeSweep {
  std::vector<AmplitudeSweepRow> rows;
  std::optional<double> first_failure;  // empirical edge of the contraction regime
};

AmplitudeSweep amplitude_sweep(const ConformalFactor& c, const Grid& g,
                               const BoundaryField& f_shape, const std::vector<double>& amplitudes,
                               const NewtonConfig& cfg);

}  // namespace mse

#endif
