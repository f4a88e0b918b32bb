#ifndef MSE_LINSOLVE_HPP
#define MSE_LINSOLVE_HPP

/*
 * Sparse linear solves behind a fixed accuracy contract: every solve must
 * reach relative residual <= rel_tol (default 1e-12), enforced by iterative
 * refinement on top of either a direct factorization (2-D problems) or
 * ILU-preconditioned BiCGSTAB (3-D fallback).  Near-singular systems are
 * flagged, not assumed away.
 */

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>
#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace mse {

using SpMat = Eigen::SparseMatrix<double>;

enum class SolveMethod { Direct, KrylovILU };

struct LinearReport {
  bool ok = false;
  double rel_residual = 0.0;
  int refine_steps = 0;
  bool near_singular = false;
  std::string note;
};

class LinearSolver {
 public:
  LinearSolver(SpMat A, SolveMethod method, double rel_tol = 1e-12);

  Eigen::VectorXd solve(const Eigen::VectorXd& b, LinearReport* rep = nullptr) const;
  Eigen::VectorXcd solve_complex(const Eigen::VectorXcd& b, LinearReport* rep = nullptr) const;

  SolveMethod method() const { return method_; }
  bool factorization_ok() const { return factored_; }

  /// Direct for 2-D desk-scale systems, Krylov+ILU for large 3-D ones.
  static SolveMethod choose(long unknowns, int base_dim);

 private:
  Eigen::VectorXd solve_once(const Eigen::VectorXd& b) const;

  SpMat A_;
  SolveMethod method_;
  double rel_tol_;
  bool factored_ = false;
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
  std::unique_ptr<Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>>> krylov_;
};

}  // namespace mse

#endif
