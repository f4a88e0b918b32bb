#include "mse/linsolve.hpp"

namespace mse {

LinearSolver::LinearSolver(SpMat A, SolveMethod method, double rel_tol)
    : A_(std::move(A)), method_(method), rel_tol_(rel_tol) {
  A_.makeCompressed();
  if (method_ == SolveMethod::Direct) {
    lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu_->compute(A_);
    factored_ = (lu_->info() == Eigen::Success);
  } else {
    krylov_ = std::make_unique<Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>>>();
    krylov_->preconditioner().setFillfactor(12);
    krylov_->preconditioner().setDroptol(1e-5);
    krylov_->setTolerance(rel_tol_ * 0.1);
    krylov_->setMaxIterations(4000);
    krylov_->compute(A_);
    factored_ = (krylov_->info() == Eigen::Success);
  }
}

SolveMethod LinearSolver::choose(long unknowns, int base_dim) {
  if (base_dim >= 3 && unknowns > 20000) return SolveMethod::KrylovILU;
  return SolveMethod::Direct;
}

Eigen::VectorXd LinearSolver::solve_once(const Eigen::VectorXd& b) const {
  if (method_ == SolveMethod::Direct) return lu_->solve(b);
  return krylov_->solve(b);
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b, LinearReport* rep) const {
  LinearReport local;
  if (!factored_) {
    local.near_singular = true;
    local.note = "factorization failed";
    if (rep) *rep = local;
    return Eigen::VectorXd::Zero(b.size());
  }
  const double bnorm = b.norm();
  Eigen::VectorXd x = solve_once(b);
  if (bnorm == 0.0) {
    local.ok = true;
    if (rep) *rep = local;
    return Eigen::VectorXd::Zero(b.size());
  }
  Eigen::VectorXd r = b - A_ * x;
  local.rel_residual = r.norm() / bnorm;
  // iterative refinement until the accuracy contract holds
  for (int k = 0; k < 4 && local.rel_residual > rel_tol_; ++k) {
    x += solve_once(r);
    r = b - A_ * x;
    local.rel_residual = r.norm() / bnorm;
    ++local.refine_steps;
  }
  local.ok = (local.rel_residual <= rel_tol_);
  local.near_singular = !local.ok;
  if (!local.ok) local.note = "relative residual contract not met";
  if (rep) *rep = local;
  return x;
}

Eigen::VectorXcd LinearSolver::solve_complex(const Eigen::VectorXcd& b, LinearReport* rep) const {
  LinearReport r1, r2;
  const Eigen::VectorXd xr = solve(Eigen::VectorXd(b.real()), &r1);
  const Eigen::VectorXd xi = solve(Eigen::VectorXd(b.imag()), &r2);
  if (rep) {
    rep->ok = r1.ok && r2.ok;
    rep->rel_residual = std::max(r1.rel_residual, r2.rel_residual);
    rep->refine_steps = r1.refine_steps + r2.refine_steps;
    rep->near_singular = r1.near_singular || r2.near_singular;
    rep->note = r1.note.empty() ? r2.note : r1.note;
  }
  Eigen::VectorXcd x(b.size());
  x.real() = xr;
  x.imag() = xi;
  return x;
}

}  // namespace mse
