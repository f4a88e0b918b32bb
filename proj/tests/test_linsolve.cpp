#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "mse/linsolve.hpp"

using namespace mse;

namespace {

/// 2-D convection-diffusion matrix on an n x n interior grid (5-point).
SpMat model_matrix(int n, double conv) {
  const int N = n * n;
  std::vector<Eigen::Triplet<double>> t;
  const double h = 1.0 / (n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int row = i * n + j;
      t.emplace_back(row, row, -4.0 / (h * h));
      if (i > 0) t.emplace_back(row, row - n, 1.0 / (h * h) - conv / (2 * h));
      if (i + 1 < n) t.emplace_back(row, row + n, 1.0 / (h * h) + conv / (2 * h));
      if (j > 0) t.emplace_back(row, row - 1, 1.0 / (h * h));
      if (j + 1 < n) t.emplace_back(row, row + 1, 1.0 / (h * h));
    }
  SpMat A(N, N);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

}  // namespace

TEST_CASE("direct solve honors the relative residual contract") {
  const SpMat A = model_matrix(40, 0.8);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N01;
  Eigen::VectorXd b(A.rows());
  for (int i = 0; i < b.size(); ++i) b[i] = N01(rng);
  LinearSolver solver(A, SolveMethod::Direct);
  LinearReport rep;
  const Eigen::VectorXd x = solver.solve(b, &rep);
  CHECK(rep.ok);
  CHECK(rep.rel_residual <= 1e-12);
  CHECK((b - A * x).norm() / b.norm() <= 1e-12);
}

TEST_CASE("krylov + ILU fallback meets the same contract") {
  const SpMat A = model_matrix(40, 2.0);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(A.rows());
  LinearSolver solver(A, SolveMethod::KrylovILU);
  LinearReport rep;
  const Eigen::VectorXd x = solver.solve(b, &rep);
  CHECK(rep.ok);
  CHECK((b - A * x).norm() / b.norm() <= 1e-12);
}

TEST_CASE("complex right-hand sides reuse the factorization") {
  const SpMat A = model_matrix(25, 0.0);
  Eigen::VectorXcd b(A.rows());
  for (int i = 0; i < b.size(); ++i) b[i] = std::complex<double>(std::sin(0.1 * i), std::cos(0.2 * i));
  LinearSolver solver(A, SolveMethod::Direct);
  LinearReport rep;
  const Eigen::VectorXcd x = solver.solve_complex(b, &rep);
  CHECK(rep.ok);
  CHECK((b - A.cast<std::complex<double>>() * x).norm() / b.norm() <= 1e-12);
}

TEST_CASE("singular systems are flagged, not silently accepted") {
  std::vector<Eigen::Triplet<double>> t;
  t.emplace_back(0, 0, 1.0);
  t.emplace_back(1, 0, 1.0);  // rank deficient 2x2
  SpMat A(2, 2);
  A.setFromTriplets(t.begin(), t.end());
  LinearSolver solver(A, SolveMethod::Direct);
  LinearReport rep;
  Eigen::VectorXd b(2);
  b << 1.0, 2.0;
  const Eigen::VectorXd x = solver.solve(b, &rep);
  CHECK((!solver.factorization_ok() || rep.near_singular));
}

TEST_CASE("solves are deterministic") {
  const SpMat A = model_matrix(30, 1.3);
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(A.rows(), -1.0, 2.0);
  LinearSolver s1(A, SolveMethod::Direct);
  LinearSolver s2(A, SolveMethod::Direct);
  const Eigen::VectorXd x1 = s1.solve(b);
  const Eigen::VectorXd x2 = s2.solve(b);
  for (int i = 0; i < x1.size(); ++i) CHECK(x1[i] == x2[i]);
}

TEST_CASE("method choice: direct at desk scale, krylov for large 3-D") {
  CHECK(LinearSolver::choose(66049, 2) == SolveMethod::Direct);
  CHECK(LinearSolver::choose(29791, 3) == SolveMethod::KrylovILU);
  CHECK(LinearSolver::choose(3375, 3) == SolveMethod::Direct);
}
