#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mse/grid.hpp"

using namespace mse;

namespace {

Grid unit_square(int n) { return Grid(Domain{Vec{0.0, 0.0}, Vec{1.0, 1.0}}, n); }

}  // namespace

TEST_CASE("grid partition and metadata invariants") {
  const Grid g(Domain{Vec{-1.0, 0.5}, Vec{2.0, 1.5}}, std::vector<int>{11, 9});
  CHECK(g.num_nodes() == 99);
  CHECK(g.num_interior() + g.num_boundary() == g.num_nodes());
  CHECK(g.num_interior() == 9 * 7);
  CHECK(g.spacing(0) * (g.npts(0) - 1) == doctest::Approx(3.0).epsilon(1e-15));
  for (long b = 0; b < g.num_boundary(); ++b) {
    CHECK(g.boundary_normal(b).norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(Grid(Domain{Vec{0.0, 0.0}, Vec{1.0, 1.0}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(Grid(Domain{Vec{0.0, 0.0}, Vec{-1.0, 1.0}}, 9), std::invalid_argument);
}

TEST_CASE("stencils are exact on affine and quadratic fields") {
  const Grid g = unit_square(17);
  const Vec a{1.3, -0.7};
  const ScalarField aff = ScalarField::sample(g, [&](const Vec& x) { return a.dot(x) + 0.5; });
  const auto grad = gradient_fd(aff);
  const auto hess = hessian_fd(aff);
  for (long i = 0; i < g.num_nodes(); ++i) {
    CHECK(grad[0][i] == doctest::Approx(a[0]).epsilon(1e-12));
    CHECK(grad[1][i] == doctest::Approx(a[1]).epsilon(1e-12));
    for (int k = 0; k < 4; ++k) CHECK(std::abs(hess[k][i]) < 1e-11);
  }
  const ScalarField quad = ScalarField::sample(g, [](const Vec& x) { return x.dot(x); });
  const ScalarField lap = laplacian_fd(quad);
  for (long i = 0; i < g.num_nodes(); ++i) CHECK(lap[i] == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("laplacian second-order convergence on sin * sin") {
  auto err = [](int n) {
    const Grid g = unit_square(n);
    const ScalarField f =
        ScalarField::sample(g, [](const Vec& x) { return std::sin(x[0]) * std::sin(x[1]); });
    const ScalarField lap = laplacian_fd(f);
    double worst = 0.0;
    for (long i = 0; i < g.num_nodes(); ++i) {
      const Vec x = g.coords(i);
      worst = std::max(worst, std::abs(lap[i] + 2.0 * std::sin(x[0]) * std::sin(x[1])));
    }
    return worst;
  };
  const double e1 = err(33), e2 = err(65);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);
}

TEST_CASE("mixed second derivatives are symmetric and second order") {
  auto err = [](int n) {
    const Grid g = unit_square(n);
    const ScalarField f = ScalarField::sample(
        g, [](const Vec& x) { return std::exp(0.3 * x[0]) * std::sin(1.2 * x[1] + 0.4); });
    const auto hess = hessian_fd(f);
    double worst = 0.0;
    for (long i = 0; i < g.num_nodes(); ++i) {
      const Vec x = g.coords(i);
      const double exact = 0.3 * std::exp(0.3 * x[0]) * 1.2 * std::cos(1.2 * x[1] + 0.4);
      worst = std::max(worst, std::abs(hess[1][i] - exact));
      CHECK(hess[1][i] == hess[2][i]);
    }
    return worst;
  };
  const double e1 = err(17), e2 = err(33), e3 = err(65);
  CHECK(std::log2(e1 / e2) >= 1.8);
  CHECK(std::log2(e2 / e3) >= 1.8);
}

TEST_CASE("normal derivative examples") {
  const Grid g = unit_square(21);
  const Vec a{0.8, -1.1};
  const ScalarField aff = ScalarField::sample(g, [&](const Vec& x) { return a.dot(x); });
  const BoundaryField nd = normal_derivative(aff);
  for (long b = 0; b < g.num_boundary(); ++b) {
    const Vec nu = g.boundary_normal(b);
    CHECK(nd[b] == doctest::Approx(a.dot(nu)).epsilon(1e-11));
  }
  const ScalarField cst = ScalarField::sample(g, [](const Vec&) { return 3.14; });
  const BoundaryField ndc = normal_derivative(cst);
  for (long b = 0; b < g.num_boundary(); ++b) CHECK(std::abs(ndc[b]) < 1e-12);

  auto radial_err = [](int n) {
    const Grid gg = unit_square(n);
    const ScalarField r2 = ScalarField::sample(gg, [](const Vec& x) { return x.dot(x); });
    const BoundaryField ndr = normal_derivative(r2);
    double worst = 0.0;
    for (long b = 0; b < gg.num_boundary(); ++b) {
      const Vec x = gg.coords(gg.node_of_boundary(b));
      const Vec nu = gg.boundary_normal(b);
      worst = std::max(worst, std::abs(ndr[b] - 2.0 * x.dot(nu)));
    }
    return worst;
  };
  // quadratics are exact for the one-sided 3-point rule
  CHECK(radial_err(17) < 1e-11);
}

TEST_CASE("quadrature examples") {
  const Grid g = unit_square(33);
  const ScalarField one = ScalarField::sample(g, [](const Vec&) { return 1.0; });
  CHECK(integrate_interior(one) == doctest::Approx(1.0).epsilon(1e-13));
  const BoundaryField bone = BoundaryField::sample(g, [](const Vec&) { return 1.0; });
  CHECK(integrate_boundary(bone) == doctest::Approx(4.0).epsilon(1e-13));

  auto sin_err = [](int n) {
    const Grid gg = unit_square(n);
    const ScalarField f = ScalarField::sample(
        gg, [](const Vec& x) { return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]); });
    return std::abs(integrate_interior(f) - 4.0 / (M_PI * M_PI));
  };
  const double e1 = sin_err(33), e2 = sin_err(65);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);

  // antisymmetric about the center
  const ScalarField anti =
      ScalarField::sample(g, [](const Vec& x) { return (x[0] - 0.5) * (x[1] - 0.5) * (x[1] - 0.5) *
                                                       (x[0] - 0.5) * (x[0] - 0.5); });
  CHECK(std::abs(integrate_interior(anti)) < 1e-15);
}

TEST_CASE("discrete integration by parts defect is second order") {
  auto defect = [](int n) {
    const Grid g = unit_square(n);
    const ScalarField u = ScalarField::sample(
        g, [](const Vec& x) { return std::sin(x[0] + 0.3) * std::cos(1.3 * x[1]); });
    const ScalarField v = ScalarField::sample(
        g, [](const Vec& x) { return std::exp(0.4 * x[0]) * std::sin(0.9 * x[1] + 0.2); });
    const ScalarField lap = laplacian_fd(u);
    const auto gu = gradient_fd(u);
    const auto gv = gradient_fd(v);
    ScalarField integrand(g);
    for (long i = 0; i < g.num_nodes(); ++i)
      integrand[i] = lap[i] * v[i] + gu[0][i] * gv[0][i] + gu[1][i] * gv[1][i];
    const BoundaryField vtrace = trace(v);
    return std::abs(integrate_interior(integrand) - integrate_flux(u, vtrace));
  };
  const double d1 = defect(17), d2 = defect(33), d3 = defect(65);
  const double slope1 = std::log2(d1 / d2);
  const double slope2 = std::log2(d2 / d3);
  CHECK(slope1 >= 1.8);
  CHECK(slope2 >= 1.8);
}

TEST_CASE("3d grid boundary weights total the surface area") {
  const Grid g(Domain{Vec{0.0, 0.0, 0.0}, Vec{1.0, 2.0, 1.0}}, std::vector<int>{9, 11, 9});
  const BoundaryField one = BoundaryField::sample(g, [](const Vec&) { return 1.0; });
  // area = 2*(1*2 + 1*1 + 2*1) = 10
  CHECK(integrate_boundary(one) == doctest::Approx(10.0).epsilon(1e-12));
  const ScalarField onev = ScalarField::sample(g, [](const Vec&) { return 1.0; });
  CHECK(integrate_interior(onev) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("binary field round trip is exact") {
  const Grid g = unit_square(9);
  const ScalarField f = ScalarField::sample(g, [](const Vec& x) {
    return std::sin(17.0 * x[0]) * 1e-7 + x[1] * 1e9;
  });
  const std::string path = std::filesystem::temp_directory_path() / "mse_field_roundtrip.bin";
  write_binary(f, path);
  const ScalarField f2 = read_binary(g, path);
  for (long i = 0; i < g.num_nodes(); ++i) CHECK(f[i] == f2[i]);
  std::filesystem::remove(path);
}
