#ifndef MSE_TESTS_ORACLES_HPP
#define MSE_TESTS_ORACLES_HPP

/*
 * Shared test oracles, independent of the implementation paths they check:
 * high-order central differences for derivative claims and a few manufactured
 * fields.  Expected values asserted in the suites were computed with these.
 */

#include <cmath>
#include <functional>
#include <random>

#include "mse/conformal.hpp"

namespace mse::testing {

/// Fourth-order central difference d/dt at t (error O(step^4)).
inline double fd1(const std::function<double(double)>& f, double t, double step = 1e-3) {
  return (f(t - 2 * step) - 8 * f(t - step) + 8 * f(t + step) - f(t + 2 * step)) / (12 * step);
}

/// Finite-difference partial derivative of a multivariate function along one
/// axis, used to cross-check the exact analytic derivatives.
inline double fd_partial(const std::function<double(const Vec&)>& f, Vec x, int axis,
                         double step = 1e-3) {
  return fd1([&](double t) {
    Vec y = x;
    y[axis] = t;
    return f(y);
  }, x[axis], step);
}

/// Random jet with bounded entries (symmetric Hessian).
inline JetPoint random_jet(int d, std::mt19937_64& rng, double scale = 0.8) {
  std::uniform_real_distribution<double> U(-scale, scale);
  JetPoint j;
  j.x = Vec::zero(d);
  j.p = Vec::zero(d);
  j.P = Mat::zero(d);
  for (int a = 0; a < d; ++a) j.x[a] = U(rng);
  j.u = 0.4 * U(rng);
  for (int a = 0; a < d; ++a) j.p[a] = U(rng);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) j.P(a, b) = j.P(b, a) = U(rng);
  return j;
}

}  // namespace mse::testing

#endif
