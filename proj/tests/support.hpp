#pragma once

#include <random>

#include "fbrrt/basis.hpp"
#include "fbrrt/problem.hpp"
#include "fbrrt/types.hpp"

namespace fbrrt::testing {

inline Vector uniform_in(const Box& box, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(box.dim());
  for (int j = 0; j < box.dim(); ++j) x(j) = box.lower(j) + (box.upper(j) - box.lower(j)) * u(rng);
  return x;
}

inline Vector normal_vector(int n, double scale, Rng& rng) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (int j = 0; j < n; ++j) v(j) = g(rng);
  return v;
}

/// Coefficients of a x^2 + b in a one-dimensional basis (exact, since x^2 is in the span).
inline Vector quadratic_alpha(const ChebyshevBasis& basis, double a, double b) {
  const double o = basis.offset()(0), s = basis.scale()(0);
  Vector alpha(3);
  alpha << a * (o * o + 0.5 * s * s) + b, 2.0 * a * o * s, 0.5 * a * s * s;
  return alpha;
}

/// The analytic LQR value V*(t_i, x) stored at every step 0..N.
inline ValueModel analytic_lqr_model(const ChebyshevBasis& basis, const AnalyticLqr& lqr,
                                     int steps) {
  ValueModel model(basis, steps);
  for (int i = 0; i <= steps; ++i) {
    const double t = lqr.horizon * i / steps;
    model.set(i, quadratic_alpha(basis, lqr.alpha(t), lqr.beta(t)));
  }
  return model;
}

}  // namespace fbrrt::testing
