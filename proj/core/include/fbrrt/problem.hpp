#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fbrrt/types.hpp"

namespace fbrrt {

using DriftFn = std::function<Vector(double t, const Vector& x, const Vector& u)>;
using StateMatrixFn = std::function<Matrix(double t, const Vector& x)>;
using RunningCostFn = std::function<double(double t, const Vector& x, const Vector& u)>;
using TerminalCostFn = std::function<double(const Vector& x)>;

/// Shape of the running cost in u; selects the closed-form policy minimizer.
enum class ControlCost {
  kL1,         ///< control_weight * sum_k |u_k|
  kQuadratic,  ///< 0.5 * control_weight * |u|^2
};

/**
 * Stochastic optimal control problem
 *
 *   dX = f(t, X, u) dt + sigma(t, X) dW,   J = E[ int_0^T l(t, X, u) dt + g(X_T) ]
 *
 * with control-affine drift f = a(t, x) + B(t, x) u, box-constrained controls,
 * and a quadratic terminal cost g(x) = sum_j c_j x_j^2.
 */
struct SocProblem {
  std::string name;
  int state_dim = 0;
  int control_dim = 0;
  double horizon = 1.0;

  DriftFn drift;
  StateMatrixFn control_matrix;  // B(t, x), n x m
  StateMatrixFn diffusion;
  StateMatrixFn diffusion_inverse;
  RunningCostFn running_cost;
  TerminalCostFn terminal_cost;

  ControlCost control_cost = ControlCost::kL1;
  double control_weight = 1.0;
  Vector terminal_weights;

  Box control_box;
  std::vector<Vector> exploration_controls;
  Vector initial_state;
  /// Default region of interest for basis normalization and RRT sampling.
  Box region_of_interest;

  /// Structural checks: dimensions agree, exploration controls lie in the box.
  void validate() const;
};

/// Rebuilds running_cost / terminal_cost from the given weights.
void set_cost_weights(SocProblem& problem, double control_weight, const Vector& terminal_weights);

/// Closed-form optimal value and policy of the scalar LQR problem.
struct AnalyticLqr {
  double sigma = 0.2;
  double horizon = 1.0;

  double alpha(double t) const;
  /// beta(T) = 0, beta' = -sigma^2 alpha.
  double beta(double t) const;
  double value(double t, double x) const { return alpha(t) * x * x + beta(t); }
  double policy(double t, double x) const { return -2.0 * alpha(t) * x; }
};

SocProblem make_double_integrator();
SocProblem make_double_pendulum();
SocProblem make_quadcopter();
std::pair<SocProblem, AnalyticLqr> make_scalar_lqr();

/// Problem lookup by CLI name: lqr1d, double_integrator, double_pendulum, quadcopter.
SocProblem make_problem(std::string_view name);
std::vector<std::string> problem_names();

/// argmin_{u in U} l(t, x, u) + f(t, x, u)^T value_gradient, in closed form for the
/// problem's control-cost family. Ties at |b_k| = control_weight resolve to u_k = 0.
Vector argmin_policy(const SocProblem& problem, double t, const Vector& x,
                     const Vector& value_gradient);

/// Objective minimized by argmin_policy; exposed for oracle checks.
double policy_objective(const SocProblem& problem, double t, const Vector& x,
                        const Vector& value_gradient, const Vector& u);

}  // namespace fbrrt
