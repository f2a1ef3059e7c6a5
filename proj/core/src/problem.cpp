#include "fbrrt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fbrrt {
namespace {

Vector diag_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Constant diagonal diffusion; returns (sigma, sigma^{-1}) closures.
std::pair<StateMatrixFn, StateMatrixFn> constant_diagonal(const Vector& entries) {
  Matrix sigma = entries.asDiagonal();
  Matrix sigma_inv = entries.cwiseInverse().asDiagonal();
  return {[sigma](double, const Vector&) { return sigma; },
          [sigma_inv](double, const Vector&) { return sigma_inv; }};
}

Box symmetric_box(int dim, double bound) {
  return Box{Vector::Constant(dim, -bound), Vector::Constant(dim, bound)};
}

std::vector<Vector> l1_exploration_controls(int control_dim) {
  // Vertices of {-1, 0, 1}^m.
  std::vector<Vector> controls;
  int count = 1;
  for (int k = 0; k < control_dim; ++k) count *= 3;
  for (int code = 0; code < count; ++code) {
    Vector u(control_dim);
    int c = code;
    for (int k = 0; k < control_dim; ++k) {
      u(k) = static_cast<double>(c % 3) - 1.0;
      c /= 3;
    }
    controls.push_back(std::move(u));
  }
  return controls;
}

struct PendulumParams {
  double d0 = 10.0;
  double d1 = 0.37;
  double d2 = 0.14;
  double d3 = 0.14;
  double f1 = 4.9;
  double f2 = 5.5;
  double f3 = 0.1;
  double f4 = 0.1;
};

}  // namespace

void SocProblem::validate() const {
  if (state_dim <= 0 || control_dim <= 0) {
    throw std::invalid_argument(name + ": state and control dimensions must be positive");
  }
  if (!(horizon > 0.0)) throw std::invalid_argument(name + ": horizon must be positive");
  if (!drift || !control_matrix || !diffusion || !diffusion_inverse || !running_cost ||
      !terminal_cost) {
    throw std::invalid_argument(name + ": problem functions must all be set");
  }
  if (initial_state.size() != state_dim) {
    throw std::invalid_argument(name + ": initial state has wrong dimension");
  }
  if (terminal_weights.size() != state_dim) {
    throw std::invalid_argument(name + ": terminal weights have wrong dimension");
  }
  control_box.validate();
  region_of_interest.validate();
  if (control_box.dim() != control_dim || region_of_interest.dim() != state_dim) {
    throw std::invalid_argument(name + ": box dimensions disagree with the problem");
  }
  if (exploration_controls.empty()) {
    throw std::invalid_argument(name + ": exploration control set is empty");
  }
  for (const Vector& u : exploration_controls) {
    if (!control_box.contains(u)) {
      throw std::invalid_argument(name + ": exploration control outside the control box");
    }
  }
}

void set_cost_weights(SocProblem& problem, double control_weight, const Vector& terminal_weights) {
  if (!(control_weight > 0.0) || !std::isfinite(control_weight)) {
    throw std::invalid_argument("control cost weight must be positive");
  }
  if (terminal_weights.size() != problem.state_dim || (terminal_weights.array() < 0.0).any()) {
    throw std::invalid_argument("terminal weights must be nonnegative, one per state");
  }
  problem.control_weight = control_weight;
  problem.terminal_weights = terminal_weights;
  if (problem.control_cost == ControlCost::kL1) {
    problem.running_cost = [control_weight](double, const Vector&, const Vector& u) {
      return control_weight * u.lpNorm<1>();
    };
  } else {
    problem.running_cost = [control_weight](double, const Vector&, const Vector& u) {
      return 0.5 * control_weight * u.squaredNorm();
    };
  }
  problem.terminal_cost = [terminal_weights](const Vector& x) {
    return terminal_weights.dot(x.cwiseAbs2());
  };
}

double AnalyticLqr::alpha(double t) const {
  return 1.0 / (std::exp(-2.0 * (horizon - t)) + 1.0);
}

double AnalyticLqr::beta(double t) const {
  // Integral of sigma^2 alpha(s) over [t, T].
  return 0.5 * sigma * sigma * std::log(0.5 + 0.5 * std::exp(2.0 * (horizon - t)));
}

SocProblem make_double_integrator() {
  SocProblem p;
  p.name = "double_integrator";
  p.state_dim = 2;
  p.control_dim = 1;
  p.horizon = 4.0;
  p.drift = [](double, const Vector& x, const Vector& u) {
    Vector dx(2);
    dx << x(1), u(0);
    return dx;
  };
  p.control_matrix = [](double, const Vector&) {
    Matrix b = Matrix::Zero(2, 1);
    b(1, 0) = 1.0;
    return b;
  };
  std::tie(p.diffusion, p.diffusion_inverse) = constant_diagonal(diag_vector({0.01, 0.1}));
  p.control_cost = ControlCost::kL1;
  p.control_box = symmetric_box(1, 1.0);
  p.exploration_controls = l1_exploration_controls(1);
  p.initial_state = diag_vector({1.0, 0.5});
  p.region_of_interest = Box{diag_vector({-2.0, -2.0}), diag_vector({2.0, 2.0})};
  set_cost_weights(p, 1.0, Vector::Ones(2));
  return p;
}

SocProblem make_double_pendulum() {
  const PendulumParams k;
  SocProblem p;
  p.name = "double_pendulum";
  p.state_dim = 4;
  p.control_dim = 1;
  p.horizon = 0.3;
  // State (alpha, beta, omega, psi): joint angles and their rates.
  p.drift = [k](double, const Vector& x, const Vector& u) {
    const double a = x(0), b = x(1), w = x(2), s = x(3);
    const double sb = std::sin(b), cb = std::cos(b);
    const double sab = std::sin(a + b), sa = std::sin(a);
    const double first = k.d2 * s * s * sb + 2.0 * k.d2 * w * s * sb - k.f3 * w +
                         k.f2 * sab - k.f1 * sa;
    const double second = k.d2 * w * w * sb + k.f4 * s - k.f2 * sab;
    const double den = k.d1 * k.d3 + 2.0 * k.d2 * k.d3 * cb - k.d2 * k.d2 * cb * cb;
    Vector dx(4);
    dx(0) = w;
    dx(1) = s;
    dx(2) = (k.d3 * first + k.d2 * cb * second + k.d0 * k.d3 * u(0)) / den;
    dx(3) = (-(k.d1 + 2.0 * k.d2 * cb) * second - k.d2 * cb * first - k.d0 * k.d2 * cb * u(0)) /
            den;
    return dx;
  };
  p.control_matrix = [k](double, const Vector& x) {
    const double cb = std::cos(x(1));
    const double den = k.d1 * k.d3 + 2.0 * k.d2 * k.d3 * cb - k.d2 * k.d2 * cb * cb;
    Matrix bm = Matrix::Zero(4, 1);
    bm(2, 0) = k.d0 * k.d3 / den;
    bm(3, 0) = -k.d0 * k.d2 * cb / den;
    return bm;
  };
  std::tie(p.diffusion, p.diffusion_inverse) =
      constant_diagonal(diag_vector({0.03, 0.03, 0.18, 0.18}));
  p.control_cost = ControlCost::kL1;
  p.control_box = symmetric_box(1, 1.0);
  p.exploration_controls = l1_exploration_controls(1);
  p.initial_state = diag_vector({std::numbers::pi / 10.0, std::numbers::pi / 10.0, 0.0, 0.0});
  p.region_of_interest =
      Box{diag_vector({-1.0, -1.0, -4.0, -4.0}), diag_vector({1.0, 1.0, 4.0, 4.0})};
  set_cost_weights(p, 1.0, Vector::Ones(4));
  return p;
}

SocProblem make_quadcopter() {
  constexpr double kTorqueGain = 4.1;
  constexpr double kGravity = 9.8;
  SocProblem p;
  p.name = "quadcopter";
  p.state_dim = 8;
  p.control_dim = 2;
  p.horizon = 2.0;
  // State (phi, theta, p, q, u, v, x, y); control (tau_x, tau_y).
  p.drift = [](double, const Vector& x, const Vector& u) {
    Vector dx(8);
    dx << x(2), x(3), kTorqueGain * u(0), kTorqueGain * u(1), -kGravity * x(1),
        kGravity * x(0), x(4), x(5);
    return dx;
  };
  p.control_matrix = [](double, const Vector&) {
    Matrix b = Matrix::Zero(8, 2);
    b(2, 0) = kTorqueGain;
    b(3, 1) = kTorqueGain;
    return b;
  };
  std::tie(p.diffusion, p.diffusion_inverse) =
      constant_diagonal(diag_vector({1e-5, 1e-5, 0.2, 0.2, 0.002, 0.002, 1e-5, 1e-5}));
  p.control_cost = ControlCost::kL1;
  p.control_box = symmetric_box(2, 1.0);
  p.exploration_controls = l1_exploration_controls(2);
  p.initial_state = diag_vector({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0});
  p.region_of_interest = Box{diag_vector({-0.5, -0.5, -3.0, -3.0, -2.0, -2.0, -1.5, -1.5}),
                             diag_vector({0.5, 0.5, 3.0, 3.0, 2.0, 2.0, 1.5, 1.5})};
  set_cost_weights(p, 1.0, diag_vector({1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 100.0, 100.0}));
  return p;
}

std::pair<SocProblem, AnalyticLqr> make_scalar_lqr() {
  AnalyticLqr lqr;
  SocProblem p;
  p.name = "lqr1d";
  p.state_dim = 1;
  p.control_dim = 1;
  p.horizon = lqr.horizon;
  p.drift = [](double, const Vector& x, const Vector& u) { return Vector(x + u); };
  p.control_matrix = [](double, const Vector&) { return Matrix::Ones(1, 1); };
  std::tie(p.diffusion, p.diffusion_inverse) = constant_diagonal(Vector::Constant(1, lqr.sigma));
  p.control_cost = ControlCost::kQuadratic;
  p.control_box = symmetric_box(1, 50.0);
  p.exploration_controls = {Vector::Constant(1, -3.0), Vector::Constant(1, -1.5),
                            Vector::Constant(1, 0.0), Vector::Constant(1, 1.5),
                            Vector::Constant(1, 3.0)};
  p.initial_state = Vector::Constant(1, 1.0);
  p.region_of_interest = Box{Vector::Constant(1, -1.0), Vector::Constant(1, 2.0)};
  set_cost_weights(p, 1.0, Vector::Constant(1, 0.5));
  return {std::move(p), lqr};
}

SocProblem make_problem(std::string_view name) {
  if (name == "lqr1d") return make_scalar_lqr().first;
  if (name == "double_integrator") return make_double_integrator();
  if (name == "double_pendulum") return make_double_pendulum();
  if (name == "quadcopter") return make_quadcopter();
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

std::vector<std::string> problem_names() {
  return {"lqr1d", "double_integrator", "double_pendulum", "quadcopter"};
}

Vector argmin_policy(const SocProblem& problem, double t, const Vector& x,
                     const Vector& value_gradient) {
  if (!value_gradient.allFinite()) {
    throw std::invalid_argument("argmin_policy: non-finite value gradient");
  }
  const Vector b = problem.control_matrix(t, x).transpose() * value_gradient;
  const Vector& lo = problem.control_box.lower;
  const Vector& hi = problem.control_box.upper;
  const double c0 = problem.control_weight;
  Vector u(problem.control_dim);
  for (int k = 0; k < problem.control_dim; ++k) {
    if (problem.control_cost == ControlCost::kL1) {
      if (b(k) > c0) {
        u(k) = lo(k);
      } else if (b(k) < -c0) {
        u(k) = hi(k);
      } else {
        u(k) = std::clamp(0.0, lo(k), hi(k));
      }
    } else {
      u(k) = std::clamp(-b(k) / c0, lo(k), hi(k));
    }
  }
  return u;
}

double policy_objective(const SocProblem& problem, double t, const Vector& x,
                        const Vector& value_gradient, const Vector& u) {
  return problem.running_cost(t, x, u) + problem.drift(t, x, u).dot(value_gradient);
}

}  // namespace fbrrt
