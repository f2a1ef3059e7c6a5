#include "fbrrt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace fbrrt {
namespace {

enum Stream : std::uint64_t {
  kForwardStream = 1,
  kRolloutStream = 1'000'000,
  kSearchStream = 2'000'000,
};

int min_width(const BranchTree& tree) {
  int w = std::numeric_limits<int>::max();
  for (int i = 1; i <= tree.num_steps(); ++i) w = std::min(w, tree.width(i));
  return w;
}

int max_width(const BranchTree& tree) {
  int w = 0;
  for (int i = 1; i <= tree.num_steps(); ++i) w = std::max(w, tree.width(i));
  return w;
}

}  // namespace

void SolverConfig::validate(const SocProblem& problem) const {
  if (particles < 1 || erode_width < 1 || erode_width >= particles) {
    throw std::invalid_argument("solver: need 1 <= erode width < particles");
  }
  if (steps < 2) throw std::invalid_argument("solver: need at least two time steps");
  if (iterations < 1) throw std::invalid_argument("solver: need at least one iteration");
  if (rollouts < 1) throw std::invalid_argument("solver: need at least one rollout");
  forward.validate();
  backward.validate();
  if (forward.roi.dim() != problem.state_dim) {
    throw std::invalid_argument("solver: ROI dimension differs from the state dimension");
  }
  problem.validate();
}

SolverConfig default_config(const SocProblem& problem) {
  SolverConfig config;
  config.forward.roi = problem.region_of_interest;
  if (problem.name == "lqr1d") {
    config.particles = 512;
    config.erode_width = 256;
    config.steps = 50;
  } else if (problem.name == "double_pendulum") {
    config.erode_width = 768;
    config.steps = 80;
  } else if (problem.name == "quadcopter") {
    // Terminal costs reach the hundreds; weights at lambda ~ 1 collapse onto a few paths.
    config.backward.lambda = 300.0;
    config.backward.lambda_grid = {30.0, 100.0, 300.0, 900.0, 3000.0};
    config.backward.lambda_search = true;
  }
  return config;
}

PolicyCost rollout_cost(const SocProblem& problem, const FeedbackPolicy& policy, int steps,
                        int rollouts, Rng& rng) {
  if (steps < 1 || rollouts < 1) {
    throw std::invalid_argument("rollout cost: steps and rollouts must be positive");
  }
  const double dt = problem.horizon / steps;
  const double sqrt_dt = std::sqrt(dt);
  const std::uint64_t base = rng();
  std::vector<double> costs;
  costs.reserve(static_cast<std::size_t>(rollouts));
  PolicyCost out;
  for (int r = 0; r < rollouts; ++r) {
    Rng stream = make_rng(base, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> normal(0.0, sqrt_dt);
    Vector x = problem.initial_state;
    Vector w(problem.state_dim);
    double cost = 0.0;
    bool finite = true;
    for (int i = 0; i < steps && finite; ++i) {
      const double t = i * dt;
      Vector u;
      try {
        u = policy(i, t, x);
      } catch (const std::invalid_argument&) {
        // Overflowing states yield non-finite features or gradients.
        finite = false;
        break;
      }
      for (int j = 0; j < problem.state_dim; ++j) w(j) = normal(stream);
      cost += problem.running_cost(t, x, u) * dt;
      x += problem.drift(t, x, u) * dt + problem.diffusion(t, x) * w;
      finite = x.allFinite() && std::isfinite(cost);
    }
    if (finite) cost += problem.terminal_cost(x);
    if (!finite || !std::isfinite(cost)) {
      ++out.excluded;
      continue;
    }
    costs.push_back(cost);
  }
  if (costs.empty()) {
    out.mean = std::numeric_limits<double>::infinity();
    out.std_error = std::numeric_limits<double>::infinity();
    return out;
  }
  double sum = 0.0;
  for (double c : costs) sum += c;
  out.mean = sum / static_cast<double>(costs.size());
  if (costs.size() > 1) {
    double ss = 0.0;
    for (double c : costs) ss += (c - out.mean) * (c - out.mean);
    const double n = static_cast<double>(costs.size());
    out.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

FeedbackPolicy model_policy(const SocProblem& problem, const ValueModel& model) {
  return [&problem, &model](int step, double t, const Vector& x) {
    return argmin_policy(problem, t, x, model.gradient(step + 1, x));
  };
}

PolicyCost policy_cost(const SocProblem& problem, const ValueModel& model, int rollouts,
                       Rng& rng) {
  for (int i = 1; i <= model.num_steps(); ++i) {
    if (!model.defined(i)) {
      throw std::invalid_argument("policy cost: model undefined at step " + std::to_string(i));
    }
  }
  return rollout_cost(problem, model_policy(problem, model), model.num_steps(), rollouts, rng);
}

SolveResult solve(const SocProblem& problem, const SolverConfig& config,
                  const IterationCallback& on_iteration) {
  config.validate(problem);
  const double dt = config.dt(problem);
  const ChebyshevBasis basis = ChebyshevBasis::from_region(config.forward.roi);
  const bool branched = config.forward.mode == SamplingMode::kRrtBranched;

  BackwardConfig backward = config.backward;
  if (!branched) backward.entropy_weighting = false;

  SolveResult result{ValueModel(basis, config.steps),
                     ValueModel(basis, config.steps),
                     0,
                     {},
                     {},
                     {},
                     BranchTree(problem.initial_state, config.steps, dt)};
  Rng forward_rng = make_rng(config.seed, kForwardStream);
  std::optional<ValueModel> current;
  double best = std::numeric_limits<double>::infinity();

  for (int k = 1; k <= config.iterations; ++k) {
    const auto start = std::chrono::steady_clock::now();
    IterationReport report;
    report.iteration = k;
    std::string stage = "forward";
    try {
      if (branched) {
        ForwardConfig fwd = config.forward;
        if (!current) {
          fwd.eps_rrt = 1.0;
          fwd.eps_opt = 0.0;
        }
        forward_pass(result.tree, current ? &*current : nullptr, problem, fwd, config.particles,
                     forward_rng);
      } else {
        result.tree = parallel_forward_pass(problem, current ? &*current : nullptr,
                                            config.particles, config.steps, forward_rng);
      }
      report.min_width_forward = min_width(result.tree);
      report.max_width_forward = max_width(result.tree);

      stage = "backward";
      std::optional<BackwardResult> fitted;
      if (backward.lambda_search) {
        const std::uint64_t search_seed =
            derive_seed(config.seed, kSearchStream + static_cast<std::uint64_t>(k));
        const ModelScore score = [&](const ValueModel& m) {
          Rng rng(search_seed);
          return policy_cost(problem, m, config.rollouts, rng).mean;
        };
        fitted = std::move(
            lambda_search(result.tree, problem, basis, backward, backward.lambda_grid, score)
                .best);
      } else {
        fitted = backward_pass(result.tree, problem, basis, backward);
      }
      report.lambda = fitted->lambda;
      report.null_space_fits = static_cast<int>(
          std::count_if(fitted->diagnostics.begin(), fitted->diagnostics.end(),
                        [](const StepDiagnostics& d) { return d.null_space_fit; }));
      report.ridge_fallbacks = static_cast<int>(
          std::count_if(fitted->diagnostics.begin(), fitted->diagnostics.end(),
                        [](const StepDiagnostics& d) { return d.ridge_used; }));

      stage = "policy_cost";
      Rng rollout_rng = make_rng(config.seed, kRolloutStream + static_cast<std::uint64_t>(k));
      const PolicyCost cost = policy_cost(problem, fitted->model, config.rollouts, rollout_rng);
      report.policy_cost = cost.mean;
      report.std_error = cost.std_error;
      report.excluded_rollouts = cost.excluded;
      if (cost.mean < best || k == 1) {
        best = std::min(best, cost.mean);
        result.best_model = fitted->model;
        result.best_iteration = k;
      }
      report.best_cost = best;

      stage = "erode";
      if (branched) {
        result.erosions.push_back(erode(result.tree, fitted->heuristics, config.erode_width));
        report.min_width_eroded = min_width(result.tree);
      } else {
        report.min_width_eroded = report.min_width_forward;
      }
      result.diagnostics.push_back(fitted->diagnostics);
      result.last_model = fitted->model;
      current = std::move(fitted->model);
    } catch (const SolverError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError("iteration " + std::to_string(k) + ", " + stage + ": " + e.what(), k,
                        stage);
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.reports.push_back(report);
    if (on_iteration) on_iteration(report);
  }
  return result;
}

}  // namespace fbrrt
