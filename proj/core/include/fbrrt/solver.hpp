#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbrrt/backward.hpp"
#include "fbrrt/basis.hpp"
#include "fbrrt/erode.hpp"
#include "fbrrt/forward.hpp"
#include "fbrrt/problem.hpp"
#include "fbrrt/tree.hpp"

namespace fbrrt {

struct SolverConfig {
  int particles = 1024;   // M
  int erode_width = 512;  // M tilde
  int steps = 64;         // N
  int iterations = 10;
  int rollouts = 256;
  std::uint64_t seed = 0;
  ForwardConfig forward;
  BackwardConfig backward;

  double dt(const SocProblem& problem) const { return problem.horizon / steps; }
  void validate(const SocProblem& problem) const;
};

/// Defaults for `problem`: ROI taken from the problem's region of interest.
SolverConfig default_config(const SocProblem& problem);

struct PolicyCost {
  double mean = 0.0;
  double std_error = 0.0;
  int excluded = 0;  // rollouts dropped for non-finite states or costs
};

/// Feedback law u = policy(step, t, x) used by rollout_cost.
using FeedbackPolicy = std::function<Vector(int step, double t, const Vector& x)>;

/// Monte Carlo cost of `policy` over independent Euler-Maruyama rollouts from x_0.
PolicyCost rollout_cost(const SocProblem& problem, const FeedbackPolicy& policy, int steps,
                        int rollouts, Rng& rng);

/// Greedy policy u_i = argmin_policy(t_i, x, grad V(x; alpha_{i+1})).
FeedbackPolicy model_policy(const SocProblem& problem, const ValueModel& model);

/// rollout_cost of model_policy over model.num_steps() steps.
PolicyCost policy_cost(const SocProblem& problem, const ValueModel& model, int rollouts, Rng& rng);

struct IterationReport {
  int iteration = 0;
  double policy_cost = 0.0;
  double std_error = 0.0;
  double best_cost = 0.0;  // accumulated minimum of policy_cost
  double lambda = 0.0;
  int min_width_forward = 0;
  int max_width_forward = 0;
  int min_width_eroded = 0;
  int null_space_fits = 0;
  int ridge_fallbacks = 0;
  int excluded_rollouts = 0;
  double wall_seconds = 0.0;
};

struct SolveResult {
  ValueModel best_model;
  ValueModel last_model;
  int best_iteration = 0;
  std::vector<IterationReport> reports;
  std::vector<std::vector<StepDiagnostics>> diagnostics;  // per iteration
  std::vector<ErodeReport> erosions;                      // per iteration (RRT mode)
  BranchTree tree;                                        // state after the last iteration
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int iteration, std::string stage)
      : std::runtime_error(what), iteration_(iteration), stage_(std::move(stage)) {}
  int iteration() const { return iteration_; }
  const std::string& stage() const { return stage_; }

 private:
  int iteration_;
  std::string stage_;
};

/// Observer invoked after each iteration (progress logging).
using IterationCallback = std::function<void(const IterationReport&)>;

/**
 * Outer loop: forward pass, backward pass (optionally with lambda search), policy
 * cost, erode. Iteration 1 samples with eps_rrt = 1 and exploration controls only.
 * In parallel-baseline mode each iteration resamples M independent chains, fits with
 * uniform weights, and skips erosion.
 */
SolveResult solve(const SocProblem& problem, const SolverConfig& config,
                  const IterationCallback& on_iteration = {});

}  // namespace fbrrt
