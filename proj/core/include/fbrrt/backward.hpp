#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbrrt/basis.hpp"
#include "fbrrt/problem.hpp"
#include "fbrrt/tree.hpp"
#include "fbrrt/types.hpp"

namespace fbrrt {

struct BackwardConfig {
  double lambda = 1.0;
  std::vector<double> lambda_grid{0.1, 0.3, 1.0, 3.0, 10.0};
  bool lambda_search = false;
  /// Ridge is ridge_scale * M, used only when the samples themselves are degenerate.
  double ridge_scale = 1e-8;
  /// false: uniform regression weights (the unweighted parallel-sampled baseline).
  bool entropy_weighting = true;

  void validate() const;
};

/// Raised when the unregularized weighted regression is rank deficient.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, int deficient_columns)
      : std::runtime_error(what), deficient_columns_(deficient_columns) {}
  int deficient_columns() const { return deficient_columns_; }

 private:
  int deficient_columns_;
};

/// Backward-pass failure tagged with the time step that produced it.
class BackwardError : public std::runtime_error {
 public:
  BackwardError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Quantities of one one-step FBSDE estimate along a path edge (x_i, k_i, x_{i+1}).
struct EstimatorStep {
  double y_next = 0.0;  // V(x_{i+1}; alpha_{i+1})
  Vector z_next;        // sigma^T grad V at x_{i+1}
  Vector mu;            // target policy at x_i
  Vector d;             // sigma^{-1} (f(x_i, mu) - k_i)
  double y_hat = 0.0;   // y_next + (l(x_i, mu) + z^T d) dt
};

EstimatorStep estimator_step(const SocProblem& problem, const ValueModel& model, int step,
                             const Vector& x, const Vector& drift, const Vector& x_next,
                             double dt);

/// theta_j = exp(-(rho_j - min rho) / lambda); not normalized. Infinite rho maps to 0.
std::vector<double> entropy_weights(std::span<const double> rho, double lambda);

/// rho_{i+1} = V(x_{i+1}; alpha_{i+1}) + accumulated running cost along the path.
double heuristic_rho(const PathSample& path, const ValueModel& model);

struct FitResult {
  Vector alpha;
  double residual_norm = 0.0;     // sqrt(sum theta (y - Phi alpha)^2)
  double condition_estimate = 0.0;  // |R_11| / |R_kk| of the pivoted QR
  int rank = 0;
};

/**
 * argmin_alpha sum_j theta_j (y_j - Phi_j alpha)^2 + ridge |alpha|^2, solved by
 * column-pivoted Householder QR of the sqrt(theta)-scaled system (augmented with
 * sqrt(ridge) I when ridge > 0). Throws RankDeficientError when ridge == 0 and
 * the scaled system has rank < k.
 */
FitResult weighted_fit(const Matrix& features, const Vector& targets,
                       std::span<const double> weights, double ridge);

struct StepDiagnostics {
  int step = 0;
  double effective_sample_size = 0.0;  // sum theta / max theta
  double residual_norm = 0.0;
  double condition_estimate = 0.0;
  bool null_space_fit = false;  // rank-deficient weights resolved by the uniform secondary fit
  bool ridge_used = false;
};

/// rho of the nodes at one depth, in nodes_at(depth) order.
struct DepthHeuristics {
  std::vector<NodeHandle> nodes;
  std::vector<double> rho;
};

struct BackwardResult {
  ValueModel model;
  /// Indexed by depth 0..N; depth 0 left empty.
  std::vector<DepthHeuristics> heuristics;
  std::vector<StepDiagnostics> diagnostics;  // ordered N, N-1, ..., 1
  double lambda = 1.0;
};

/// Local-entropy-weighted LSMC sweep producing alpha_N .. alpha_1 from the tree.
BackwardResult backward_pass(const BranchTree& tree, const SocProblem& problem,
                             const ChebyshevBasis& basis, const BackwardConfig& config);

/// Scores a candidate model (lower is better); typically the Monte Carlo policy cost.
using ModelScore = std::function<double(const ValueModel&)>;

struct LambdaSearchResult {
  BackwardResult best;
  std::vector<double> lambdas;
  std::vector<std::optional<double>> scores;  // empty where the candidate failed
};

/// One backward pass per lambda; returns the lowest-scoring one (ties -> smaller lambda).
LambdaSearchResult lambda_search(const BranchTree& tree, const SocProblem& problem,
                                 const ChebyshevBasis& basis, const BackwardConfig& config,
                                 std::span<const double> lambda_grid, const ModelScore& score);

}  // namespace fbrrt
