#include "fbrrt/backward.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>

namespace fbrrt {

void BackwardConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive and finite");
  }
  for (double l : lambda_grid) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("lambda grid entries must be positive and finite");
    }
  }
  if (lambda_search && lambda_grid.empty()) {
    throw std::invalid_argument("lambda search needs a nonempty grid");
  }
  if (!(ridge_scale >= 0.0)) throw std::invalid_argument("ridge scale must be nonnegative");
}

EstimatorStep estimator_step(const SocProblem& problem, const ValueModel& model, int step,
                             const Vector& x, const Vector& drift, const Vector& x_next,
                             double dt) {
  const double t = step * dt;
  const double t_next = (step + 1) * dt;
  EstimatorStep out;
  out.y_next = model.value(step + 1, x_next);
  out.z_next = problem.diffusion(t_next, x_next).transpose() * model.gradient(step + 1, x_next);
  out.mu = argmin_policy(problem, t, x, model.gradient(step + 1, x));
  out.d = problem.diffusion_inverse(t_next, x_next) * (problem.drift(t, x, out.mu) - drift);
  out.y_hat = out.y_next + (problem.running_cost(t, x, out.mu) + out.z_next.dot(out.d)) * dt;
  return out;
}

std::vector<double> entropy_weights(std::span<const double> rho, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("entropy weights: lambda must be positive");
  double min_rho = std::numeric_limits<double>::infinity();
  for (double r : rho) {
    if (std::isnan(r)) throw std::invalid_argument("entropy weights: NaN heuristic");
    min_rho = std::min(min_rho, r);
  }
  if (!std::isfinite(min_rho)) {
    throw std::invalid_argument("entropy weights: no finite heuristic value");
  }
  std::vector<double> theta(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) theta[j] = std::exp(-(rho[j] - min_rho) / lambda);
  return theta;
}

double heuristic_rho(const PathSample& path, const ValueModel& model) {
  return model.value(path.node.depth, path.state) + path.accumulated_cost;
}

FitResult weighted_fit(const Matrix& features, const Vector& targets,
                       std::span<const double> weights, double ridge) {
  const Eigen::Index rows = features.rows();
  const Eigen::Index k = features.cols();
  if (targets.size() != rows || static_cast<Eigen::Index>(weights.size()) != rows) {
    throw std::invalid_argument("weighted fit: features, targets and weights disagree in size");
  }
  if (!(ridge >= 0.0)) throw std::invalid_argument("weighted fit: ridge must be nonnegative");
  if (ridge == 0.0 && rows < k) {
    throw RankDeficientError("weighted fit: " + std::to_string(rows) + " rows for " +
                                 std::to_string(k) + " features",
                             static_cast<int>(k - rows));
  }
  const Eigen::Index extra = ridge > 0.0 ? k : 0;
  Matrix a(rows + extra, k);
  Vector b(rows + extra);
  for (Eigen::Index j = 0; j < rows; ++j) {
    const double w = weights[static_cast<std::size_t>(j)];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weighted fit: weights must be finite and nonnegative");
    }
    const double s = std::sqrt(w);
    a.row(j) = s * features.row(j);
    b(j) = s * targets(j);
  }
  if (extra > 0) {
    a.bottomRows(k) = std::sqrt(ridge) * Matrix::Identity(k, k);
    b.tail(k).setZero();
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("weighted fit: non-finite features or targets");
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  FitResult result;
  result.rank = static_cast<int>(qr.rank());
  if (ridge == 0.0 && qr.rank() < k) {
    throw RankDeficientError("weighted fit: rank " + std::to_string(qr.rank()) + " < " +
                                 std::to_string(k) + " (" + std::to_string(k - qr.rank()) +
                                 " deficient columns)",
                             static_cast<int>(k - qr.rank()));
  }
  result.alpha = qr.solve(b);
  result.residual_norm = (a.topRows(rows) * result.alpha - b.head(rows)).norm();
  const auto r_diag = qr.matrixR().diagonal().cwiseAbs();
  result.condition_estimate =
      r_diag(k - 1) > 0.0 ? r_diag(0) / r_diag(k - 1) : std::numeric_limits<double>::infinity();
  return result;
}

namespace {

std::vector<double> regression_weights(std::span<const double> rho, const BackwardConfig& config) {
  if (!config.entropy_weighting) return std::vector<double>(rho.size(), 1.0);
  return entropy_weights(rho, config.lambda);
}

// Weights that underflow to zero stand for tiny positive ones: fit the weighted
// system on its row space, then the remaining null-space directions to all rows
// with uniform weight. Ridge only when that is still singular.
std::optional<FitResult> limit_fit(const Matrix& phi, const Vector& y,
                                   const std::vector<double>& theta) {
  const Eigen::Index rows = phi.rows(), k = phi.cols();
  Matrix a(rows, k);
  Vector b(rows);
  for (Eigen::Index j = 0; j < rows; ++j) {
    const double s = std::sqrt(theta[static_cast<std::size_t>(j)]);
    a.row(j) = s * phi.row(j);
    b(j) = s * y(j);
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Eigen::Index r = svd.rank();
  const Vector alpha0 = svd.solve(b);
  if (r == k) return FitResult{alpha0, (a * alpha0 - b).norm(), 0.0, static_cast<int>(r)};
  const Matrix null_space = svd.matrixV().rightCols(k - r);
  const Matrix reduced = phi * null_space;
  Eigen::ColPivHouseholderQR<Matrix> qr(reduced);
  if (qr.rank() < k - r) return std::nullopt;
  const Vector beta = qr.solve(y - phi * alpha0);
  FitResult fit;
  fit.alpha = alpha0 + null_space * beta;
  fit.residual_norm = (a * fit.alpha - b).norm();
  const auto sv = svd.singularValues();
  fit.condition_estimate = sv(r - 1) > 0.0 ? sv(0) / sv(r - 1) : 0.0;
  fit.rank = static_cast<int>(r);
  return fit;
}

// Unregularized first, then limit_fit, then the configured ridge.
FitResult fit_step(const Matrix& phi, const Vector& y, const std::vector<double>& theta,
                   const BackwardConfig& config, int step, StepDiagnostics& diag) {
  FitResult fit;
  try {
    fit = weighted_fit(phi, y, theta, 0.0);
  } catch (const RankDeficientError& e) {
    std::optional<FitResult> limit;
    if (phi.rows() >= phi.cols()) limit = limit_fit(phi, y, theta);
    if (limit && limit->alpha.allFinite()) {
      fit = std::move(*limit);
      diag.null_space_fit = true;
    } else {
      const double ridge = config.ridge_scale * static_cast<double>(phi.rows());
      if (!(ridge > 0.0)) {
        throw BackwardError(std::string(e.what()) + " at step " + std::to_string(step), step);
      }
      fit = weighted_fit(phi, y, theta, ridge);
      diag.ridge_used = true;
    }
  }
  if (!fit.alpha.allFinite()) {
    throw BackwardError("backward pass: non-finite coefficients at step " + std::to_string(step),
                        step);
  }
  const double max_theta = *std::max_element(theta.begin(), theta.end());
  diag.step = step;
  diag.effective_sample_size = std::accumulate(theta.begin(), theta.end(), 0.0) / max_theta;
  diag.residual_norm = fit.residual_norm;
  diag.condition_estimate = fit.condition_estimate;
  return fit;
}

}  // namespace

BackwardResult backward_pass(const BranchTree& tree, const SocProblem& problem,
                             const ChebyshevBasis& basis, const BackwardConfig& config) {
  config.validate();
  const int steps = tree.num_steps();
  const double dt = tree.dt();
  const int k = basis.num_features();
  BackwardResult result{ValueModel(basis, steps), {}, {}, config.lambda};
  result.heuristics.resize(static_cast<std::size_t>(steps) + 1);

  auto record = [&](int depth, const std::vector<PathSample>& paths, std::vector<double> rho) {
    DepthHeuristics& h = result.heuristics[static_cast<std::size_t>(depth)];
    h.nodes.clear();
    for (const auto& p : paths) h.nodes.push_back(p.node);
    h.rho = std::move(rho);
  };

  {
    const auto paths = tree.paths_at_time(steps);
    const auto m = static_cast<Eigen::Index>(paths.size());
    Matrix phi(m, k);
    Vector y(m);
    std::vector<double> rho(paths.size());
    for (Eigen::Index j = 0; j < m; ++j) {
      const PathSample& p = paths[static_cast<std::size_t>(j)];
      basis.features_into(p.state, phi.row(j));
      y(j) = problem.terminal_cost(p.state);
      rho[static_cast<std::size_t>(j)] = p.accumulated_cost + y(j);
    }
    const auto theta = regression_weights(rho, config);
    StepDiagnostics diag;
    try {
      result.model.set(steps, fit_step(phi, y, theta, config, steps, diag).alpha);
    } catch (const BackwardError&) {
      throw;
    } catch (const std::exception& e) {
      throw BackwardError(std::string(e.what()) + " at step " + std::to_string(steps), steps);
    }
    result.diagnostics.push_back(diag);
    record(steps, paths, std::move(rho));
  }

  for (int i = steps - 1; i >= 1; --i) {
    const auto paths = tree.paths_at_time(i + 1);
    const auto m = static_cast<Eigen::Index>(paths.size());
    Matrix phi(m, k);
    Vector y(m);
    std::vector<double> rho(paths.size());
    try {
      for (Eigen::Index j = 0; j < m; ++j) {
        const PathSample& p = paths[static_cast<std::size_t>(j)];
        const EstimatorStep est =
            estimator_step(problem, result.model, i, p.parent_state, p.drift, p.state, dt);
        if (!std::isfinite(est.y_hat) || !std::isfinite(est.y_next)) {
          throw BackwardError("backward pass: non-finite estimate on path to node " +
                                  std::to_string(tree.node(p.node).id) + " at step " +
                                  std::to_string(i),
                              i);
        }
        basis.features_into(p.parent_state, phi.row(j));
        y(j) = est.y_hat;
        rho[static_cast<std::size_t>(j)] = est.y_next + p.accumulated_cost;
      }
      const auto theta = regression_weights(rho, config);
      StepDiagnostics diag;
      result.model.set(i, fit_step(phi, y, theta, config, i, diag).alpha);
      result.diagnostics.push_back(diag);
    } catch (const BackwardError&) {
      throw;
    } catch (const std::exception& e) {
      throw BackwardError(std::string(e.what()) + " at step " + std::to_string(i), i);
    }
    if (i + 1 < steps) record(i + 1, paths, std::move(rho));
  }

  const auto first = tree.paths_at_time(1);
  std::vector<double> rho_first;
  rho_first.reserve(first.size());
  for (const auto& p : first) rho_first.push_back(heuristic_rho(p, result.model));
  record(1, first, std::move(rho_first));
  return result;
}

LambdaSearchResult lambda_search(const BranchTree& tree, const SocProblem& problem,
                                 const ChebyshevBasis& basis, const BackwardConfig& config,
                                 std::span<const double> lambda_grid, const ModelScore& score) {
  if (lambda_grid.empty()) throw std::invalid_argument("lambda search: empty grid");
  std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
  std::sort(lambdas.begin(), lambdas.end());

  LambdaSearchResult out{BackwardResult{ValueModel(basis, tree.num_steps()), {}, {}, 0.0},
                         lambdas,
                         std::vector<std::optional<double>>(lambdas.size())};
  double best_score = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t c = 0; c < lambdas.size(); ++c) {
    BackwardConfig candidate = config;
    candidate.lambda = lambdas[c];
    try {
      BackwardResult r = backward_pass(tree, problem, basis, candidate);
      const double s = score(r.model);
      if (!std::isfinite(s)) {
        std::clog << "warning: lambda " << lambdas[c] << " produced a non-finite score\n";
        continue;
      }
      out.scores[c] = s;
      if (!found || s < best_score) {
        best_score = s;
        out.best = std::move(r);
        found = true;
      }
    } catch (const std::exception& e) {
      std::clog << "warning: lambda " << lambdas[c] << " skipped: " << e.what() << '\n';
    }
  }
  if (!found) throw BackwardError("lambda search: every candidate failed", 0);
  return out;
}

}  // namespace fbrrt
