#include "fbrrt/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbrrt {
namespace {

Vector sample_noise(Rng& rng, int dim, double dt) {
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  Vector w(dim);
  for (int j = 0; j < dim; ++j) w(j) = normal(rng);
  return w;
}

Vector sample_uniform(Rng& rng, const Box& box) {
  Vector x(box.dim());
  for (int j = 0; j < box.dim(); ++j) {
    x(j) = std::uniform_real_distribution<double>(box.lower(j), box.upper(j))(rng);
  }
  return x;
}

const Vector& random_exploration_control(const SocProblem& problem, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, problem.exploration_controls.size() - 1);
  return problem.exploration_controls[pick(rng)];
}

Vector nearest_scale(const Box& roi) {
  Vector scale = roi.half_width();
  // Degenerate ROI axes still need a positive metric weight.
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale(j) > 0.0)) scale(j) = 1.0;
  }
  return scale;
}

}  // namespace

SamplingMode parse_sampling_mode(std::string_view text) {
  if (text == "rrt" || text == "rrt_branched") return SamplingMode::kRrtBranched;
  if (text == "parallel" || text == "parallel_baseline") return SamplingMode::kParallelBaseline;
  throw std::invalid_argument("unknown sampling mode '" + std::string(text) + "'");
}

std::string to_string(SamplingMode mode) {
  return mode == SamplingMode::kRrtBranched ? "rrt" : "parallel";
}

void ForwardConfig::validate() const {
  if (!(eps_rrt >= 0.0 && eps_rrt <= 1.0) || !(eps_opt >= 0.0 && eps_opt <= 1.0)) {
    throw std::invalid_argument("eps_rrt and eps_opt must lie in [0, 1]");
  }
  roi.validate();
}

NearestResult nearest(std::span<const Vector> states, const Vector& query, const Vector& scale) {
  if (states.empty()) throw std::invalid_argument("nearest: empty node list");
  NearestResult best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < states.size(); ++j) {
    const double d = (states[j] - query).cwiseQuotient(scale).squaredNorm();
    if (d < best.distance) best = {j, d};
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

NearestIndex::NearestIndex(Vector scale) : inv_scale_(scale.cwiseInverse()) {
  if (scale.size() == 0 || (scale.array() <= 0.0).any()) {
    throw std::invalid_argument("nearest index: scale must be strictly positive");
  }
}

void NearestIndex::add(const Vector& x) {
  for (Eigen::Index j = 0; j < inv_scale_.size(); ++j) points_.push_back(x(j) * inv_scale_(j));
  ++count_;
}

NearestResult NearestIndex::query(const Vector& q) const {
  if (count_ == 0) throw std::invalid_argument("nearest: empty node list");
  const auto n = static_cast<std::size_t>(inv_scale_.size());
  std::vector<double> zq(n);
  for (std::size_t j = 0; j < n; ++j) zq[j] = q(static_cast<Eigen::Index>(j)) * inv_scale_(static_cast<Eigen::Index>(j));
  NearestResult best{0, std::numeric_limits<double>::infinity()};
  const double* p = points_.data();
  for (std::size_t i = 0; i < count_; ++i, p += n) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = p[j] - zq[j];
      d += diff * diff;
    }
    if (d < best.distance) best = {i, d};
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

Vector euler_maruyama_step(const SocProblem& problem, double t, const Vector& x,
                           const Vector& drift, const Vector& noise, double dt) {
  return x + drift * dt + problem.diffusion(t, x) * noise;
}

void forward_pass(BranchTree& tree, const ValueModel* model, const SocProblem& problem,
                  const ForwardConfig& config, int width, Rng& rng) {
  config.validate();
  const int steps = tree.num_steps();
  const double dt = tree.dt();
  if (width < 1) throw std::invalid_argument("forward pass: target width must be positive");
  if (config.eps_opt > 0.0 && (model == nullptr || model->empty())) {
    throw std::invalid_argument("forward pass: exploitation requested without a value model");
  }
  if (config.roi.dim() != problem.state_dim || tree.state_dim() != problem.state_dim) {
    throw std::invalid_argument("forward pass: dimension mismatch between tree, ROI and problem");
  }
  for (int i = 1; i <= steps; ++i) {
    if (tree.width(i) > width) {
      throw std::invalid_argument("forward pass: tree is already wider than the target width");
    }
  }

  const Vector scale = nearest_scale(config.roi);
  std::vector<NearestIndex> indices;
  indices.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    NearestIndex index(scale);
    for (const NodeHandle h : tree.nodes_at(i)) index.add(tree.node(h).state);
    indices.push_back(std::move(index));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool growing = true;
  while (growing) {
    growing = false;
    for (int i = 0; i < steps; ++i) {
      if (tree.width(i + 1) >= width) continue;
      growing = true;
      const double t = i * dt;
      const auto parents = tree.nodes_at(i);

      std::size_t chosen = 0;
      if (config.eps_rrt > unit(rng)) {
        chosen = indices[static_cast<std::size_t>(i)].query(sample_uniform(rng, config.roi)).index;
      } else {
        chosen = std::uniform_int_distribution<std::size_t>(0, parents.size() - 1)(rng);
      }
      const NodeHandle parent = parents[chosen];
      const Vector x = tree.node(parent).state;

      Vector u;
      if (config.eps_opt > unit(rng) && model->defined(i + 1)) {
        u = argmin_policy(problem, t, x, model->gradient(i + 1, x));
      } else {
        u = random_exploration_control(problem, rng);
      }
      EdgeData edge;
      edge.drift = problem.drift(t, x, u);
      edge.noise = sample_noise(rng, problem.state_dim, dt);
      edge.step_cost = problem.running_cost(t, x, u) * dt;
      Vector child = euler_maruyama_step(problem, t, x, edge.drift, edge.noise, dt);
      edge.control = std::move(u);
      if (i + 1 < steps) indices[static_cast<std::size_t>(i) + 1].add(child);
      tree.add_edge(i, parent, std::move(edge), std::move(child));
    }
  }
}

BranchTree parallel_forward_pass(const SocProblem& problem, const ValueModel* model, int width,
                                 int num_steps, Rng& rng) {
  if (width < 1 || num_steps < 1) {
    throw std::invalid_argument("parallel forward pass: width and steps must be positive");
  }
  const double dt = problem.horizon / num_steps;
  BranchTree tree(problem.initial_state, num_steps, dt);
  const std::uint64_t base = rng();
  for (int particle = 0; particle < width; ++particle) {
    Rng stream = make_rng(base, static_cast<std::uint64_t>(particle));
    NodeHandle current = tree.root();
    for (int i = 0; i < num_steps; ++i) {
      const double t = i * dt;
      const Vector x = tree.node(current).state;
      Vector u = (model != nullptr && model->defined(i + 1))
                     ? argmin_policy(problem, t, x, model->gradient(i + 1, x))
                     : random_exploration_control(problem, stream);
      EdgeData edge;
      edge.drift = problem.drift(t, x, u);
      edge.noise = sample_noise(stream, problem.state_dim, dt);
      edge.step_cost = problem.running_cost(t, x, u) * dt;
      Vector child = euler_maruyama_step(problem, t, x, edge.drift, edge.noise, dt);
      edge.control = std::move(u);
      current = tree.add_edge(i, current, std::move(edge), std::move(child));
    }
  }
  return tree;
}

}  // namespace fbrrt
