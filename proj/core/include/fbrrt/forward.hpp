#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbrrt/basis.hpp"
#include "fbrrt/problem.hpp"
#include "fbrrt/tree.hpp"
#include "fbrrt/types.hpp"

namespace fbrrt {

enum class SamplingMode { kRrtBranched, kParallelBaseline };

SamplingMode parse_sampling_mode(std::string_view text);
std::string to_string(SamplingMode mode);

struct ForwardConfig {
  double eps_rrt = 0.5;  // probability of RRT (nearest-to-random) parent selection
  double eps_opt = 0.5;  // probability of exploiting the current policy
  Box roi;
  SamplingMode mode = SamplingMode::kRrtBranched;

  void validate() const;
};

struct NearestResult {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Brute-force nearest neighbour under ||(x - q) / scale||_2; ties go to the lowest index.
NearestResult nearest(std::span<const Vector> states, const Vector& query, const Vector& scale);

/// Append-only scaled point set with the same metric as nearest(), stored contiguously.
class NearestIndex {
 public:
  explicit NearestIndex(Vector scale);

  void add(const Vector& x);
  std::size_t size() const { return count_; }
  NearestResult query(const Vector& q) const;

 private:
  Vector inv_scale_;
  std::size_t count_ = 0;
  std::vector<double> points_;
};

/**
 * RRT branched sampling: grows every depth 1..N of `tree` to width M.
 *
 * Each addition picks a parent at depth i (nearest to a uniform ROI sample with
 * probability eps_rrt, else uniformly), a control (the model's greedy policy with
 * probability eps_opt, else a random exploration control), and takes one
 * Euler-Maruyama step. Depths are swept in order inside each addition round, so
 * nodes added at depth i are candidate parents at depth i + 1 in the same round.
 */
void forward_pass(BranchTree& tree, const ValueModel* model, const SocProblem& problem,
                  const ForwardConfig& config, int width, Rng& rng);

/// M independent Euler-Maruyama chains from x_0 under the model's policy (or random
/// exploration controls where the model is undefined).
BranchTree parallel_forward_pass(const SocProblem& problem, const ValueModel* model, int width,
                                 int num_steps, Rng& rng);

/// One Euler-Maruyama step x + k dt + sigma(t, x) w.
Vector euler_maruyama_step(const SocProblem& problem, double t, const Vector& x,
                           const Vector& drift, const Vector& noise, double dt);

}  // namespace fbrrt
