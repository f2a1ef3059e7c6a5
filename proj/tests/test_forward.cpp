#include <cmath>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "fbrrt/forward.hpp"
#include "fbrrt/problem.hpp"
#include "support.hpp"

namespace fbrrt {
namespace {

using testing::normal_vector;
using testing::uniform_in;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ForwardConfig config_for(const SocProblem& p, double eps_rrt, double eps_opt) {
  ForwardConfig cfg;
  cfg.roi = p.region_of_interest;
  cfg.eps_rrt = eps_rrt;
  cfg.eps_opt = eps_opt;
  return cfg;
}

ValueModel random_model(const SocProblem& p, int steps, Rng& rng) {
  ValueModel m(ChebyshevBasis::from_region(p.region_of_interest), steps);
  for (int i = 1; i <= steps; ++i) m.set(i, normal_vector(m.basis().num_features(), 1.0, rng));
  return m;
}

TEST(Nearest, Examples) {
  const Vector scale = vec({1, 1});
  const std::vector<Vector> one{vec({3, 4})};
  EXPECT_EQ(nearest(one, vec({-10, 2}), scale).index, 0u);
  const std::vector<Vector> pts{vec({0, 0}), vec({1, 1}), vec({2, 0})};
  const auto r = nearest(pts, vec({1, 1}), scale);
  EXPECT_EQ(r.index, 1u);
  EXPECT_EQ(r.distance, 0.0);
  EXPECT_THROW(nearest(std::vector<Vector>{}, vec({0, 0}), scale), std::invalid_argument);
}

TEST(Nearest, ScalesByHalfWidth) {
  const std::vector<Vector> pts{vec({0.5, 0}), vec({0, 3})};
  // Unscaled, the first point is closer; with the second axis ten times wider it is not.
  EXPECT_EQ(nearest(pts, vec({0, 0}), vec({1, 1})).index, 0u);
  EXPECT_EQ(nearest(pts, vec({0, 0}), vec({0.1, 10})).index, 1u);
}

TEST(Nearest, MatchesExhaustiveOracle) {
  Rng rng(21);
  const Box box{Vector::Constant(3, -1), Vector::Constant(3, 1)};
  const Vector scale = vec({0.5, 2.0, 1.0});
  std::vector<Vector> pts;
  NearestIndex index(scale);
  for (int k = 0; k < 100; ++k) {
    pts.push_back(uniform_in(box, rng));
    index.add(pts.back());
  }
  for (int q = 0; q < 100; ++q) {
    const Vector query = uniform_in(box, rng);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      double d = 0.0;
      for (int c = 0; c < 3; ++c) d += std::pow((pts[j](c) - query(c)) / scale(c), 2);
      if (d < best_d) best_d = d, best = j;
    }
    EXPECT_EQ(nearest(pts, query, scale).index, best);
    EXPECT_EQ(index.query(query).index, best);
  }
}

TEST(EulerMaruyama, HandSteps) {
  const SocProblem p = make_double_integrator();
  const Vector parent = vec({1, 2});
  EXPECT_EQ(euler_maruyama_step(p, 0.0, parent, Vector::Zero(2), Vector::Zero(2), 0.1), parent);
  const double dt = 1.0 / 64;
  const Vector k = p.drift(0.0, parent, vec({-1}));
  const Vector child = euler_maruyama_step(p, 0.0, parent, k, Vector::Zero(2), dt);
  EXPECT_DOUBLE_EQ(child(0), 1 + 2.0 / 64);
  EXPECT_DOUBLE_EQ(child(1), 2 - 1.0 / 64);
  const Vector noisy = euler_maruyama_step(p, 0.0, parent, k, vec({1, 1}), dt);
  EXPECT_DOUBLE_EQ(noisy(0), child(0) + 0.01);
  EXPECT_DOUBLE_EQ(noisy(1), child(1) + 0.1);
}

TEST(ForwardPass, FillsEveryDepthToWidth) {
  const SocProblem p = make_double_integrator();
  BranchTree tree(p.initial_state, 16, p.horizon / 16);
  Rng rng(1);
  forward_pass(tree, nullptr, p, config_for(p, 1.0, 0.0), 100, rng);
  for (int d = 1; d <= 16; ++d) EXPECT_EQ(tree.width(d), 100);

  // Regrow after pruning depths unevenly.
  for (int d = 16; d >= 1; --d) {
    std::vector<NodeHandle> leaves;
    for (const NodeHandle h : tree.nodes_at(d)) {
      if (tree.node(h).child_count == 0) leaves.push_back(h);
    }
    for (std::size_t j = 0; j < leaves.size() && j < static_cast<std::size_t>(d * 3); ++j) {
      tree.remove_leaf(leaves[j]);
    }
  }
  Rng model_rng(2);
  const ValueModel model = random_model(p, 16, model_rng);
  forward_pass(tree, &model, p, config_for(p, 0.5, 0.5), 100, rng);
  for (int d = 1; d <= 16; ++d) EXPECT_EQ(tree.width(d), 100);
}

TEST(ForwardPass, Deterministic) {
  const SocProblem p = make_quadcopter();
  Rng model_rng(2);
  const ValueModel model = random_model(p, 8, model_rng);
  auto grow = [&] {
    BranchTree tree(p.initial_state, 8, p.horizon / 8);
    Rng rng(77);
    forward_pass(tree, &model, p, config_for(p, 0.5, 0.5), 64, rng);
    return tree;
  };
  const BranchTree a = grow(), b = grow();
  for (int d = 0; d <= 8; ++d) {
    ASSERT_EQ(a.width(d), b.width(d));
    for (int j = 0; j < a.width(d); ++j) {
      const TreeNode& na = a.node(a.nodes_at(d)[j]);
      const TreeNode& nb = b.node(b.nodes_at(d)[j]);
      ASSERT_EQ(na.state, nb.state);
      ASSERT_EQ(na.parent, nb.parent);
      ASSERT_EQ(na.accumulated_cost, nb.accumulated_cost);
    }
  }
}

TEST(ForwardPass, ExploitationFollowsModelPolicy) {
  const SocProblem p = make_double_integrator();
  Rng model_rng(4);
  const ValueModel model = random_model(p, 10, model_rng);
  BranchTree tree(p.initial_state, 10, p.horizon / 10);
  Rng rng(5);
  forward_pass(tree, &model, p, config_for(p, 0.5, 1.0), 50, rng);
  for (int d = 1; d <= 10; ++d) {
    const double t = (d - 1) * tree.dt();
    for (const NodeHandle h : tree.nodes_at(d)) {
      const TreeNode& n = tree.node(h);
      const Vector& xp = tree.node(*n.parent).state;
      EXPECT_EQ(n.edge->control, argmin_policy(p, t, xp, model.gradient(d, xp)));
      EXPECT_EQ(n.edge->drift, p.drift(t, xp, n.edge->control));
    }
  }
}

TEST(ForwardPass, ExplorationControlsOnly) {
  const SocProblem p = make_quadcopter();
  BranchTree tree(p.initial_state, 6, p.horizon / 6);
  Rng rng(6);
  forward_pass(tree, nullptr, p, config_for(p, 1.0, 0.0), 40, rng);
  for (int d = 1; d <= 6; ++d) {
    for (const NodeHandle h : tree.nodes_at(d)) {
      const Vector& u = tree.node(h).edge->control;
      bool found = false;
      for (const Vector& e : p.exploration_controls) found = found || e == u;
      EXPECT_TRUE(found);
    }
  }
}

TEST(ForwardPass, RejectsExploitationWithoutModel) {
  const SocProblem p = make_double_integrator();
  BranchTree tree(p.initial_state, 4, 0.25);
  Rng rng(1);
  EXPECT_THROW(forward_pass(tree, nullptr, p, config_for(p, 1.0, 0.5), 8, rng),
               std::invalid_argument);
  ValueModel empty(ChebyshevBasis::from_region(p.region_of_interest), 4);
  EXPECT_THROW(forward_pass(tree, &empty, p, config_for(p, 1.0, 0.5), 8, rng),
               std::invalid_argument);
  EXPECT_THROW(forward_pass(tree, nullptr, p, config_for(p, 1.5, 0.0), 8, rng),
               std::invalid_argument);
}

TEST(ForwardPass, UniformParentSelection) {
  // Depth 1 is prefilled to the target width, so every addition lands at depth 2
  // with a parent drawn from a fixed set.
  const SocProblem p = make_double_integrator();
  const int width = 10000, buckets = 20;
  BranchTree tree(p.initial_state, 2, 0.5);
  EdgeData e;
  e.drift = Vector::Zero(2);
  e.noise = Vector::Zero(2);
  e.control = Vector::Zero(1);
  for (int j = 0; j < width; ++j) tree.add_edge(0, tree.root(), e, p.initial_state);
  Rng rng(8);
  forward_pass(tree, nullptr, p, config_for(p, 0.0, 0.0), width, rng);
  ASSERT_EQ(tree.width(2), width);
  std::vector<int> counts(buckets, 0);
  for (const NodeHandle h : tree.nodes_at(2)) {
    counts[tree.node(h).parent->slot * buckets / width] += 1;
  }
  const double expected = static_cast<double>(width) / buckets;
  const double sd = std::sqrt(width * (1.0 / buckets) * (1.0 - 1.0 / buckets));
  for (int c : counts) EXPECT_LT(std::abs(c - expected), 5.0 * sd);
}

TEST(ParallelForward, ChainStructure) {
  const SocProblem p = make_double_integrator();
  Rng rng(9);
  const BranchTree tree = parallel_forward_pass(p, nullptr, 3, 2, rng);
  EXPECT_EQ(tree.width(1), 3);
  EXPECT_EQ(tree.width(2), 3);
  EXPECT_EQ(tree.node(tree.root()).child_count, 3);
  for (int d = 1; d <= 2; ++d) {
    for (const NodeHandle h : tree.nodes_at(d)) EXPECT_LE(tree.node(h).child_count, 1);
  }
  std::set<NodeHandle> firsts;
  for (const auto& path : tree.paths_at_time(2)) firsts.insert(tree.path_to(path.node)[1]);
  EXPECT_EQ(firsts.size(), 3u);
}

TEST(ParallelForward, PolicyAndNoise) {
  const SocProblem p = make_double_integrator();
  Rng model_rng(10);
  const ValueModel model = random_model(p, 8, model_rng);
  Rng rng(11);
  const int m = 1024;
  const BranchTree tree = parallel_forward_pass(p, &model, m, 8, rng);
  const double dt = tree.dt();
  for (int d = 1; d <= 8; ++d) {
    Vector sum = Vector::Zero(2), sq = Vector::Zero(2);
    for (const NodeHandle h : tree.nodes_at(d)) {
      const TreeNode& n = tree.node(h);
      EXPECT_LE(n.child_count, 1);
      const Vector& xp = tree.node(*n.parent).state;
      EXPECT_EQ(n.edge->control, argmin_policy(p, (d - 1) * dt, xp, model.gradient(d, xp)));
      sum += n.edge->noise;
      sq += n.edge->noise.cwiseProduct(n.edge->noise);
    }
    for (int j = 0; j < 2; ++j) {
      const double mean = sum(j) / m;
      EXPECT_LT(std::abs(mean), 4.0 * std::sqrt(dt / m));
      EXPECT_NEAR(sq(j) / m - mean * mean, dt, 0.2 * dt);
    }
  }
}

TEST(SamplingMode, Parse) {
  EXPECT_EQ(parse_sampling_mode("rrt"), SamplingMode::kRrtBranched);
  EXPECT_EQ(parse_sampling_mode("rrt_branched"), SamplingMode::kRrtBranched);
  EXPECT_EQ(parse_sampling_mode("parallel"), SamplingMode::kParallelBaseline);
  EXPECT_EQ(parse_sampling_mode("parallel_baseline"), SamplingMode::kParallelBaseline);
  EXPECT_THROW(parse_sampling_mode("kd"), std::invalid_argument);
  EXPECT_EQ(parse_sampling_mode(to_string(SamplingMode::kParallelBaseline)),
            SamplingMode::kParallelBaseline);
}

}  // namespace
}  // namespace fbrrt
