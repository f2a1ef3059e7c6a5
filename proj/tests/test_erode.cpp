#include <algorithm>

#include <gtest/gtest.h>

#include "fbrrt/erode.hpp"
#include "fbrrt/forward.hpp"
#include "fbrrt/problem.hpp"
#include "support.hpp"

namespace fbrrt {
namespace {

EdgeData zero_edge() {
  EdgeData e;
  e.drift = Vector::Zero(1);
  e.noise = Vector::Zero(1);
  e.control = Vector::Zero(1);
  return e;
}

/// Heuristics for every live node: rho given by a function of the node.
template <typename F>
std::vector<DepthHeuristics> heuristics_from(const BranchTree& tree, F rho) {
  std::vector<DepthHeuristics> h(static_cast<std::size_t>(tree.num_steps()) + 1);
  for (int d = 1; d <= tree.num_steps(); ++d) {
    for (const NodeHandle n : tree.nodes_at(d)) {
      h[static_cast<std::size_t>(d)].nodes.push_back(n);
      h[static_cast<std::size_t>(d)].rho.push_back(rho(tree.node(n)));
    }
  }
  return h;
}

BranchTree sampled_tree(int width, int steps, std::uint64_t seed) {
  const SocProblem p = make_double_integrator();
  ForwardConfig cfg;
  cfg.roi = p.region_of_interest;
  cfg.eps_rrt = 1.0;
  cfg.eps_opt = 0.0;
  BranchTree tree(p.initial_state, steps, p.horizon / steps);
  Rng rng(seed);
  forward_pass(tree, nullptr, p, cfg, width, rng);
  return tree;
}

double terminal_like(const TreeNode& n) { return n.accumulated_cost + n.state.squaredNorm(); }

TEST(Erode, NoRemovalAtFullWidth) {
  BranchTree tree = sampled_tree(32, 6, 1);
  const auto h = heuristics_from(tree, terminal_like);
  const ErodeReport r = erode(tree, h, 32);
  for (int d = 0; d <= 6; ++d) EXPECT_EQ(r.removed[static_cast<std::size_t>(d)], 0);
  EXPECT_EQ(tree.live_count(), 1u + 6u * 32u);
  EXPECT_FALSE(r.exhausted());
}

TEST(Erode, HandExample) {
  // Depth 1: four leaves with rho 3, 1, 4, 1 (ids 1..4); erode to two.
  BranchTree tree(Vector::Zero(1), 1, 1.0);
  std::vector<NodeHandle> nodes;
  for (int j = 0; j < 4; ++j) nodes.push_back(tree.add_edge(0, tree.root(), zero_edge(), Vector::Zero(1)));
  std::vector<DepthHeuristics> h(2);
  h[1].nodes = nodes;
  h[1].rho = {3.0, 1.0, 4.0, 1.0};
  const ErodeReport r = erode(tree, h, 2);
  EXPECT_EQ(r.removed[1], 2);
  const auto live = tree.nodes_at(1);
  ASSERT_EQ(live.size(), 2u);
  EXPECT_EQ(live[0], nodes[1]);
  EXPECT_EQ(live[1], nodes[3]);

  // Tie at the cut: rho (1, 2, 2); the newer of the tied pair goes first.
  BranchTree tie(Vector::Zero(1), 1, 1.0);
  std::vector<NodeHandle> t;
  for (int j = 0; j < 3; ++j) t.push_back(tie.add_edge(0, tie.root(), zero_edge(), Vector::Zero(1)));
  std::vector<DepthHeuristics> th(2);
  th[1].nodes = t;
  th[1].rho = {1.0, 2.0, 2.0};
  erode(tie, th, 2);
  ASSERT_EQ(tie.width(1), 2);
  EXPECT_EQ(tie.nodes_at(1)[0], t[0]);
  EXPECT_EQ(tie.nodes_at(1)[1], t[1]);
}

TEST(Erode, ParentsWithChildrenSurvive) {
  // Depth 1: the best node has a child; the other two are pruned.
  BranchTree tree(Vector::Zero(1), 2, 1.0);
  const NodeHandle a = tree.add_edge(0, tree.root(), zero_edge(), Vector::Zero(1));
  const NodeHandle b = tree.add_edge(0, tree.root(), zero_edge(), Vector::Zero(1));
  const NodeHandle c = tree.add_edge(0, tree.root(), zero_edge(), Vector::Zero(1));
  tree.add_edge(1, a, zero_edge(), Vector::Zero(1));
  std::vector<DepthHeuristics> h(3);
  h[1].nodes = {a, b, c};
  h[1].rho = {1.0, 5.0, 9.0};
  h[2].nodes = {tree.nodes_at(2)[0]};
  h[2].rho = {0.0};
  const ErodeReport r = erode(tree, h, 1);
  EXPECT_EQ(r.removed[2], 0);
  EXPECT_EQ(r.removed[1], 2);
  EXPECT_EQ(tree.width(1), 1);
  EXPECT_EQ(tree.nodes_at(1)[0], a);
  EXPECT_FALSE(r.exhausted());

  // Two of three nodes have children: the target of one cannot be met.
  BranchTree busy(Vector::Zero(1), 2, 1.0);
  const NodeHandle p = busy.add_edge(0, busy.root(), zero_edge(), Vector::Zero(1));
  const NodeHandle q = busy.add_edge(0, busy.root(), zero_edge(), Vector::Zero(1));
  const NodeHandle s = busy.add_edge(0, busy.root(), zero_edge(), Vector::Zero(1));
  const NodeHandle pc = busy.add_edge(1, p, zero_edge(), Vector::Zero(1));
  const NodeHandle qc = busy.add_edge(1, q, zero_edge(), Vector::Zero(1));
  std::vector<DepthHeuristics> bh(3);
  bh[1].nodes = {p, q, s};
  bh[1].rho = {3.0, 2.0, 1.0};
  bh[2].nodes = {pc, qc};
  bh[2].rho = {0.0, 1.0};
  const ErodeReport br = erode(busy, bh, 1);
  EXPECT_EQ(busy.width(2), 1);
  EXPECT_EQ(busy.width(1), 2);  // q freed, p still has a child, s is the minimum
  EXPECT_EQ(br.deficit[1], 1);
  EXPECT_TRUE(br.exhausted());
  EXPECT_EQ(busy.nodes_at(1)[0], p);
  EXPECT_EQ(busy.nodes_at(1)[1], s);
}

TEST(Erode, SampledTreeProperties) {
  const SocProblem p = make_double_integrator();
  BranchTree tree = sampled_tree(200, 10, 2);
  const auto h = heuristics_from(tree, terminal_like);
  std::vector<NodeHandle> minima(11);
  for (int d = 1; d <= 10; ++d) {
    const auto& hd = h[static_cast<std::size_t>(d)];
    const auto it = std::min_element(hd.rho.begin(), hd.rho.end());
    minima[static_cast<std::size_t>(d)] = hd.nodes[static_cast<std::size_t>(it - hd.rho.begin())];
  }
  const ErodeReport r = erode(tree, h, 100);
  EXPECT_EQ(tree.width(10), 100);
  for (int d = 1; d <= 10; ++d) {
    EXPECT_GE(tree.width(d), 100);
    EXPECT_EQ(tree.width(d), 100 + r.deficit[static_cast<std::size_t>(d)]);
    const auto live = tree.nodes_at(d);
    EXPECT_NE(std::find(live.begin(), live.end(), minima[static_cast<std::size_t>(d)]), live.end());
    for (const NodeHandle n : live) {
      const TreeNode& node = tree.node(n);
      const TreeNode& parent = tree.node(*node.parent);
      EXPECT_TRUE(parent.alive);
      EXPECT_EQ(parent.depth, d - 1);
      EXPECT_GE(node.accumulated_cost, parent.accumulated_cost);
    }
  }
  // child counts agree with the surviving edges
  for (int d = 0; d < 10; ++d) {
    for (const NodeHandle n : tree.nodes_at(d)) {
      int children = 0;
      for (const NodeHandle c : tree.nodes_at(d + 1)) children += *tree.node(c).parent == n;
      EXPECT_EQ(tree.node(n).child_count, children);
    }
  }
}

TEST(Erode, ChainTreeCascades) {
  const SocProblem p = make_double_integrator();
  Rng rng(3);
  BranchTree tree = parallel_forward_pass(p, nullptr, 64, 8, rng);
  // Chain rho equal to the chain's terminal cost so whole chains are pruned together.
  std::vector<double> chain_rho;
  for (const NodeHandle n : tree.nodes_at(8)) chain_rho.push_back(terminal_like(tree.node(n)));
  std::vector<DepthHeuristics> h(9);
  for (int d = 1; d <= 8; ++d) {
    for (const NodeHandle n : tree.nodes_at(8)) {
      const auto chain = tree.path_to(n);
      h[static_cast<std::size_t>(d)].nodes.push_back(chain[static_cast<std::size_t>(d)]);
      h[static_cast<std::size_t>(d)].rho.push_back(
          chain_rho[h[static_cast<std::size_t>(d)].nodes.size() - 1]);
    }
  }
  const ErodeReport r = erode(tree, h, 32);
  for (int d = 1; d <= 8; ++d) EXPECT_EQ(tree.width(d), 32);
  EXPECT_FALSE(r.exhausted());
}

TEST(Erode, MissingHeuristicThrows) {
  BranchTree tree = sampled_tree(8, 3, 4);
  auto h = heuristics_from(tree, terminal_like);
  h[2].nodes.pop_back();
  h[2].rho.pop_back();
  EXPECT_ANY_THROW(erode(tree, h, 4));
}

}  // namespace
}  // namespace fbrrt
