#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fbrrt/types.hpp"

namespace fbrrt {

/// Stable handle to a tree node; survives removal of other nodes.
struct NodeHandle {
  int depth = 0;
  std::uint32_t slot = 0;

  friend auto operator<=>(const NodeHandle&, const NodeHandle&) = default;
};

/// Data attached to the edge that generated a node.
struct EdgeData {
  Vector drift;      // k_i = f(t_i, x_parent, u)
  Vector noise;      // w_i ~ N(0, dt I)
  Vector control;    // u that produced the drift
  double step_cost = 0.0;  // l(t_i, x_parent, u) * dt
};

struct TreeNode {
  std::uint64_t id = 0;
  int depth = 0;
  Vector state;
  std::optional<NodeHandle> parent;
  std::optional<EdgeData> edge;  // set iff parent is set
  double accumulated_cost = 0.0;
  int child_count = 0;
  bool alive = true;
};

/// Terminal edge of the root-to-node path of one depth-i node.
struct PathSample {
  NodeHandle node;
  Vector parent_state;  // x_{i-1}; empty at depth 0
  Vector drift;         // k_{i-1}; empty at depth 0
  Vector control;       // u_{i-1}; empty at depth 0
  Vector state;         // x_i
  double accumulated_cost = 0.0;
};

/**
 * Depth-indexed tree of Euler-Maruyama transitions. Each node at depth i
 * identifies the unique root-to-node path ending there; the collection of
 * such paths at depth i is the empirical path measure at t_i.
 */
class BranchTree {
 public:
  BranchTree(Vector root_state, int num_steps, double dt);

  int num_steps() const { return static_cast<int>(live_.size()) - 1; }
  double dt() const { return dt_; }
  int state_dim() const { return static_cast<int>(root_state_size_); }
  NodeHandle root() const { return NodeHandle{0, 0}; }

  const TreeNode& node(NodeHandle handle) const;
  /// Live nodes at `depth` in insertion order.
  std::span<const NodeHandle> nodes_at(int depth) const;
  int width(int depth) const { return static_cast<int>(nodes_at(depth).size()); }
  std::size_t live_count() const;

  /// Inserts a child of `parent` (which must live at `depth`) at depth + 1.
  NodeHandle add_edge(int depth, NodeHandle parent, EdgeData edge, Vector child_state);
  /// Removes a childless non-root node and its parent edge.
  void remove_leaf(NodeHandle handle);

  std::vector<PathSample> paths_at_time(int depth) const;
  /// Handles from the root down to `handle`, inclusive.
  std::vector<NodeHandle> path_to(NodeHandle handle) const;

 private:
  TreeNode& mutable_node(NodeHandle handle);

  double dt_;
  Eigen::Index root_state_size_;
  std::uint64_t next_id_ = 0;
  std::vector<std::vector<TreeNode>> slots_;
  std::vector<std::vector<NodeHandle>> live_;
};

/// One row per live node: id, depth, parent id (-1 at root), accumulated cost, state.
void write_tree_csv(std::ostream& out, const BranchTree& tree);

}  // namespace fbrrt
