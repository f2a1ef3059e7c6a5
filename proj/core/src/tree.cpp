#include "fbrrt/tree.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fbrrt {

BranchTree::BranchTree(Vector root_state, int num_steps, double dt)
    : dt_(dt), root_state_size_(root_state.size()) {
  if (num_steps < 1) throw std::invalid_argument("tree needs at least one time step");
  if (!(dt >= 0.0)) throw std::invalid_argument("tree time step must be nonnegative");
  if (root_state.size() == 0 || !root_state.allFinite()) {
    throw std::invalid_argument("tree root state must be finite and nonempty");
  }
  slots_.resize(static_cast<std::size_t>(num_steps) + 1);
  live_.resize(static_cast<std::size_t>(num_steps) + 1);
  TreeNode root;
  root.id = next_id_++;
  root.state = std::move(root_state);
  slots_[0].push_back(std::move(root));
  live_[0].push_back(NodeHandle{0, 0});
}

const TreeNode& BranchTree::node(NodeHandle handle) const {
  if (handle.depth < 0 || handle.depth > num_steps() ||
      handle.slot >= slots_[static_cast<std::size_t>(handle.depth)].size()) {
    throw std::out_of_range("tree: unknown node handle");
  }
  const TreeNode& n = slots_[static_cast<std::size_t>(handle.depth)][handle.slot];
  if (!n.alive) throw std::out_of_range("tree: node handle refers to a removed node");
  return n;
}

TreeNode& BranchTree::mutable_node(NodeHandle handle) {
  return const_cast<TreeNode&>(std::as_const(*this).node(handle));
}

std::span<const NodeHandle> BranchTree::nodes_at(int depth) const {
  if (depth < 0 || depth > num_steps()) {
    throw std::out_of_range("tree: depth " + std::to_string(depth) + " out of range");
  }
  return live_[static_cast<std::size_t>(depth)];
}

std::size_t BranchTree::live_count() const {
  std::size_t count = 0;
  for (const auto& level : live_) count += level.size();
  return count;
}

NodeHandle BranchTree::add_edge(int depth, NodeHandle parent, EdgeData edge, Vector child_state) {
  if (depth < 0 || depth >= num_steps()) {
    throw std::out_of_range("tree: cannot add an edge below depth " + std::to_string(depth));
  }
  if (parent.depth != depth) throw std::invalid_argument("tree: parent is not at the given depth");
  TreeNode& p = mutable_node(parent);
  if (child_state.size() != root_state_size_) {
    throw std::invalid_argument("tree: child state has wrong dimension");
  }
  auto& level = slots_[static_cast<std::size_t>(depth) + 1];
  if (level.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("tree: depth arena exhausted");
  }
  TreeNode child;
  child.id = next_id_++;
  child.depth = depth + 1;
  child.state = std::move(child_state);
  child.parent = parent;
  child.accumulated_cost = p.accumulated_cost + edge.step_cost;
  child.edge = std::move(edge);
  ++p.child_count;
  const NodeHandle handle{depth + 1, static_cast<std::uint32_t>(level.size())};
  level.push_back(std::move(child));
  live_[static_cast<std::size_t>(depth) + 1].push_back(handle);
  return handle;
}

void BranchTree::remove_leaf(NodeHandle handle) {
  TreeNode& n = mutable_node(handle);
  if (!n.parent) throw std::invalid_argument("tree: the root cannot be removed");
  if (n.child_count != 0) {
    throw std::logic_error("tree: node " + std::to_string(n.id) + " has " +
                           std::to_string(n.child_count) + " children and cannot be removed");
  }
  --mutable_node(*n.parent).child_count;
  n.alive = false;
  n.state.resize(0);
  n.edge.reset();
  auto& level = live_[static_cast<std::size_t>(handle.depth)];
  level.erase(std::find(level.begin(), level.end(), handle));
}

std::vector<PathSample> BranchTree::paths_at_time(int depth) const {
  const auto handles = nodes_at(depth);
  if (handles.empty()) {
    throw std::invalid_argument("tree: no paths at depth " + std::to_string(depth));
  }
  std::vector<PathSample> paths;
  paths.reserve(handles.size());
  for (const NodeHandle h : handles) {
    const TreeNode& n = node(h);
    PathSample sample;
    sample.node = h;
    sample.state = n.state;
    sample.accumulated_cost = n.accumulated_cost;
    if (n.parent) {
      sample.parent_state = node(*n.parent).state;
      sample.drift = n.edge->drift;
      sample.control = n.edge->control;
    }
    paths.push_back(std::move(sample));
  }
  return paths;
}

std::vector<NodeHandle> BranchTree::path_to(NodeHandle handle) const {
  std::vector<NodeHandle> path{handle};
  std::optional<NodeHandle> parent = node(handle).parent;
  while (parent) {
    path.push_back(*parent);
    parent = node(*parent).parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

void write_tree_csv(std::ostream& out, const BranchTree& tree) {
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "id,depth,parent_id,accumulated_cost";
  for (int j = 0; j < tree.state_dim(); ++j) out << ",x" << j + 1;
  out << '\n';
  for (int depth = 0; depth <= tree.num_steps(); ++depth) {
    for (const NodeHandle h : tree.nodes_at(depth)) {
      const TreeNode& n = tree.node(h);
      const long long parent_id =
          n.parent ? static_cast<long long>(tree.node(*n.parent).id) : -1LL;
      out << n.id << ',' << n.depth << ',' << parent_id << ',' << n.accumulated_cost;
      for (Eigen::Index j = 0; j < n.state.size(); ++j) out << ',' << n.state(j);
      out << '\n';
    }
  }
  out.precision(precision);
}

}  // namespace fbrrt
