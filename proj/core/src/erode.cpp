#include "fbrrt/erode.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace fbrrt {

bool ErodeReport::exhausted() const {
  return std::any_of(deficit.begin(), deficit.end(), [](int d) { return d > 0; });
}

ErodeReport erode(BranchTree& tree, std::span<const DepthHeuristics> heuristics, int target) {
  const int steps = tree.num_steps();
  if (target < 1) throw std::invalid_argument("erode: target width must be positive");
  if (static_cast<int>(heuristics.size()) != steps + 1) {
    throw std::invalid_argument("erode: need heuristics for every depth 0..N");
  }
  ErodeReport report;
  report.removed.assign(static_cast<std::size_t>(steps) + 1, 0);
  report.deficit.assign(static_cast<std::size_t>(steps) + 1, 0);

  struct Candidate {
    double rho;
    std::uint64_t id;
    NodeHandle handle;
  };

  for (int depth = steps; depth >= 1; --depth) {
    const DepthHeuristics& h = heuristics[static_cast<std::size_t>(depth)];
    if (h.nodes.size() != h.rho.size()) {
      throw std::invalid_argument("erode: heuristic nodes and values disagree in size");
    }
    std::map<NodeHandle, double> rho_of;
    for (std::size_t j = 0; j < h.nodes.size(); ++j) rho_of[h.nodes[j]] = h.rho[j];

    std::vector<Candidate> order;
    for (const NodeHandle node : tree.nodes_at(depth)) {
      const auto it = rho_of.find(node);
      if (it == rho_of.end()) {
        throw std::invalid_argument("erode: missing heuristic for a node at depth " +
                                    std::to_string(depth));
      }
      order.push_back({it->second, tree.node(node).id, node});
    }
    std::sort(order.begin(), order.end(), [](const Candidate& a, const Candidate& b) {
      if (a.rho != b.rho) return a.rho > b.rho;
      return a.id > b.id;
    });

    // The minimum-rho node is never a candidate.
    for (std::size_t j = 0; j + 1 < order.size(); ++j) {
      const Candidate& c = order[j];
      if (tree.width(depth) <= target) break;
      if (tree.node(c.handle).child_count == 0) {
        tree.remove_leaf(c.handle);
        ++report.removed[static_cast<std::size_t>(depth)];
      }
    }
    report.deficit[static_cast<std::size_t>(depth)] = std::max(0, tree.width(depth) - target);
  }
  return report;
}

}  // namespace fbrrt
