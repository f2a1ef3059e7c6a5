#pragma once

#include <span>
#include <vector>

#include "fbrrt/backward.hpp"
#include "fbrrt/tree.hpp"

namespace fbrrt {

struct ErodeReport {
  std::vector<int> removed;  // per depth 0..N
  std::vector<int> deficit;  // width - target left in place, per depth
  bool exhausted() const;
};

/**
 * Prunes depths N down to 1 toward width `target`. At each depth nodes are visited
 * in descending heuristic order (ties: larger node id first) and removed only if
 * childless. The lowest-heuristic node always survives. A depth whose candidates
 * run out keeps its surplus.
 */
ErodeReport erode(BranchTree& tree, std::span<const DepthHeuristics> heuristics, int target);

}  // namespace fbrrt
