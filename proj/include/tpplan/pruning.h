/* Copyright 2026 The tpplan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef TPPLAN_PRUNING_H_
#define TPPLAN_PRUNING_H_

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tpplan/graph.h"

namespace tpplan {

struct PrefixGroup {
  std::string prefix;
  std::vector<std::string> members;  // GraphNode ids, topological
};

// Prefix groups of GraphNode ids per scope depth (1..max_depth). A node
// appears once on every level not deeper than its own id.
struct NodeTree {
  int max_depth = 0;
  std::map<int, std::vector<PrefixGroup>> levels;  // groups sorted by prefix

  const std::vector<PrefixGroup>& level(int depth) const;
};

NodeTree BuildNodeTree(const GroupedGraph& graph);

// Coarse structural signature of one prefix group.
struct BlockSignature {
  std::vector<std::string> ops;            // sorted multiset of member ops
  std::vector<std::string> weight_shapes;  // sorted multiset
  size_t internal_edges = 0;

  auto operator<=>(const BlockSignature&) const = default;
  std::string ToString() const;
};

struct SimilarBlocks {
  BlockSignature signature;
  size_t count = 0;
  std::vector<std::string> prefixes;
};

// Buckets the groups of one tree level by signature, sorted by signature.
// Returns an empty list for an empty or out-of-range level.
std::vector<SimilarBlocks> FindSimilarBlocks(const GroupedGraph& graph, const NodeTree& tree,
                                             int depth);

struct SubgraphInstance {
  std::string prefix;
  std::vector<std::string> nodes;  // aligned with Subgraph::template_nodes
};

// One search unit. `instances[0]` is the representative; every instance is
// isomorphic to it once the prefix is substituted.
struct Subgraph {
  enum class Kind { kShared, kResidual, kWholeGraph };

  Kind kind = Kind::kResidual;
  std::vector<std::string> template_nodes;  // GraphNode ids of instances[0]
  std::vector<std::pair<size_t, size_t>> internal_edges;  // template indices
  std::vector<SubgraphInstance> instances;
  std::vector<size_t> entry_nodes;  // template nodes with producers outside
  std::vector<size_t> exit_nodes;   // template nodes with consumers outside

  size_t multiplicity() const { return instances.size(); }
  std::string name() const;  // representative prefix
};

struct PruneStats {
  size_t graph_nodes = 0;
  size_t search_nodes = 0;       // template nodes summed over all subgraphs
  size_t shared_subgraphs = 0;   // unique repeated blocks
  size_t residual_subgraphs = 0;
  size_t steps = 0;              // node visits, for scaling checks

  double ratio() const {
    return graph_nodes ? static_cast<double>(search_nodes) / graph_nodes : 0.0;
  }
};

struct PruneResult {
  std::vector<Subgraph> subgraphs;  // shared first, then residuals, topological
  PruneStats stats;
};

// Finds repeated blocks by walking the node tree from the deepest level up.
// A group survives while at least `min_duplicates` isomorphic copies exist and
// all its child groups survived; the shallowest surviving groups become shared
// subgraphs. Remaining GraphNodes become one residual subgraph each.
// min_duplicates == 1 returns the whole graph as a single unit.
PruneResult PruneGraph(const GroupedGraph& graph, int min_duplicates);

}  // namespace tpplan

#endif  // TPPLAN_PRUNING_H_
