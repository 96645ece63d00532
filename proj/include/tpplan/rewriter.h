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

#ifndef TPPLAN_REWRITER_H_
#define TPPLAN_REWRITER_H_

#include <map>
#include <string>
#include <vector>

#include "tpplan/cost_model.h"
#include "tpplan/graph.h"
#include "tpplan/plan_search.h"
#include "tpplan/routed_plan.h"

namespace tpplan {

// Per-device program of a routed plan, stored as a schema-2 RawGraph.
struct ParallelGraph {
  RawGraph graph;
  std::map<std::string, std::string> provenance;  // node name -> source GraphNode

  int devices() const { return graph.device_count(); }
  // Collective nodes in one device's program.
  size_t collective_count() const;
  std::vector<const RawNode*> device_nodes(int device) const;
};

// Emits one program per device: compute nodes with local output shapes and
// weight shard states, a Collective node after every pattern collective
// ("<member>/<kind>") and for every state conversion ("<producer>/to_<state>"),
// and the trimmed auxiliary nodes re-attached under an "owner" attribute.
// Throws kIndivisibleShard when a split axis does not divide by the device
// count.
ParallelGraph RewriteGraph(const GroupedGraph& graph, const RoutedPlan& plan,
                           const ClusterSpec& mesh);
ParallelGraph RewriteGraph(const GroupedGraph& graph, const BestPlanReport& report,
                           const ClusterSpec& mesh);

// Local shape of `tensor` in `state` on a mesh of `devices`.
std::vector<int64_t> LocalShape(const TensorSpec& tensor, const ShardSpec& state, int devices,
                                const std::string& node);

}  // namespace tpplan

#endif  // TPPLAN_REWRITER_H_
