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

#ifndef TPPLAN_ROUTED_PLAN_H_
#define TPPLAN_ROUTED_PLAN_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tpplan/shard_spec.h"
#include "tpplan/sharding_patterns.h"
#include "tpplan/tensor_spec.h"

namespace tpplan {

// One weight shard state per weight-bearing template GraphNode.
struct CandidatePlan {
  size_t index = 0;                       // position in enumeration order
  std::vector<std::string> weight_nodes;  // template GraphNode ids
  std::vector<ShardSpec> assignments;     // aligned with weight_nodes

  int split_count() const;
  ShardSpec assignment_for(const std::string& node) const;  // Replica if absent
  std::string ToString() const;                              // e.g. "R,S1,S0"
};

struct MemberRoute {
  std::string member;      // compute RawNode of the representative instance
  std::string graph_node;  // owning GraphNode
  ShardingPattern pattern;
  ShardSpec output_state;  // after the pattern's collective
  TensorSpec output;       // full logical output tensor
  std::vector<int> producers;    // route index per input, -1 when outside
  std::vector<int> conversions;  // conversion index per input, -1 when none
  int exit_conversion = -1;      // conversion back to Replica at the boundary
};

struct Conversion {
  std::string producer;  // member name
  ShardSpec from;
  ShardSpec to;
  Collective collective;
  TensorSpec tensor;
};

struct GradientSpec {
  std::string member;
  TensorSpec tensor;
};

struct CostReport {
  double forward_comm = 0;
  double backward_comm = 0;
  double effective_backward = 0;
  double total = 0;
  std::map<CollectiveKind, double> bytes_by_collective;
  size_t collective_calls = 0;
};

struct RoutedPlan {
  CandidatePlan plan;
  std::vector<MemberRoute> routes;      // routing order
  std::vector<Conversion> conversions;  // first-use order, deduplicated
  std::vector<GradientSpec> gradients;  // trainable Replica weights
  CostReport cost;

  const MemberRoute* route_for(const std::string& member) const;
  // Non-Identity collectives the plan inserts: pattern collectives plus
  // conversions.
  size_t collective_count() const;
};

}  // namespace tpplan

#endif  // TPPLAN_ROUTED_PLAN_H_
