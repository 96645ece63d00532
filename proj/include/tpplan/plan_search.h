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

#ifndef TPPLAN_PLAN_SEARCH_H_
#define TPPLAN_PLAN_SEARCH_H_

#include <cstddef>
#include <iterator>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tpplan/cost_model.h"
#include "tpplan/graph.h"
#include "tpplan/pruning.h"
#include "tpplan/routed_plan.h"

namespace tpplan {

// Shard states a weight may take: {R, S0, S1}, or {R, S0} for 1-D weights.
std::vector<ShardSpec> WeightOptions(const TensorSpec& weight);

// Lazily enumerates the Cartesian product of weight options over the
// weight-bearing template nodes of a subgraph. The first weight is the most
// significant digit, so index 0 is all-Replica.
class PlanEnumerator {
 public:
  PlanEnumerator(const GroupedGraph& graph, const Subgraph& subgraph);

  // Throws kBadConfig when the product does not fit in 64 bits.
  size_t size() const;
  CandidatePlan at(size_t index) const;
  const std::vector<std::string>& weight_nodes() const { return weight_nodes_; }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = CandidatePlan;
    using difference_type = std::ptrdiff_t;
    using pointer = const CandidatePlan*;
    using reference = const CandidatePlan&;

    iterator() = default;
    iterator(const PlanEnumerator* owner, size_t index);
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    iterator operator++(int);
    bool operator==(const iterator& other) const { return index_ == other.index_; }

   private:
    const PlanEnumerator* owner_ = nullptr;
    size_t index_ = 0;
    CandidatePlan current_;
  };

  iterator begin() const { return iterator(this, 0); }
  iterator end() const { return iterator(this, size()); }

 private:
  std::vector<std::string> weight_nodes_;
  std::vector<std::vector<ShardSpec>> options_;
  size_t size_ = 1;
  bool overflow_ = false;
};

PlanEnumerator EnumerateAllPlans(const GroupedGraph& graph, const Subgraph& subgraph);

struct RoutingFailure {
  std::string node;  // first GraphNode that could not be routed
  std::string reason;
};

using RouteResult = std::variant<RoutedPlan, RoutingFailure>;

// Validates candidate plans of one subgraph by breadth-first pattern routing.
// A member is routed once all its producers are resolved; it takes the
// cheapest registered pattern that honors its weight assignment and whose
// inputs are reachable by one conversion from the producers' states. Inputs
// from outside the subgraph arrive as Replica and every output leaving it is
// converted back to Replica.
class PatternRouter {
 public:
  PatternRouter(const GroupedGraph& graph, const Subgraph& subgraph, const ClusterSpec& mesh);

  // `steps`, when given, accumulates member visits.
  RouteResult Route(const CandidatePlan& plan, size_t* steps = nullptr) const;

 private:
  struct Member {
    const RawNode* node = nullptr;
    std::string graph_node;
    std::vector<int> producers;  // local index per input, -1 outside
    std::vector<TensorSpec> inputs;
    std::vector<ShardingPattern> patterns;  // divisibility-filtered
    std::vector<int> consumers;             // local indices
    bool exits = false;
  };

  const ClusterSpec& mesh_;
  std::vector<Member> members_;  // compute topological order
  std::vector<int> initial_;
};

RouteResult PatternRouting(const GroupedGraph& graph, const Subgraph& subgraph,
                           const CandidatePlan& plan, const ClusterSpec& mesh);

struct PlanCostEntry {
  size_t index = 0;
  std::string plan;
  bool valid = false;
  double cost = 0;
  int splits = 0;
  std::string failure;  // GraphNode id when invalid
};

struct SubgraphResult {
  std::string name;
  Subgraph::Kind kind = Subgraph::Kind::kResidual;
  size_t multiplicity = 1;
  size_t candidates = 0;
  size_t valid = 0;
  RoutedPlan best;
  double replica_cost = 0;
  std::vector<PlanCostEntry> table;  // valid first, then by cost, splits, index
};

struct SearchStats {
  size_t candidates = 0;
  size_t valid = 0;
  size_t routing_steps = 0;
  size_t unique_subgraphs = 0;
  PruneStats prune;
  double wall_seconds = 0;  // reporting only, never part of deterministic output
};

struct BestPlanReport {
  PruneResult prune;
  std::vector<SubgraphResult> subgraphs;  // aligned with prune.subgraphs
  double total_cost = 0;                  // sum of best cost x multiplicity
  double replica_cost = 0;                // same sum for the all-Replica plan
  std::map<std::string, ShardSpec> assignments;  // weight GraphNode -> state
  SearchStats stats;
};

struct SearchOptions {
  int min_duplicates = 2;
  int jobs = 1;
  size_t max_candidates = size_t{1} << 24;  // per subgraph
};

// Prunes, searches every subgraph independently and broadcasts each winner to
// all instances. Ties break toward fewer split weights, then enumeration order.
BestPlanReport DerivePlan(const GroupedGraph& graph, const ClusterSpec& mesh,
                          const SearchOptions& options = {});

// The winning subgraph plans instantiated for every instance, as one routed
// plan over the whole compute graph.
RoutedPlan ExpandPlan(const GroupedGraph& graph, const BestPlanReport& report);

// `table_limit` caps cost-table rows per subgraph (0 keeps all).
nlohmann::json BestPlanReportToJson(const BestPlanReport& report, size_t table_limit = 0,
                                    bool include_timing = false);

// Reads the `assignments` object of a plan report.
std::map<std::string, ShardSpec> AssignmentsFromJson(const nlohmann::json& doc);

// Routes the graph with fixed weight assignments (absent weights are Replica)
// using the same pruning as `min_duplicates`; throws kNoValidPlan when some
// subgraph does not route.
BestPlanReport PlanFromAssignments(const GroupedGraph& graph, const ClusterSpec& mesh,
                                   const std::map<std::string, ShardSpec>& assignments,
                                   int min_duplicates = 2);

}  // namespace tpplan

#endif  // TPPLAN_PLAN_SEARCH_H_
