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

#ifndef TPPLAN_GRAPH_H_
#define TPPLAN_GRAPH_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpplan/shard_spec.h"
#include "tpplan/tensor_spec.h"

namespace tpplan {

enum class OpKind {
  kMatMul,
  kElementwise,
  kLayerNorm,
  kSoftmax,
  kEmbedding,
  kReshape,
  kInput,
  kOutput,
  kAuxiliary,
  kCollective,
};

std::string_view OpKindName(OpKind op);
// Case-insensitive. Returns nullopt for unknown names.
std::optional<OpKind> ParseOpKind(std::string_view name);

// Node attributes. Known keys:
//   "fn"        Elementwise function: add (default), mul, gelu, relu, tanh
//   "mode"      MatMul variant: linear (default), attn_scores, attn_context
//   "head_dim"  attention head width for the attention MatMul variants
//   "vocab"     global row count of an Embedding table
//   "row_offset" first table row held locally by a sharded Embedding
//   "shape"     Reshape target, comma separated
using Attrs = std::map<std::string, std::string>;

// One operator of a framework graph. Schema-v2 (rewritten) graphs also set
// `device`, and optionally `weight_shard` and `collective`.
struct RawNode {
  std::string name;
  OpKind op = OpKind::kElementwise;
  std::vector<std::string> inputs;
  std::optional<TensorSpec> weight;
  TensorSpec output;
  Attrs attrs;

  int device = -1;
  std::optional<ShardSpec> weight_shard;
  std::optional<Collective> collective;
  std::vector<int> participants;

  bool operator==(const RawNode&) const = default;
};

// Splits "a/b/c" into {"a","b","c"}.
std::vector<std::string_view> SplitScopes(std::string_view name);
// "a/b/c" -> "a/b"; "" when there is no parent scope.
std::string ParentScope(std::string_view name);
int ScopeDepth(std::string_view name);

// A validated DAG of RawNodes, kept in canonical order: topological, with ties
// broken by (device, name).
class RawGraph {
 public:
  // Validates uniqueness, references and acyclicity.
  // Throws kParse, kDanglingRef or kCycle.
  static RawGraph Build(std::vector<RawNode> nodes, int version = 1, int device_count = 1);

  const std::vector<RawNode>& nodes() const { return nodes_; }
  int version() const { return version_; }
  int device_count() const { return device_count_; }
  size_t size() const { return nodes_.size(); }

  bool contains(std::string_view name, int device = -1) const;
  const RawNode& node(std::string_view name, int device = -1) const;
  // Names of nodes that consume `name` (same device).
  const std::vector<std::string>& consumers(std::string_view name, int device = -1) const;
  size_t edge_count() const;

  bool operator==(const RawGraph& other) const {
    return version_ == other.version_ && device_count_ == other.device_count_ &&
           nodes_ == other.nodes_;
  }

 private:
  using Key = std::pair<int, std::string>;
  std::vector<RawNode> nodes_;
  std::map<Key, size_t, std::less<>> index_;
  std::vector<std::vector<std::string>> consumers_;
  int version_ = 1;
  int device_count_ = 1;
};

// A group of compute operators sharing a name scope; the unit of sharding
// decisions. At most one member carries a weight.
struct GraphNode {
  std::string id;
  std::string scope;
  std::vector<std::string> members;  // compute RawNode names, topological
  OpKind op = OpKind::kElementwise;
  std::optional<TensorSpec> weight;
  std::string weight_member;
  std::vector<std::string> fan_in;   // GraphNode ids, sorted
  std::vector<std::string> fan_out;  // GraphNode ids, sorted
  TensorSpec activation;

  bool operator==(const GraphNode&) const = default;
};

class GroupedGraph {
 public:
  GroupedGraph(RawGraph compute, std::vector<GraphNode> nodes, std::vector<RawNode> side_table);

  // GraphNodes in topological order (ties by id).
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const GraphNode& node(std::string_view id) const;
  bool contains(std::string_view id) const;
  size_t index_of(std::string_view id) const;

  // The trimmed compute graph: Auxiliary nodes removed, bypass edges stitched.
  const RawGraph& compute() const { return compute_; }
  // Auxiliary nodes removed by trimming, in original canonical order.
  const std::vector<RawNode>& side_table() const { return side_table_; }
  const std::string& group_of(std::string_view member) const;

  std::vector<std::pair<std::string, std::string>> edges() const;
  std::vector<std::string> roots() const;
  std::vector<std::string> leaves() const;
  // Maximum number of '/'-separated components among GraphNode ids.
  int depth() const;

  bool operator==(const GroupedGraph& other) const {
    return nodes_ == other.nodes_ && compute_ == other.compute_;
  }

 private:
  RawGraph compute_;
  std::vector<GraphNode> nodes_;
  std::vector<RawNode> side_table_;
  std::map<std::string, size_t, std::less<>> index_;
  std::map<std::string, std::string, std::less<>> group_of_;
};

// Removes Auxiliary nodes and clusters the remaining operators into
// GraphNodes by their parent name scope. Throws kEmptyGraph when nothing
// but auxiliary nodes exists.
GroupedGraph TrimAndGroup(const RawGraph& graph);

// The compute members of a grouped graph as a plain RawGraph.
// TrimAndGroup(Ungroup(g)) == g.
RawGraph Ungroup(const GroupedGraph& graph);

}  // namespace tpplan

#endif  // TPPLAN_GRAPH_H_
