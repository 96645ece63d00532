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

#ifndef TPPLAN_SHARDING_PATTERNS_H_
#define TPPLAN_SHARDING_PATTERNS_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpplan/graph.h"
#include "tpplan/shard_spec.h"

namespace tpplan {

// How an operator runs when its operands arrive in given shard states:
//   SR(Y) = Comm(Op(SR(A), SR(B)))
// Every device applies the operator to its local operands, yielding
// `output_spec`; `collective` then restores equivalence.
struct ShardingPattern {
  OpKind op = OpKind::kElementwise;
  std::string name;
  std::vector<ShardSpec> input_specs;
  std::optional<ShardSpec> weight_spec;  // absent for weightless operators
  ShardSpec output_spec;                 // before the collective
  Collective collective;

  // Output state after the collective.
  ShardSpec result_spec() const;
  bool operator==(const ShardingPattern&) const = default;
};

// Operator facts that decide which patterns exist.
struct PatternQuery {
  std::vector<int> input_ranks;
  std::optional<int> weight_rank;
  int output_rank = 2;
  std::string mode;  // MatMul variant
  std::string fn;    // Elementwise function
};

// Registry lookup. Never empty: the all-Replica pattern is always first.
std::vector<ShardingPattern> PatternsFor(OpKind op, const PatternQuery& query);
// Registry entries for the common two-dimensional instance of `op`
// (MatMul: X (m,k) x W (k,n); others: one rank-2 input).
std::vector<ShardingPattern> PatternsFor(OpKind op);

PatternQuery QueryFor(const RawGraph& compute, const RawNode& node);

// State transition of one collective; throws kSpecMismatch if `pre` is not a
// state the collective accepts.
ShardSpec ApplyCollective(const ShardSpec& pre, const Collective& collective);

// Output state after the pattern plus its collective. Throws kSpecMismatch when
// `input_states` differ from the pattern's inputs.
std::pair<ShardSpec, Collective> InferOutput(const ShardingPattern& pattern,
                                             const std::vector<ShardSpec>& input_states);

// Single collective that moves `tensor` from one state to another:
//   R->R Identity, S(a)->S(a) Identity, S(a)->R AllGather(a), P->R AllReduceSum,
//   S(a)->S(b) AllToAll, P->S(a) ReduceScatter(a).
// Returns nullopt when no single collective exists (e.g. R->S, anything->P) or
// an axis is out of range for the tensor.
std::optional<Collective> ConversionCollective(const ShardSpec& from, const ShardSpec& to,
                                               const TensorSpec& tensor);

// True when every split axis the pattern touches divides evenly by `devices`.
bool PatternFits(const ShardingPattern& pattern, const std::vector<TensorSpec>& inputs,
                 const std::optional<TensorSpec>& weight, const TensorSpec& output, int devices);

bool SpecFits(const ShardSpec& spec, const TensorSpec& tensor, int devices);

}  // namespace tpplan

#endif  // TPPLAN_SHARDING_PATTERNS_H_
