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

#ifndef TPPLAN_INTERPRETER_H_
#define TPPLAN_INTERPRETER_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpplan/graph.h"
#include "tpplan/shard_spec.h"
#include "tpplan/tensor.h"

namespace tpplan {

template <typename T>
using ValueMap = std::map<std::string, Tensor<T>>;

// Full weight of `node`, drawn from (seed, node name) and scaled by
// 1/sqrt(shape[0]).
template <typename T>
Tensor<T> InitWeight(const RawNode& node, uint64_t seed);

// Uniform(-1, 1) values for every Input node of `graph`.
template <typename T>
ValueMap<T> RandomInputs(const RawGraph& graph, uint64_t seed);

// Output names: Output nodes, or compute leaves when there are none.
std::vector<std::string> GraphOutputs(const RawGraph& graph);

// Runs one operator. `weight` is the local weight (nullptr when absent).
// Throws kShapeMismatch when operands disagree with each other or with the
// node's declared output shape.
template <typename T>
Tensor<T> EvalNode(const RawNode& node, const std::vector<const Tensor<T>*>& inputs,
                   const Tensor<T>* weight);

// Applies one collective across participants; `inputs[i]` belongs to the i-th
// participant. Throws kProtocol when the inputs disagree in shape.
template <typename T>
std::vector<Tensor<T>> RunCollective(const Collective& collective,
                                     const std::vector<Tensor<T>>& inputs);

// Single-device reference run of a schema-1 graph (auxiliary nodes are
// trimmed first). Returns the values of GraphOutputs.
template <typename T>
ValueMap<T> ExecuteSingle(const RawGraph& graph, const ValueMap<T>& inputs, uint64_t seed);

// Lock-step run of a schema-2 per-device graph. Every device draws the same
// full weights and keeps its shard. Returns device 0's view of `outputs`
// (default GraphOutputs) after their trailing collectives.
template <typename T>
ValueMap<T> ExecuteSharded(const RawGraph& pgraph, const ValueMap<T>& inputs, uint64_t seed,
                           const std::vector<std::string>& outputs = {});

struct EquivalenceReport {
  int trials = 0;
  double tolerance = 0;
  DType dtype = DType::kF64;
  std::map<std::string, double> max_error;  // per output
  double worst = 0;
  bool pass = false;
};

// Compares ExecuteSingle(graph) and ExecuteSharded(pgraph) over `trials`
// seeded input draws. Errors during execution count as failures.
EquivalenceReport CheckEquivalence(const RawGraph& graph, const RawGraph& pgraph, int trials,
                                   double tolerance, DType dtype, uint64_t seed = 0);

nlohmann::json EquivalenceReportToJson(const EquivalenceReport& report);

}  // namespace tpplan

#endif  // TPPLAN_INTERPRETER_H_
