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

#ifndef TPPLAN_PIPELINE_H_
#define TPPLAN_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpplan/cost_model.h"
#include "tpplan/generators.h"
#include "tpplan/status.h"
#include "tpplan/tensor_spec.h"

namespace tpplan {

inline constexpr const char* kClusterConfigEnv = "TPPLAN_CLUSTER_CONFIG";

struct RunConfig {
  std::string graph_path;
  std::string mesh;          // "MxN"; empty uses the cluster config, then 1x2
  std::string cluster_path;  // empty uses $TPPLAN_CLUSTER_CONFIG when set
  std::string out_dir = ".";
  int min_duplicates = 2;
  std::optional<int64_t> fusion_threshold;
  std::optional<int64_t> chunk_size;
  DType dtype = DType::kF64;
  int trials = 10;
  int jobs = 1;
  uint64_t seed = 0;
  size_t table_limit = 16;
  std::optional<double> tolerance;  // default 1e-10 (f64) or 1e-5 (f32)

  double effective_tolerance() const;
};

// Cluster config file, then mesh and packing overrides. Throws kConfig or kIo.
ClusterSpec ResolveCluster(const RunConfig& config);

// Effective configuration for reports, without the worker count.
nlohmann::json RunConfigToJson(const RunConfig& config, const ClusterSpec& mesh);

struct PipelineResult {
  bool verified = false;
  nlohmann::json plan;
  nlohmann::json verification;
  double wall_seconds = 0;
};

// load -> trim -> prune -> derive -> rewrite -> verify. Writes plan.json,
// parallel_graph.json and verify.json (deterministic) plus timing.json into
// config.out_dir.
PipelineResult RunPipeline(const RunConfig& config);

struct BenchRow {
  int layers = 0;
  size_t graph_nodes = 0;
  size_t raw_nodes = 0;
  size_t unique_subgraphs = 0;
  size_t shared_subgraphs = 0;
  size_t shared_candidates = 0;  // candidates of the repeated block(s)
  size_t candidates = 0;
  size_t routing_steps = 0;
  size_t prune_steps = 0;
  double wall_seconds = 0;
};

std::vector<BenchRow> BenchScaling(const std::vector<int>& layer_counts, const ClusterSpec& mesh,
                                   const TransformerConfig& base, int jobs = 1);
std::string BenchCsv(const std::vector<BenchRow>& rows);

// {"error": {"kind": ..., "message": ...}}
nlohmann::json ErrorJson(ErrorKind kind, const std::string& message);
// 2 for input and configuration problems, 3 for everything else.
int ExitCodeFor(ErrorKind kind);

}  // namespace tpplan

#endif  // TPPLAN_PIPELINE_H_
