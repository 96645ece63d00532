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

#ifndef TPPLAN_COST_MODEL_H_
#define TPPLAN_COST_MODEL_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tpplan/gradient_packing.h"
#include "tpplan/routed_plan.h"
#include "tpplan/shard_spec.h"
#include "tpplan/tensor_spec.h"

namespace tpplan {

// Device mesh S(m,n): m worker nodes with n accelerators each.
struct ClusterSpec {
  int m = 1;
  int n = 1;
  double intra_bw = 150e9;  // bytes/s
  double inter_bw = 4e9;    // bytes/s
  std::map<CollectiveKind, double> efficiency = DefaultEfficiency();
  double overlap_fraction = 0.5;
  double setup_latency_s = 3e-5;
  int64_t fusion_threshold = kDefaultFusionThreshold;
  int64_t chunk_size = kDefaultChunkSize;

  int devices() const { return m * n; }
  double bandwidth() const { return m > 1 ? inter_bw : intra_bw; }
  double efficiency_of(CollectiveKind kind) const;
  // Throws kConfig.
  void Validate() const;

  static std::map<CollectiveKind, double> DefaultEfficiency();
};

// Parses "MxN" (case-insensitive 'x'). Throws kConfig.
std::pair<int, int> ParseMesh(std::string_view text);
std::string MeshString(const ClusterSpec& mesh);

// Fields absent from the document keep their defaults. Throws kConfig.
ClusterSpec ClusterSpecFromJson(const nlohmann::json& doc);
ClusterSpec LoadClusterSpec(const std::string& path);
nlohmann::json ClusterSpecToJson(const ClusterSpec& mesh);

// Ring-model transfer time of one collective, excluding setup latency.
double CollectiveCost(CollectiveKind kind, const TensorSpec& tensor, const ClusterSpec& mesh);
double CollectiveCost(const Collective& collective, const TensorSpec& tensor,
                      const ClusterSpec& mesh);
// Transfer time plus setup latency when the call moves data at all.
double CollectiveCallCost(const Collective& collective, const TensorSpec& tensor,
                          const ClusterSpec& mesh);

// Forward: longest root-to-leaf chain of activation collectives. Backward:
// AllReduce of every Replica trainable weight after fusion, discounted by the
// overlap fraction.
CostReport PlanCost(const RoutedPlan& plan, const ClusterSpec& mesh);

// Backward gradient synchronization time before overlap.
double GradientSyncCost(const std::vector<GradientSpec>& gradients, const ClusterSpec& mesh);

nlohmann::json CostReportToJson(const CostReport& report);

}  // namespace tpplan

#endif  // TPPLAN_COST_MODEL_H_
