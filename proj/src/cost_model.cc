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

#include "tpplan/cost_model.h"

#include <algorithm>
#include <charconv>
#include <vector>

#include "tpplan/graph_json.h"
#include "tpplan/status.h"

namespace tpplan {

namespace {

CollectiveKind EfficiencyKey(std::string key) {
  std::string k;
  for (char c : key) {
    if (c == '_' || c == '-') continue;
    k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (k == "allreduce" || k == "allreducesum") return CollectiveKind::kAllReduceSum;
  if (k == "allgather") return CollectiveKind::kAllGather;
  if (k == "reducescatter") return CollectiveKind::kReduceScatter;
  if (k == "alltoall") return CollectiveKind::kAllToAll;
  throw Error(ErrorKind::kConfig, "unknown efficiency key '" + key + "'");
}

const char* EfficiencyName(CollectiveKind kind) {
  switch (kind) {
    case CollectiveKind::kAllReduceSum:
      return "allreduce";
    case CollectiveKind::kAllGather:
      return "allgather";
    case CollectiveKind::kReduceScatter:
      return "reducescatter";
    case CollectiveKind::kAllToAll:
      return "alltoall";
    case CollectiveKind::kIdentity:
      break;
  }
  return "identity";
}

}  // namespace

std::map<CollectiveKind, double> ClusterSpec::DefaultEfficiency() {
  return {{CollectiveKind::kAllReduceSum, 1.0},
          {CollectiveKind::kAllGather, 1.2},
          {CollectiveKind::kReduceScatter, 1.2},
          {CollectiveKind::kAllToAll, 1.5}};
}

double ClusterSpec::efficiency_of(CollectiveKind kind) const {
  auto it = efficiency.find(kind);
  return it == efficiency.end() ? 1.0 : it->second;
}

void ClusterSpec::Validate() const {
  auto fail = [](const std::string& msg) { return Error(ErrorKind::kConfig, msg); };
  if (m < 1 || n < 1) {
    throw fail("mesh must have m >= 1 and n >= 1, got " + std::to_string(m) + "x" +
               std::to_string(n));
  }
  if (!(intra_bw > 0) || !(inter_bw > 0)) throw fail("bandwidths must be positive");
  for (const auto& [kind, f] : efficiency) {
    if (!(f >= 1.0)) {
      throw fail(std::string("efficiency factor for ") + EfficiencyName(kind) + " must be >= 1");
    }
  }
  if (efficiency_of(CollectiveKind::kAllReduceSum) != 1.0) {
    throw fail("allreduce efficiency is the reference and must be 1");
  }
  if (!(overlap_fraction >= 0 && overlap_fraction <= 1)) {
    throw fail("overlap_fraction must be in [0, 1]");
  }
  if (!(setup_latency_s >= 0)) throw fail("setup_latency_s must be >= 0");
  if (fusion_threshold < 1 || chunk_size < 1 || fusion_threshold > chunk_size) {
    throw fail("fusion threshold must be in [1, chunk_size]");
  }
}

std::pair<int, int> ParseMesh(std::string_view text) {
  auto bad = [&]() { return Error(ErrorKind::kConfig, "bad mesh '" + std::string(text) + "'"); };
  size_t x = text.find_first_of("xX");
  if (x == std::string_view::npos) throw bad();
  auto parse = [&](std::string_view part) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) throw bad();
    return v;
  };
  int m = parse(text.substr(0, x));
  int n = parse(text.substr(x + 1));
  if (m < 1 || n < 1) {
    throw Error(ErrorKind::kConfig, "mesh '" + std::string(text) + "' must have m, n >= 1");
  }
  return {m, n};
}

std::string MeshString(const ClusterSpec& mesh) {
  return std::to_string(mesh.m) + "x" + std::to_string(mesh.n);
}

ClusterSpec ClusterSpecFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::kConfig, "cluster config must be a JSON object");
  ClusterSpec c;
  try {
    if (doc.contains("mesh")) std::tie(c.m, c.n) = ParseMesh(doc.at("mesh").get<std::string>());
    if (doc.contains("m")) c.m = doc.at("m").get<int>();
    if (doc.contains("n")) c.n = doc.at("n").get<int>();
    if (doc.contains("intra_bw")) c.intra_bw = doc.at("intra_bw").get<double>();
    if (doc.contains("inter_bw")) c.inter_bw = doc.at("inter_bw").get<double>();
    if (doc.contains("overlap_fraction")) c.overlap_fraction = doc.at("overlap_fraction").get<double>();
    if (doc.contains("setup_latency_s")) c.setup_latency_s = doc.at("setup_latency_s").get<double>();
    if (doc.contains("fusion_threshold")) c.fusion_threshold = doc.at("fusion_threshold").get<int64_t>();
    if (doc.contains("chunk_size")) c.chunk_size = doc.at("chunk_size").get<int64_t>();
    if (doc.contains("efficiency")) {
      for (const auto& [key, value] : doc.at("efficiency").items()) {
        c.efficiency[EfficiencyKey(key)] = value.get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("cluster config: ") + e.what());
  }
  c.Validate();
  return c;
}

ClusterSpec LoadClusterSpec(const std::string& path) {
  std::string text = ReadTextFile(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, path + ": " + e.what());
  }
  return ClusterSpecFromJson(doc);
}

nlohmann::json ClusterSpecToJson(const ClusterSpec& c) {
  nlohmann::json eff = nlohmann::json::object();
  for (const auto& [kind, f] : c.efficiency) eff[EfficiencyName(kind)] = f;
  return {{"m", c.m},
          {"n", c.n},
          {"intra_bw", c.intra_bw},
          {"inter_bw", c.inter_bw},
          {"efficiency", eff},
          {"overlap_fraction", c.overlap_fraction},
          {"setup_latency_s", c.setup_latency_s},
          {"fusion_threshold", c.fusion_threshold},
          {"chunk_size", c.chunk_size}};
}

double CollectiveCost(CollectiveKind kind, const TensorSpec& tensor, const ClusterSpec& mesh) {
  const int d = mesh.devices();
  if (kind == CollectiveKind::kIdentity || d <= 1) return 0.0;
  const double share = static_cast<double>(d - 1) / d;
  const double bytes = static_cast<double>(tensor.byte_size());
  const double factor = kind == CollectiveKind::kAllReduceSum ? 2.0 : 1.0;
  return factor * share * bytes / mesh.bandwidth() * mesh.efficiency_of(kind);
}

double CollectiveCost(const Collective& collective, const TensorSpec& tensor,
                      const ClusterSpec& mesh) {
  return CollectiveCost(collective.kind, tensor, mesh);
}

double CollectiveCallCost(const Collective& collective, const TensorSpec& tensor,
                          const ClusterSpec& mesh) {
  if (collective.kind == CollectiveKind::kIdentity || mesh.devices() <= 1) return 0.0;
  return CollectiveCost(collective, tensor, mesh) + mesh.setup_latency_s;
}

double GradientSyncCost(const std::vector<GradientSpec>& gradients, const ClusterSpec& mesh) {
  if (mesh.devices() <= 1 || gradients.empty()) return 0.0;
  std::vector<TensorSpec> specs;
  for (const GradientSpec& g : gradients) specs.push_back(g.tensor);
  PackResult packed = PackGradients(specs, mesh.fusion_threshold, mesh.chunk_size);
  double total = 0;
  auto charge = [&](int64_t bytes) {
    double t = 2.0 * (mesh.devices() - 1) / mesh.devices() * static_cast<double>(bytes) /
               mesh.bandwidth() * mesh.efficiency_of(CollectiveKind::kAllReduceSum);
    total += t + mesh.setup_latency_s;
  };
  for (const FusionBucket& b : packed.buckets) charge(b.total_bytes);
  for (size_t i : packed.unfused) charge(specs[i].byte_size());
  return total;
}

CostReport PlanCost(const RoutedPlan& plan, const ClusterSpec& mesh) {
  CostReport r;
  const size_t n = plan.routes.size();
  std::vector<double> conv_cost(plan.conversions.size());
  for (size_t i = 0; i < plan.conversions.size(); ++i) {
    const Conversion& c = plan.conversions[i];
    conv_cost[i] = CollectiveCallCost(c.collective, c.tensor, mesh);
    if (c.collective.kind != CollectiveKind::kIdentity && mesh.devices() > 1) {
      r.bytes_by_collective[c.collective.kind] += static_cast<double>(c.tensor.byte_size());
      ++r.collective_calls;
    }
  }
  // Longest path; routes are stored in a topological order.
  std::vector<double> finish(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const MemberRoute& route = plan.routes[i];
    double start = 0;
    for (size_t k = 0; k < route.producers.size(); ++k) {
      double arrive = route.producers[k] >= 0 ? finish[route.producers[k]] : 0.0;
      if (route.conversions[k] >= 0) arrive += conv_cost[route.conversions[k]];
      start = std::max(start, arrive);
    }
    double own = CollectiveCallCost(route.pattern.collective, route.output, mesh);
    if (own > 0) {
      r.bytes_by_collective[route.pattern.collective.kind] +=
          static_cast<double>(route.output.byte_size());
      ++r.collective_calls;
    }
    finish[i] = start + own;
    double end = finish[i];
    if (route.exit_conversion >= 0) end += conv_cost[route.exit_conversion];
    r.forward_comm = std::max(r.forward_comm, end);
  }
  r.backward_comm = GradientSyncCost(plan.gradients, mesh);
  if (mesh.devices() > 1 && !plan.gradients.empty()) {
    std::vector<TensorSpec> specs;
    int64_t bytes = 0;
    for (const GradientSpec& g : plan.gradients) {
      specs.push_back(g.tensor);
      bytes += g.tensor.byte_size();
    }
    r.bytes_by_collective[CollectiveKind::kAllReduceSum] += static_cast<double>(bytes);
    r.collective_calls += PackGradients(specs, mesh.fusion_threshold, mesh.chunk_size).packet_count();
  }
  r.effective_backward = r.backward_comm * (1.0 - mesh.overlap_fraction);
  r.total = r.forward_comm + r.effective_backward;
  return r;
}

nlohmann::json CostReportToJson(const CostReport& report) {
  nlohmann::json bytes = nlohmann::json::object();
  for (const auto& [kind, b] : report.bytes_by_collective) bytes[std::string(CollectiveKindName(kind))] = b;
  return {{"forward_comm", report.forward_comm},
          {"backward_comm", report.backward_comm},
          {"effective_backward", report.effective_backward},
          {"total", report.total},
          {"collective_calls", report.collective_calls},
          {"bytes_by_collective", bytes}};
}

}  // namespace tpplan
