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

#include "tpplan/pipeline.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "tpplan/graph_json.h"
#include "tpplan/interpreter.h"
#include "tpplan/plan_search.h"
#include "tpplan/pruning.h"
#include "tpplan/rewriter.h"

namespace tpplan {

double RunConfig::effective_tolerance() const {
  if (tolerance) return *tolerance;
  return dtype == DType::kF64 ? 1e-10 : 1e-5;
}

ClusterSpec ResolveCluster(const RunConfig& config) {
  std::string path = config.cluster_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kClusterConfigEnv); env && *env) path = env;
  }
  ClusterSpec mesh;
  bool mesh_from_file = false;
  if (!path.empty()) {
    mesh = LoadClusterSpec(path);
    mesh_from_file = true;
  }
  if (!config.mesh.empty()) {
    std::tie(mesh.m, mesh.n) = ParseMesh(config.mesh);
  } else if (!mesh_from_file) {
    mesh.m = 1;
    mesh.n = 2;
  }
  if (config.fusion_threshold) mesh.fusion_threshold = *config.fusion_threshold;
  if (config.chunk_size) mesh.chunk_size = *config.chunk_size;
  mesh.Validate();
  return mesh;
}

nlohmann::json RunConfigToJson(const RunConfig& config, const ClusterSpec& mesh) {
  return {{"graph", config.graph_path},
          {"mesh", MeshString(mesh)},
          {"cluster", ClusterSpecToJson(mesh)},
          {"min_duplicates", config.min_duplicates},
          {"dtype", std::string(DTypeName(config.dtype))},
          {"trials", config.trials},
          {"tolerance", config.effective_tolerance()},
          {"seed", config.seed},
          {"table_limit", config.table_limit}};
}

namespace {

void WriteJson(const std::filesystem::path& path, const nlohmann::json& doc) {
  WriteTextFile(path.string(), doc.dump(2) + "\n");
}

}  // namespace

PipelineResult RunPipeline(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.min_duplicates < 1) throw Error(ErrorKind::kConfig, "min duplicates must be >= 1");
  if (config.trials < 1) throw Error(ErrorKind::kConfig, "trials must be >= 1");
  if (config.jobs < 1) throw Error(ErrorKind::kConfig, "jobs must be >= 1");
  const ClusterSpec mesh = ResolveCluster(config);
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + config.out_dir + ": " + ec.message());
  const std::filesystem::path out(config.out_dir);

  LoadResult loaded = LoadGraphFile(config.graph_path);
  const GroupedGraph grouped = TrimAndGroup(loaded.graph);
  SearchOptions options;
  options.min_duplicates = config.min_duplicates;
  options.jobs = config.jobs;
  const BestPlanReport report = DerivePlan(grouped, mesh, options);
  const ParallelGraph pgraph = RewriteGraph(grouped, report, mesh);
  const EquivalenceReport eq = CheckEquivalence(loaded.graph, pgraph.graph, config.trials,
                                                config.effective_tolerance(), config.dtype,
                                                config.seed);

  PipelineResult result;
  result.verified = eq.pass;
  result.plan = BestPlanReportToJson(report, config.table_limit);
  result.plan["config"] = RunConfigToJson(config, mesh);
  result.plan["warnings"] = loaded.warnings;
  result.plan["collectives_per_device"] = pgraph.collective_count();
  result.verification = EquivalenceReportToJson(eq);
  result.verification["config"] = RunConfigToJson(config, mesh);
  WriteJson(out / "plan.json", result.plan);
  WriteTextFile((out / "parallel_graph.json").string(), SaveGraph(pgraph.graph));
  WriteJson(out / "verify.json", result.verification);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  WriteJson(out / "timing.json", {{"wall_seconds", result.wall_seconds},
                                  {"search_seconds", report.stats.wall_seconds},
                                  {"jobs", config.jobs}});
  return result;
}

std::vector<BenchRow> BenchScaling(const std::vector<int>& layer_counts, const ClusterSpec& mesh,
                                   const TransformerConfig& base, int jobs) {
  std::vector<BenchRow> rows;
  for (int layers : layer_counts) {
    if (layers < 2) throw Error(ErrorKind::kConfig, "bench layer counts must be >= 2");
    TransformerConfig config = base;
    config.layers = layers;
    RawGraph raw = GenTransformerStack(config);
    const auto start = std::chrono::steady_clock::now();
    GroupedGraph grouped = TrimAndGroup(raw);
    SearchOptions options;
    options.jobs = jobs;
    BestPlanReport report = DerivePlan(grouped, mesh, options);
    BenchRow row;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.layers = layers;
    row.raw_nodes = raw.size();
    row.graph_nodes = grouped.nodes().size();
    row.unique_subgraphs = report.stats.unique_subgraphs;
    row.shared_subgraphs = report.stats.prune.shared_subgraphs;
    for (const SubgraphResult& s : report.subgraphs) {
      if (s.kind == Subgraph::Kind::kShared) row.shared_candidates += s.candidates;
    }
    row.candidates = report.stats.candidates;
    row.routing_steps = report.stats.routing_steps;
    row.prune_steps = report.stats.prune.steps;
    rows.push_back(row);
  }
  return rows;
}

std::string BenchCsv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "layers,raw_nodes,graph_nodes,unique_subgraphs,shared_subgraphs,shared_candidates,"
         "candidates_enumerated,routing_steps,prune_steps,wall_seconds\n";
  for (const BenchRow& r : rows) {
    out << r.layers << ',' << r.raw_nodes << ',' << r.graph_nodes << ',' << r.unique_subgraphs
        << ',' << r.shared_subgraphs << ',' << r.shared_candidates << ',' << r.candidates << ','
        << r.routing_steps << ',' << r.prune_steps << ',' << r.wall_seconds << '\n';
  }
  return out.str();
}

nlohmann::json ErrorJson(ErrorKind kind, const std::string& message) {
  return {{"error", {{"kind", std::string(ErrorKindName(kind))}, {"message", message}}}};
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kCycle:
    case ErrorKind::kDanglingRef:
    case ErrorKind::kEmptyGraph:
    case ErrorKind::kBadConfig:
    case ErrorKind::kIo:
    case ErrorKind::kConfig:
      return 2;
    default:
      return 3;
  }
}

}  // namespace tpplan
