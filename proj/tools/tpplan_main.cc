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

// tpplan: tensor-parallel plan compiler command line.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tpplan/cost_model.h"
#include "tpplan/generators.h"
#include "tpplan/graph.h"
#include "tpplan/graph_json.h"
#include "tpplan/interpreter.h"
#include "tpplan/pipeline.h"
#include "tpplan/plan_search.h"
#include "tpplan/pruning.h"
#include "tpplan/rewriter.h"
#include "tpplan/sharding_patterns.h"
#include "tpplan/status.h"

namespace {

using tpplan::ErrorKind;
using nlohmann::json;

void Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    tpplan::WriteTextFile(path, text);
  }
}

void EmitJson(const std::string& path, const json& doc) { Emit(path, doc.dump(2) + "\n"); }

tpplan::DType DTypeFlag(const std::string& text) {
  try {
    return tpplan::ParseDType(text);
  } catch (const tpplan::Error& e) {
    throw tpplan::Error(ErrorKind::kConfig, e.what());
  }
}

const char* KindName(tpplan::Subgraph::Kind kind) {
  switch (kind) {
    case tpplan::Subgraph::Kind::kShared:
      return "shared";
    case tpplan::Subgraph::Kind::kResidual:
      return "residual";
    case tpplan::Subgraph::Kind::kWholeGraph:
      return "whole_graph";
  }
  return "residual";
}

json PatternJson(const tpplan::ShardingPattern& p) {
  json inputs = json::array();
  for (const tpplan::ShardSpec& s : p.input_specs) inputs.push_back(s.ToString());
  return {{"op", std::string(tpplan::OpKindName(p.op))},
          {"name", p.name},
          {"inputs", inputs},
          {"weight", p.weight_spec ? json(p.weight_spec->ToString()) : json(nullptr)},
          {"output", p.output_spec.ToString()},
          {"collective", p.collective.ToString()},
          {"result", p.result_spec().ToString()}};
}

struct Common {
  tpplan::RunConfig run;
  std::string plan_path;
  std::string out;
};

void AddMeshFlags(CLI::App* cmd, Common& c) {
  cmd->add_option("--mesh", c.run.mesh, "Device mesh MxN (default: cluster config, else 1x2)");
  cmd->add_option("--cluster", c.run.cluster_path,
                  std::string("Cluster config JSON (default: $") + tpplan::kClusterConfigEnv + ")");
  cmd->add_option("--min-dup", c.run.min_duplicates, "Pruning duplicate threshold")
      ->capture_default_str();
}

tpplan::BestPlanReport LoadPlan(const tpplan::GroupedGraph& grouped, const Common& c,
                                const tpplan::ClusterSpec& mesh) {
  json doc;
  try {
    doc = json::parse(tpplan::ReadTextFile(c.plan_path));
  } catch (const json::exception& e) {
    throw tpplan::Error(ErrorKind::kParse, c.plan_path + ": " + e.what());
  }
  return tpplan::PlanFromAssignments(grouped, mesh, tpplan::AssignmentsFromJson(doc),
                                     c.run.min_duplicates);
}

int Run(int argc, char** argv) {
  CLI::App app{"tpplan: tensor-parallel sharding plan compiler"};
  app.require_subcommand(1);
  Common c;

  // gen
  std::string model = "transformer";
  tpplan::TransformerConfig tcfg;
  tpplan::T5Config t5;
  tpplan::ClassifierConfig ccfg;
  std::string gen_dtype = "f32";
  bool no_aux = false;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic model graph");
  gen->add_option("model", model, "transformer | t5 | classifier")
      ->check(CLI::IsMember({"transformer", "t5", "classifier"}))
      ->capture_default_str();
  gen->add_option("--layers", tcfg.layers)->capture_default_str();
  gen->add_option("--d-model", tcfg.d_model)->capture_default_str();
  gen->add_option("--heads", tcfg.heads)->capture_default_str();
  gen->add_option("--batch", tcfg.batch)->capture_default_str();
  gen->add_option("--seq", tcfg.seq)->capture_default_str();
  gen->add_option("--vocab", tcfg.vocab)->capture_default_str();
  gen->add_option("--ffn-mult", tcfg.ffn_mult)->capture_default_str();
  gen->add_option("--encoder-layers", t5.encoder_layers)->capture_default_str();
  gen->add_option("--decoder-layers", t5.decoder_layers)->capture_default_str();
  gen->add_option("--classes", ccfg.num_classes)->capture_default_str();
  gen->add_option("--features", ccfg.feature_dim)->capture_default_str();
  gen->add_option("--blocks", ccfg.blocks)->capture_default_str();
  gen->add_option("--dtype", gen_dtype)->capture_default_str();
  gen->add_flag("--no-aux", no_aux, "Omit initializer and optimizer operators");
  gen->add_option("-o,--out", c.out, "Output path (default stdout)");

  // prune
  auto* prune = app.add_subcommand("prune", "Find shared subgraphs");
  prune->add_option("--graph", c.run.graph_path)->required();
  prune->add_option("--min-dup", c.run.min_duplicates)->capture_default_str();
  prune->add_option("-o,--out", c.out);

  // patterns
  std::string op_filter;
  auto* patterns = app.add_subcommand("patterns", "List the sharding pattern registry");
  patterns->add_option("--op", op_filter, "Only this operator kind");
  patterns->add_option("-o,--out", c.out);

  // plan
  bool timing = true;
  auto* plan = app.add_subcommand("plan", "Search the best sharding plan");
  plan->add_option("--graph", c.run.graph_path)->required();
  AddMeshFlags(plan, c);
  plan->add_option("--jobs", c.run.jobs, "Worker threads")->capture_default_str();
  plan->add_option("--top", c.run.table_limit, "Cost-table rows per subgraph (0 = all)")
      ->capture_default_str();
  plan->add_flag("!--no-timing", timing, "Leave wall time out of the report");
  plan->add_option("-o,--out", c.out);

  // cost
  auto* cost = app.add_subcommand("cost", "Cost a plan file");
  cost->add_option("--graph", c.run.graph_path)->required();
  cost->add_option("--plan", c.plan_path)->required();
  AddMeshFlags(cost, c);
  cost->add_option("-o,--out", c.out);

  // rewrite
  auto* rewrite = app.add_subcommand("rewrite", "Emit the per-device graph of a plan");
  rewrite->add_option("--graph", c.run.graph_path)->required();
  rewrite->add_option("--plan", c.plan_path)->required();
  AddMeshFlags(rewrite, c);
  rewrite->add_option("-o,--out", c.out);

  // verify
  std::string dtype = "f64";
  double tolerance = 0;
  auto* verify = app.add_subcommand("verify", "Check a plan against single-device execution");
  verify->add_option("--graph", c.run.graph_path)->required();
  verify->add_option("--plan", c.plan_path)->required();
  AddMeshFlags(verify, c);
  verify->add_option("--trials", c.run.trials)->capture_default_str();
  verify->add_option("--dtype", dtype)->capture_default_str();
  verify->add_option("--tolerance", tolerance, "Relative tolerance (default by dtype)");
  verify->add_option("--seed", c.run.seed)->capture_default_str();
  verify->add_option("-o,--out", c.out);

  // pipeline
  int64_t mu = 0, chunk = 0;
  auto* pipeline = app.add_subcommand("pipeline", "load, trim, prune, derive, rewrite, verify");
  pipeline->add_option("--graph", c.run.graph_path)->required();
  AddMeshFlags(pipeline, c);
  pipeline->add_option("--mu", mu, "Gradient fusion threshold in bytes");
  pipeline->add_option("--chunk", chunk, "Fusion chunk size in bytes");
  pipeline->add_option("--out-dir", c.run.out_dir)->capture_default_str();
  pipeline->add_option("--dtype", dtype)->capture_default_str();
  pipeline->add_option("--trials", c.run.trials)->capture_default_str();
  pipeline->add_option("--tolerance", tolerance, "Relative tolerance (default by dtype)");
  pipeline->add_option("--seed", c.run.seed)->capture_default_str();
  pipeline->add_option("--jobs", c.run.jobs)->capture_default_str();
  pipeline->add_option("--top", c.run.table_limit)->capture_default_str();

  // bench
  std::vector<int> layer_counts = {2, 4, 8, 16, 32};
  tpplan::TransformerConfig bcfg;
  auto* bench = app.add_subcommand("bench", "Search-time scaling over transformer depth");
  bench->add_option("--layers", layer_counts, "Comma-separated layer counts")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--mesh", c.run.mesh);
  bench->add_option("--cluster", c.run.cluster_path);
  bench->add_option("--d-model", bcfg.d_model)->capture_default_str();
  bench->add_option("--heads", bcfg.heads)->capture_default_str();
  bench->add_option("--jobs", c.run.jobs)->capture_default_str();
  bench->add_option("-o,--out", c.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << tpplan::ErrorJson(ErrorKind::kConfig, e.what()).dump() << "\n";
    return 2;
  }
  if (tolerance > 0) c.run.tolerance = tolerance;

  if (gen->parsed()) {
    tpplan::DType dt = DTypeFlag(gen_dtype);
    tpplan::RawGraph g;
    if (model == "transformer") {
      tcfg.dtype = dt;
      tcfg.with_aux = !no_aux;
      g = tpplan::GenTransformerStack(tcfg);
    } else if (model == "t5") {
      t5.d_model = tcfg.d_model;
      t5.heads = tcfg.heads;
      t5.batch = tcfg.batch;
      t5.seq = tcfg.seq;
      t5.vocab = tcfg.vocab;
      t5.ffn_mult = tcfg.ffn_mult;
      t5.dtype = dt;
      t5.with_aux = !no_aux;
      g = tpplan::GenT5Like(t5);
    } else {
      ccfg.batch = tcfg.batch;
      ccfg.dtype = dt;
      ccfg.with_aux = !no_aux;
      g = tpplan::GenWideClassifier(ccfg);
    }
    Emit(c.out, tpplan::SaveGraph(g));
    return 0;
  }

  if (patterns->parsed()) {
    json list = json::array();
    for (int k = 0; k <= static_cast<int>(tpplan::OpKind::kCollective); ++k) {
      auto op = static_cast<tpplan::OpKind>(k);
      if (op == tpplan::OpKind::kAuxiliary || op == tpplan::OpKind::kCollective) continue;
      if (!op_filter.empty() && op != tpplan::ParseOpKind(op_filter)) continue;
      for (const auto& p : tpplan::PatternsFor(op)) list.push_back(PatternJson(p));
    }
    EmitJson(c.out, {{"patterns", list}});
    return 0;
  }

  if (bench->parsed()) {
    tpplan::ClusterSpec mesh = tpplan::ResolveCluster(c.run);
    Emit(c.out, tpplan::BenchCsv(tpplan::BenchScaling(layer_counts, mesh, bcfg, c.run.jobs)));
    return 0;
  }

  if (pipeline->parsed()) {
    c.run.dtype = DTypeFlag(dtype);
    if (mu > 0) c.run.fusion_threshold = mu;
    if (chunk > 0) c.run.chunk_size = chunk;
    tpplan::PipelineResult r = tpplan::RunPipeline(c.run);
    json summary = {{"verified", r.verified},
                    {"total_cost", r.plan["total_cost"]},
                    {"assignments", r.plan["assignments"]},
                    {"worst_relative_error", r.verification["worst"]},
                    {"out_dir", c.run.out_dir}};
    std::cout << summary.dump(2) << "\n";
    return r.verified ? 0 : 1;
  }

  // The remaining subcommands read a graph.
  tpplan::LoadResult loaded = tpplan::LoadGraphFile(c.run.graph_path);
  for (const std::string& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
  const tpplan::GroupedGraph grouped = tpplan::TrimAndGroup(loaded.graph);

  if (prune->parsed()) {
    tpplan::PruneResult pr = tpplan::PruneGraph(grouped, c.run.min_duplicates);
    json subs = json::array();
    for (const tpplan::Subgraph& s : pr.subgraphs) {
      json prefixes = json::array();
      for (const auto& inst : s.instances) prefixes.push_back(inst.prefix);
      subs.push_back({{"name", s.name()},
                      {"kind", KindName(s.kind)},
                      {"multiplicity", s.multiplicity()},
                      {"template_nodes", s.template_nodes},
                      {"instances", prefixes}});
    }
    json stats = {{"graph_nodes", pr.stats.graph_nodes},
                  {"search_nodes", pr.stats.search_nodes},
                  {"shared_subgraphs", pr.stats.shared_subgraphs},
                  {"residual_subgraphs", pr.stats.residual_subgraphs},
                  {"steps", pr.stats.steps},
                  {"ratio", pr.stats.ratio()}};
    EmitJson(c.out, {{"stats", stats}, {"subgraphs", subs}});
    return 0;
  }

  const tpplan::ClusterSpec mesh = tpplan::ResolveCluster(c.run);

  if (plan->parsed()) {
    if (c.run.jobs < 1) throw tpplan::Error(ErrorKind::kConfig, "jobs must be >= 1");
    tpplan::SearchOptions options;
    options.min_duplicates = c.run.min_duplicates;
    options.jobs = c.run.jobs;
    tpplan::BestPlanReport report = tpplan::DerivePlan(grouped, mesh, options);
    json doc = tpplan::BestPlanReportToJson(report, c.run.table_limit, timing);
    doc["config"] = tpplan::RunConfigToJson(c.run, mesh);
    EmitJson(c.out, doc);
    return 0;
  }

  tpplan::BestPlanReport report = LoadPlan(grouped, c, mesh);

  if (cost->parsed()) {
    json subs = json::array();
    for (const tpplan::SubgraphResult& s : report.subgraphs) {
      subs.push_back({{"name", s.name},
                      {"multiplicity", s.multiplicity},
                      {"plan", s.best.plan.ToString()},
                      {"cost", tpplan::CostReportToJson(s.best.cost)}});
    }
    EmitJson(c.out, {{"mesh", tpplan::MeshString(mesh)},
                     {"total_cost", report.total_cost},
                     {"replica_cost", report.replica_cost},
                     {"subgraphs", subs}});
    return 0;
  }

  tpplan::ParallelGraph pgraph = tpplan::RewriteGraph(grouped, report, mesh);
  if (rewrite->parsed()) {
    Emit(c.out, tpplan::SaveGraph(pgraph.graph));
    return 0;
  }

  // verify
  c.run.dtype = DTypeFlag(dtype);
  tpplan::EquivalenceReport eq =
      tpplan::CheckEquivalence(loaded.graph, pgraph.graph, c.run.trials,
                               c.run.effective_tolerance(), c.run.dtype, c.run.seed);
  json doc = tpplan::EquivalenceReportToJson(eq);
  doc["collectives_per_device"] = pgraph.collective_count();
  EmitJson(c.out, doc);
  return eq.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const tpplan::Error& e) {
    std::cerr << tpplan::ErrorJson(e.kind(), e.what()).dump() << "\n";
    return tpplan::ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << tpplan::ErrorJson(ErrorKind::kInternal, e.what()).dump() << "\n";
    return 3;
  }
}
