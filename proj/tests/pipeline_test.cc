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

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

#include "gtest/gtest.h"
#include "tpplan/generators.h"
#include "tpplan/graph_json.h"
#include "tpplan/pipeline.h"
#include "tpplan/status.h"

namespace tpplan {
namespace {

namespace fs = std::filesystem;

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tpplan_pipeline_" + std::string(
                ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    graph_ = (dir_ / "model.json").string();
    WriteTextFile(graph_, SaveGraph(GenTransformerStack(2, 8, 2)));
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig Config(const std::string& out) {
    RunConfig c;
    c.graph_path = graph_;
    c.mesh = "2x2";
    c.out_dir = (dir_ / out).string();
    c.trials = 3;
    return c;
  }

  fs::path dir_;
  std::string graph_;
};

TEST_F(PipelineTest, WritesVerifiedArtifacts) {
  PipelineResult r = RunPipeline(Config("out"));
  EXPECT_TRUE(r.verified);
  for (const char* f : {"plan.json", "parallel_graph.json", "verify.json", "timing.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  nlohmann::json verify = nlohmann::json::parse(ReadTextFile((dir_ / "out/verify.json").string()));
  EXPECT_EQ(verify["pass"], true);
  EXPECT_LE(r.plan["total_cost"].get<double>(), r.plan["replica_cost"].get<double>());
  LoadResult pg = LoadGraphFile((dir_ / "out/parallel_graph.json").string());
  EXPECT_EQ(pg.graph.device_count(), 4);
}

TEST_F(PipelineTest, WorkerCountDoesNotChangeOutputs) {
  RunConfig one = Config("one"), eight = Config("eight");
  eight.jobs = 8;
  RunPipeline(one);
  RunPipeline(eight);
  for (const char* f : {"plan.json", "parallel_graph.json", "verify.json"}) {
    EXPECT_EQ(ReadTextFile((dir_ / "one" / f).string()), ReadTextFile((dir_ / "eight" / f).string()))
        << f;
  }
}

TEST_F(PipelineTest, MissingGraphIsAnIoError) {
  RunConfig c = Config("out");
  c.graph_path = (dir_ / "absent.json").string();
  try {
    RunPipeline(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
    EXPECT_EQ(ExitCodeFor(e.kind()), 2);
  }
}

TEST_F(PipelineTest, BadMeshIsAConfigError) {
  RunConfig c = Config("out");
  c.mesh = "0x4";
  try {
    RunPipeline(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST_F(PipelineTest, ClusterFileFromEnvironment) {
  const std::string path = (dir_ / "cluster.json").string();
  WriteTextFile(path, R"({"m":2,"n":4,"inter_bw":1e9})");
  setenv(kClusterConfigEnv, path.c_str(), 1);
  RunConfig c;
  ClusterSpec mesh = ResolveCluster(c);
  unsetenv(kClusterConfigEnv);
  EXPECT_EQ(mesh.m, 2);
  EXPECT_EQ(mesh.n, 4);
  EXPECT_EQ(mesh.inter_bw, 1e9);
  c.mesh = "1x8";
  c.fusion_threshold = 64;
  c.chunk_size = 128;
  c.cluster_path = path;
  mesh = ResolveCluster(c);
  EXPECT_EQ(mesh.devices(), 8);
  EXPECT_EQ(mesh.inter_bw, 1e9);
  EXPECT_EQ(mesh.fusion_threshold, 64);
  EXPECT_EQ(ResolveCluster(RunConfig{}).devices(), 2);
}

TEST(ExitCodeTest, Mapping) {
  for (ErrorKind k : {ErrorKind::kParse, ErrorKind::kCycle, ErrorKind::kDanglingRef,
                      ErrorKind::kEmptyGraph, ErrorKind::kBadConfig, ErrorKind::kIo,
                      ErrorKind::kConfig}) {
    EXPECT_EQ(ExitCodeFor(k), 2) << ErrorKindName(k);
  }
  for (ErrorKind k : {ErrorKind::kSpecMismatch, ErrorKind::kIndivisibleShard,
                      ErrorKind::kShapeMismatch, ErrorKind::kProtocol, ErrorKind::kNoValidPlan,
                      ErrorKind::kInternal}) {
    EXPECT_EQ(ExitCodeFor(k), 3) << ErrorKindName(k);
  }
  nlohmann::json j = ErrorJson(ErrorKind::kIo, "gone");
  EXPECT_EQ(j["error"]["kind"], "io");
  EXPECT_EQ(j["error"]["message"], "gone");
}

TEST(BenchTest, SearchWorkIsFlatInDepth) {
  ClusterSpec mesh;
  mesh.n = 2;
  std::vector<BenchRow> rows = BenchScaling({2, 4, 8}, mesh, TransformerConfig{});
  ASSERT_EQ(rows.size(), 3u);
  std::set<size_t> candidates, unique, steps;
  for (const BenchRow& r : rows) {
    candidates.insert(r.candidates);
    unique.insert(r.unique_subgraphs);
    steps.insert(r.routing_steps);
  }
  EXPECT_EQ(candidates.size(), 1u);
  EXPECT_EQ(unique.size(), 1u);
  EXPECT_EQ(steps.size(), 1u);
  EXPECT_LT(rows[0].graph_nodes, rows[2].graph_nodes);
  const std::string csv = BenchCsv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "layers,raw_nodes,graph_nodes,unique_subgraphs,shared_subgraphs,shared_candidates,"
            "candidates_enumerated,routing_steps,prune_steps,wall_seconds");
}

}  // namespace
}  // namespace tpplan
