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

#include <map>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "tpplan/generators.h"
#include "tpplan/graph_json.h"
#include "tpplan/interpreter.h"
#include "tpplan/plan_search.h"
#include "tpplan/rewriter.h"
#include "tpplan/status.h"

namespace tpplan {
namespace {

using S = ShardSpec;

TensorSpec F64(std::vector<int64_t> shape, bool trainable = false) {
  return {std::move(shape), DType::kF64, trainable};
}

ClusterSpec Mesh(int m, int n) {
  ClusterSpec c;
  c.m = m;
  c.n = n;
  return c;
}

// X (4x8) . W0 (8x6) . W1 (6x6)
GroupedGraph TwoMatMuls() {
  std::vector<RawNode> nodes(3);
  nodes[0].name = "x/Input";
  nodes[0].op = OpKind::kInput;
  nodes[0].output = F64({4, 8});
  nodes[1].name = "a/MatMul";
  nodes[1].op = OpKind::kMatMul;
  nodes[1].inputs = {"x/Input"};
  nodes[1].weight = F64({8, 6}, true);
  nodes[1].output = F64({4, 6});
  nodes[2].name = "b/MatMul";
  nodes[2].op = OpKind::kMatMul;
  nodes[2].inputs = {"a/MatMul"};
  nodes[2].weight = F64({6, 6}, true);
  nodes[2].output = F64({4, 6});
  return TrimAndGroup(RawGraph::Build(nodes));
}

RoutedPlan RouteWhole(const GroupedGraph& g, std::vector<S> assignments, const ClusterSpec& mesh) {
  Subgraph s = PruneGraph(g, 1).subgraphs.at(0);
  CandidatePlan plan = EnumerateAllPlans(g, s).at(0);
  plan.assignments = std::move(assignments);
  RouteResult r = PatternRouting(g, s, plan, mesh);
  if (!std::holds_alternative<RoutedPlan>(r)) ADD_FAILURE() << std::get<RoutingFailure>(r).reason;
  return std::get<RoutedPlan>(r);
}

TEST(RewriteTest, SingleDeviceIsTheOriginalProgram) {
  RawGraph raw = GenTransformerStack(2, 8, 2);
  GroupedGraph g = TrimAndGroup(raw);
  BestPlanReport r = DerivePlan(g, Mesh(1, 1));
  ParallelGraph pg = RewriteGraph(g, r, Mesh(1, 1));
  EXPECT_EQ(pg.devices(), 1);
  EXPECT_EQ(pg.collective_count(), 0u);
  ASSERT_EQ(pg.graph.size(), raw.size());
  for (const RawNode& n : pg.graph.nodes()) {
    ASSERT_TRUE(raw.contains(n.name)) << n.name;
    const RawNode& src =
        g.compute().contains(n.name) ? g.compute().node(n.name) : raw.node(n.name);
    EXPECT_EQ(n.op, src.op);
    EXPECT_EQ(n.output, src.output);
    EXPECT_EQ(n.inputs, src.inputs) << n.name;
  }
  EXPECT_TRUE(CheckEquivalence(raw, pg.graph, 3, 0.0, DType::kF64).pass);
}

TEST(RewriteTest, ColumnRowLayoutOnTwoDevices) {
  GroupedGraph g = TwoMatMuls();
  ParallelGraph pg = RewriteGraph(g, RouteWhole(g, {S::Split(1), S::Split(0)}, Mesh(1, 2)),
                                  Mesh(1, 2));
  ASSERT_EQ(pg.devices(), 2);
  for (int d = 0; d < 2; ++d) {
    const RawNode& a = pg.graph.node("a/MatMul", d);
    EXPECT_EQ(*a.weight_shard, S::Split(1));
    EXPECT_EQ(a.weight->shape, (std::vector<int64_t>{8, 6}));
    EXPECT_EQ(a.output.shape, (std::vector<int64_t>{4, 3}));
    const RawNode& b = pg.graph.node("b/MatMul", d);
    EXPECT_EQ(*b.weight_shard, S::Split(0));
    EXPECT_EQ(b.inputs, (std::vector<std::string>{"a/MatMul"}));
    const RawNode& ar = pg.graph.node("b/MatMul/all_reduce_sum", d);
    EXPECT_EQ(ar.op, OpKind::kCollective);
    EXPECT_EQ(ar.collective->kind, CollectiveKind::kAllReduceSum);
    EXPECT_EQ(ar.participants, (std::vector<int>{0, 1}));
    EXPECT_EQ(ar.inputs, (std::vector<std::string>{"b/MatMul"}));
    EXPECT_EQ(ar.output.shape, (std::vector<int64_t>{4, 6}));
  }
  EXPECT_EQ(pg.collective_count(), 1u);
  EXPECT_EQ(pg.provenance.at("b/MatMul/all_reduce_sum"), "b");
  EquivalenceReport eq = CheckEquivalence(Ungroup(g), pg.graph, 10, 1e-12, DType::kF64);
  EXPECT_TRUE(eq.pass) << eq.worst;
}

TEST(RewriteTest, ColumnSplitAloneGathersAtTheExit) {
  GroupedGraph g = TwoMatMuls();
  ParallelGraph pg =
      RewriteGraph(g, RouteWhole(g, {S::Replica(), S::Split(1)}, Mesh(1, 2)), Mesh(1, 2));
  const RawNode& gather = pg.graph.node("b/MatMul/to_R", 1);
  EXPECT_EQ(gather.collective->kind, CollectiveKind::kAllGather);
  EXPECT_EQ(gather.collective->axis, 1);
  EXPECT_TRUE(CheckEquivalence(Ungroup(g), pg.graph, 5, 1e-12, DType::kF64).pass);
}

TEST(RewriteTest, FfnOnlyOnFourDevices) {
  TransformerConfig c;
  c.layers = 2;
  c.d_model = 8;
  c.heads = 2;
  c.batch = 4;
  GroupedGraph g = TrimAndGroup(GenTransformerStack(c));
  std::map<std::string, S> fixed;
  for (int i = 0; i < 2; ++i) {
    const std::string p = "encoder/layer_" + std::to_string(i) + "/ffn/";
    fixed[p + "intermediate"] = S::Split(1);
    fixed[p + "output"] = S::Split(0);
  }
  const ClusterSpec mesh = Mesh(1, 4);
  BestPlanReport r = PlanFromAssignments(g, mesh, fixed);
  ParallelGraph pg = RewriteGraph(g, r, mesh);
  RoutedPlan expanded = ExpandPlan(g, r);
  EXPECT_EQ(pg.collective_count(), expanded.collective_count());
  size_t allreduce = 0;
  for (const RawNode* n : pg.device_nodes(0)) {
    if (n->op == OpKind::kCollective) {
      EXPECT_EQ(n->collective->kind, CollectiveKind::kAllReduceSum) << n->name;
      ++allreduce;
    }
  }
  EXPECT_EQ(allreduce, 2u);
  EquivalenceReport eq = CheckEquivalence(GenTransformerStack(c), pg.graph, 10, 1e-10, DType::kF64);
  EXPECT_TRUE(eq.pass) << eq.worst;
}

TEST(RewriteTest, CollectiveCountMatchesPlanOnEveryDevice) {
  GroupedGraph g = TrimAndGroup(GenTransformerStack(2, 8, 2));
  for (const ClusterSpec& mesh : {Mesh(1, 2), Mesh(2, 2)}) {
    BestPlanReport r = DerivePlan(g, mesh);
    ParallelGraph pg = RewriteGraph(g, r, mesh);
    const size_t want = ExpandPlan(g, r).collective_count();
    for (int d = 0; d < pg.devices(); ++d) {
      size_t n = 0;
      for (const RawNode* node : pg.device_nodes(d)) n += node->op == OpKind::kCollective;
      EXPECT_EQ(n, want) << "device " << d;
    }
  }
}

TEST(RewriteTest, AuxiliaryNodesComeBackWithOwners) {
  RawGraph raw = GenTransformerStack(2, 8, 2);
  GroupedGraph g = TrimAndGroup(raw);
  ASSERT_FALSE(g.side_table().empty());
  BestPlanReport r = DerivePlan(g, Mesh(1, 2));
  ParallelGraph pg = RewriteGraph(g, r, Mesh(1, 2));
  for (const RawNode& aux : g.side_table()) {
    for (int d = 0; d < 2; ++d) {
      ASSERT_TRUE(pg.graph.contains(aux.name, d)) << aux.name;
      const RawNode& n = pg.graph.node(aux.name, d);
      EXPECT_EQ(n.op, OpKind::kAuxiliary);
      if (n.attrs.count("owner")) {
        EXPECT_TRUE(g.contains(n.attrs.at("owner")));
      }
    }
  }
}

TEST(RewriteTest, SerializedFormRoundTrips) {
  GroupedGraph g = TrimAndGroup(GenTransformerStack(2, 8, 2));
  BestPlanReport r = DerivePlan(g, Mesh(2, 2));
  ParallelGraph pg = RewriteGraph(g, r, Mesh(2, 2));
  const std::string text = SaveGraph(pg.graph);
  LoadResult back = LoadGraph(text);
  EXPECT_EQ(back.graph, pg.graph);
  EXPECT_EQ(SaveGraph(back.graph), text);
}

TEST(RewriteTest, IndivisibleSplitIsRejected) {
  GroupedGraph g = TwoMatMuls();
  RoutedPlan plan = RouteWhole(g, {S::Split(1), S::Split(0)}, Mesh(1, 2));
  try {
    RewriteGraph(g, plan, Mesh(1, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIndivisibleShard);
  }
}

TEST(LocalShapeTest, DividesTheSplitAxis) {
  EXPECT_EQ(LocalShape(F64({8, 6}), S::Split(0), 4, "w"), (std::vector<int64_t>{2, 6}));
  EXPECT_EQ(LocalShape(F64({8, 6}), S::Partial(), 4, "w"), (std::vector<int64_t>{8, 6}));
  EXPECT_EQ(LocalShape(F64({8, 6}), S::Replica(), 4, "w"), (std::vector<int64_t>{8, 6}));
  EXPECT_THROW(LocalShape(F64({8, 6}), S::Split(1), 4, "w"), Error);
  EXPECT_THROW(LocalShape(F64({8, 6}), S::Split(2), 2, "w"), Error);
}

}  // namespace
}  // namespace tpplan
