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

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "tpplan/cost_model.h"
#include "tpplan/status.h"

namespace tpplan {
namespace {

TensorSpec F32(std::vector<int64_t> shape) { return {std::move(shape), DType::kF32, false}; }

ClusterSpec Mesh(int m, int n) {
  ClusterSpec c;
  c.m = m;
  c.n = n;
  return c;
}

constexpr CollectiveKind kKinds[] = {CollectiveKind::kAllReduceSum, CollectiveKind::kAllGather,
                                     CollectiveKind::kReduceScatter, CollectiveKind::kAllToAll};

TEST(CollectiveCostTest, AllReduceClosedForm) {
  ClusterSpec mesh = Mesh(2, 8);
  mesh.inter_bw = 4e9;
  const double expected = 2.0 * 15.0 / 16.0 * 4194304.0 / 4e9;
  EXPECT_DOUBLE_EQ(CollectiveCost(CollectiveKind::kAllReduceSum, F32({1024, 1024}), mesh), expected);
  EXPECT_DOUBLE_EQ(CollectiveCallCost(Collective::AllReduceSum(), F32({1024, 1024}), mesh),
                   expected + 3e-5);
}

TEST(CollectiveCostTest, SingleNodeUsesIntraBandwidth) {
  ClusterSpec mesh = Mesh(1, 4);
  const double bytes = 4.0 * 64 * 64;
  EXPECT_DOUBLE_EQ(CollectiveCost(CollectiveKind::kAllGather, F32({64, 64}), mesh),
                   0.75 * bytes / 150e9 * 1.2);
  EXPECT_DOUBLE_EQ(CollectiveCost(CollectiveKind::kAllToAll, F32({64, 64}), mesh),
                   0.75 * bytes / 150e9 * 1.5);
}

TEST(CollectiveCostTest, IdentityAndSingleDeviceAreFree) {
  EXPECT_EQ(CollectiveCost(CollectiveKind::kIdentity, F32({1 << 20}), Mesh(2, 8)), 0.0);
  EXPECT_EQ(CollectiveCallCost(Collective::Identity(), F32({1 << 20}), Mesh(2, 8)), 0.0);
  for (CollectiveKind k : kKinds) {
    EXPECT_EQ(CollectiveCost(k, F32({1 << 20}), Mesh(1, 1)), 0.0);
    EXPECT_EQ(CollectiveCallCost(Collective{k, 0, 1}, F32({1 << 20}), Mesh(1, 1)), 0.0);
  }
}

TEST(CollectiveCostTest, MonotoneInBytes) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int64_t> dim(1, 4096);
  for (int trial = 0; trial < 200; ++trial) {
    int64_t a = dim(rng), b = dim(rng);
    for (CollectiveKind k : kKinds) {
      EXPECT_LE(CollectiveCost(k, F32({std::min(a, b)}), Mesh(2, 4)),
                CollectiveCost(k, F32({std::max(a, b)}), Mesh(2, 4)));
    }
  }
}

TEST(CollectiveCostTest, GatherAndAllToAllNotCheaperPerByteThanAllReduceHalfVolume) {
  const TensorSpec t = F32({256, 256});
  ClusterSpec mesh = Mesh(1, 8);
  const double ar_per_volume = CollectiveCost(CollectiveKind::kAllReduceSum, t, mesh) / 2.0;
  EXPECT_GT(CollectiveCost(CollectiveKind::kAllGather, t, mesh), ar_per_volume);
  EXPECT_GT(CollectiveCost(CollectiveKind::kAllToAll, t, mesh),
            CollectiveCost(CollectiveKind::kAllGather, t, mesh));
}

TEST(ClusterSpecTest, ParseMesh) {
  EXPECT_EQ(ParseMesh("2x8"), std::make_pair(2, 8));
  EXPECT_EQ(ParseMesh("1X4"), std::make_pair(1, 4));
  for (const char* bad : {"0x4", "2x0", "2", "x", "ax2", "-1x2", "2x8x1", ""}) {
    try {
      ParseMesh(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig) << bad;
    }
  }
}

TEST(ClusterSpecTest, JsonRoundTripAndDefaults) {
  ClusterSpec c = ClusterSpecFromJson(nlohmann::json::parse(
      R"({"m":2,"n":8,"inter_bw":1e9,"efficiency":{"allgather":2.0}})"));
  EXPECT_EQ(c.devices(), 16);
  EXPECT_EQ(c.bandwidth(), 1e9);
  EXPECT_EQ(c.efficiency_of(CollectiveKind::kAllGather), 2.0);
  EXPECT_EQ(c.efficiency_of(CollectiveKind::kAllToAll), 1.5);
  EXPECT_EQ(c.overlap_fraction, 0.5);
  ClusterSpec back = ClusterSpecFromJson(ClusterSpecToJson(c));
  EXPECT_EQ(ClusterSpecToJson(back), ClusterSpecToJson(c));
}

TEST(ClusterSpecTest, RejectsBadValues) {
  for (const char* doc : {R"({"m":0})", R"({"inter_bw":0})", R"({"overlap_fraction":1.5})",
                          R"({"efficiency":{"allreduce":2.0}})", R"({"m":"two"})",
                          R"({"efficiency":{"broadcast":1.0}})"}) {
    try {
      ClusterSpecFromJson(nlohmann::json::parse(doc)).Validate();
      ADD_FAILURE() << doc;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig) << doc;
    }
  }
}

MemberRoute Route(std::string name, Collective c, TensorSpec out, std::vector<int> producers,
                  std::vector<int> conversions) {
  MemberRoute r;
  r.member = std::move(name);
  r.pattern.collective = c;
  r.output = std::move(out);
  r.producers = std::move(producers);
  r.conversions = std::move(conversions);
  return r;
}

// Brute force over every root-to-leaf path of the route DAG.
double LongestPathOracle(const RoutedPlan& plan, const ClusterSpec& mesh) {
  const size_t n = plan.routes.size();
  std::vector<std::vector<std::pair<int, int>>> consumers(n);
  std::vector<bool> has_consumer(n, false);
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < plan.routes[i].producers.size(); ++k) {
      int p = plan.routes[i].producers[k];
      if (p >= 0) {
        consumers[p].push_back({static_cast<int>(i), plan.routes[i].conversions[k]});
        has_consumer[p] = true;
      }
    }
  }
  auto own = [&](int i) {
    return CollectiveCallCost(plan.routes[i].pattern.collective, plan.routes[i].output, mesh);
  };
  auto conv = [&](int c) {
    return c < 0 ? 0.0
                 : CollectiveCallCost(plan.conversions[c].collective, plan.conversions[c].tensor,
                                      mesh);
  };
  double best = 0;
  std::function<void(int, double)> walk = [&](int i, double acc) {
    acc += own(i);
    best = std::max(best, acc + conv(plan.routes[i].exit_conversion));
    for (auto [c, edge] : consumers[i]) walk(c, acc + conv(edge));
  };
  for (size_t i = 0; i < n; ++i) {
    double entry = 0;
    bool root = true;
    for (size_t k = 0; k < plan.routes[i].producers.size(); ++k) {
      if (plan.routes[i].producers[k] >= 0) {
        root = false;
      } else {
        entry = std::max(entry, conv(plan.routes[i].conversions[k]));
      }
    }
    if (root || entry > 0) walk(static_cast<int>(i), entry);
  }
  return best;
}

TEST(PlanCostTest, ForwardIsTheLongerOfTwoBranches) {
  RoutedPlan plan;
  plan.conversions.push_back({"b", ShardSpec::Split(1), ShardSpec::Replica(),
                              Collective::AllGather(1), F32({64, 64})});
  plan.routes.push_back(Route("a", Collective::Identity(), F32({64, 64}), {-1}, {-1}));
  plan.routes.push_back(Route("b", Collective::AllReduceSum(), F32({64, 128}), {0}, {-1}));
  plan.routes.push_back(Route("c", Collective::AllReduceSum(), F32({8, 8}), {0}, {-1}));
  plan.routes.push_back(Route("d", Collective::Identity(), F32({64, 64}), {1, 2}, {0, -1}));
  const ClusterSpec mesh = Mesh(2, 2);
  CostReport r = PlanCost(plan, mesh);
  const double via_b = CollectiveCallCost(Collective::AllReduceSum(), F32({64, 128}), mesh) +
                       CollectiveCallCost(Collective::AllGather(1), F32({64, 64}), mesh);
  EXPECT_DOUBLE_EQ(r.forward_comm, via_b);
  EXPECT_DOUBLE_EQ(r.forward_comm, LongestPathOracle(plan, mesh));
  EXPECT_EQ(r.collective_calls, 3u);
  EXPECT_EQ(r.backward_comm, 0.0);
}

TEST(PlanCostTest, RandomDagsMatchPathEnumeration) {
  std::mt19937 rng(5);
  const Collective choices[] = {Collective::Identity(), Collective::AllReduceSum(),
                                Collective::AllGather(0), Collective::AllToAll(0, 1)};
  for (int trial = 0; trial < 100; ++trial) {
    RoutedPlan plan;
    const int n = 2 + static_cast<int>(rng() % 7);
    for (int i = 0; i < n; ++i) {
      std::vector<int> prods, convs;
      for (int p = 0; p < i; ++p) {
        if (rng() % 3 == 0) {
          prods.push_back(p);
          if (rng() % 2) {
            plan.conversions.push_back({"x", ShardSpec::Partial(), ShardSpec::Replica(),
                                        choices[rng() % 4], F32({1 + int64_t(rng() % 512)})});
            convs.push_back(static_cast<int>(plan.conversions.size()) - 1);
          } else {
            convs.push_back(-1);
          }
        }
      }
      if (prods.empty()) {
        prods.push_back(-1);
        convs.push_back(-1);
      }
      plan.routes.push_back(Route("r" + std::to_string(i), choices[rng() % 4],
                                  F32({1 + int64_t(rng() % 512)}), prods, convs));
    }
    for (const ClusterSpec& mesh : {Mesh(1, 4), Mesh(2, 4)}) {
      EXPECT_NEAR(PlanCost(plan, mesh).forward_comm, LongestPathOracle(plan, mesh), 1e-15);
    }
  }
}

TEST(PlanCostTest, ReplicaGradientsChargeAllReduceWithOverlap) {
  RoutedPlan plan;
  plan.routes.push_back(Route("a", Collective::Identity(), F32({4, 4}), {-1}, {-1}));
  plan.gradients = {{"w0", F32({1024, 1024})}, {"w1", F32({8})}, {"w2", F32({8})}};
  const ClusterSpec mesh = Mesh(1, 8);
  CostReport r = PlanCost(plan, mesh);
  // The 4 MiB tensor travels alone; the two small ones share one bucket.
  const double expected =
      CollectiveCost(CollectiveKind::kAllReduceSum, F32({1024 * 1024 + 16}), mesh) + 2 * 3e-5;
  EXPECT_NEAR(r.backward_comm, expected, 1e-15);
  EXPECT_DOUBLE_EQ(r.effective_backward, 0.5 * r.backward_comm);
  EXPECT_DOUBLE_EQ(r.total, r.forward_comm + r.effective_backward);
  EXPECT_EQ(r.collective_calls, 2u);
}

TEST(PlanCostTest, SingleDeviceCostsNothing) {
  RoutedPlan plan;
  plan.routes.push_back(Route("a", Collective::AllReduceSum(), F32({64, 64}), {-1}, {-1}));
  plan.gradients = {{"w", F32({64, 64})}};
  CostReport r = PlanCost(plan, Mesh(1, 1));
  EXPECT_EQ(r.total, 0.0);
  EXPECT_EQ(r.collective_calls, 0u);
}

TEST(PlanCostTest, UniformBandwidthScalingScalesTransferTime) {
  RoutedPlan plan;
  plan.routes.push_back(Route("a", Collective::AllReduceSum(), F32({128, 128}), {-1}, {-1}));
  plan.gradients = {{"w", F32({512, 512})}};
  ClusterSpec a = Mesh(2, 4), b = Mesh(2, 4);
  a.setup_latency_s = b.setup_latency_s = 0;
  b.intra_bw *= 8;
  b.inter_bw *= 8;
  EXPECT_NEAR(PlanCost(plan, a).total / 8, PlanCost(plan, b).total, 1e-18);
}

}  // namespace
}  // namespace tpplan
