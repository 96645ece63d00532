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

#include <random>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "tpplan/interpreter.h"
#include "tpplan/sharding_patterns.h"
#include "tpplan/status.h"
#include "tpplan/tensor.h"

namespace tpplan {
namespace {

using S = ShardSpec;
using T64 = Tensor<double>;

constexpr double kTol = 1e-12;

std::vector<T64> Distribute(const T64& full, const S& spec, int devices, std::mt19937_64& rng) {
  std::vector<T64> out;
  if (spec.is_split()) {
    for (int d = 0; d < devices; ++d) out.push_back(SliceBlock(full, spec.axis, devices, d));
    return out;
  }
  if (spec.is_replica()) return std::vector<T64>(devices, full);
  std::uniform_real_distribution<double> u(-1, 1);
  T64 rest = full;
  for (int d = 0; d + 1 < devices; ++d) {
    T64 part(full.shape);
    for (size_t i = 0; i < part.data.size(); ++i) {
      part.data[i] = u(rng);
      rest.data[i] -= part.data[i];
    }
    out.push_back(part);
  }
  out.push_back(rest);
  return out;
}

// Rebuilds the logical tensor from per-device values in state `spec`.
// Replica values must agree across devices.
T64 Assemble(const std::vector<T64>& parts, const S& spec) {
  if (spec.is_split()) return Concat(parts, spec.axis);
  T64 out = parts[0];
  if (spec.is_partial()) {
    for (size_t p = 1; p < parts.size(); ++p) {
      for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += parts[p].data[i];
    }
    return out;
  }
  for (const T64& p : parts) EXPECT_LE(RelativeError(p, out), kTol);
  return out;
}

std::vector<int64_t> Local(std::vector<int64_t> shape, const S& spec, int devices) {
  if (spec.is_split()) shape[spec.axis] /= devices;
  return shape;
}

struct Case {
  RawNode node;
  std::vector<TensorSpec> input_specs;
  std::vector<T64> inputs;
  std::optional<T64> weight;
};

TensorSpec Spec(std::vector<int64_t> shape) { return {std::move(shape), DType::kF64, false}; }

Case RandomCase(std::mt19937_64& rng, int devices, uint64_t seed) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto dim = [&] { return static_cast<int64_t>(devices * pick(1, 2)); };
  Case c;
  RawNode& n = c.node;
  n.name = "case";
  std::vector<std::vector<int64_t>> ins;
  switch (pick(0, 6)) {
    case 0: {
      n.op = OpKind::kMatMul;
      std::vector<int64_t> x = {dim(), dim()};
      if (pick(0, 1)) x.push_back(dim());
      int64_t k = x.back(), m = dim();
      ins.push_back(x);
      n.weight = Spec({k, m});
      x.back() = m;
      n.output = Spec(x);
      break;
    }
    case 1: {
      n.op = OpKind::kMatMul;
      n.attrs["mode"] = "attn_scores";
      int64_t b = dim(), s = dim(), t = dim(), h = dim(), hd = pick(1, 2);
      n.attrs["head_dim"] = std::to_string(hd);
      ins = {{b, s, h * hd}, {b, t, h * hd}};
      n.output = Spec({b, h, s, t});
      break;
    }
    case 2: {
      n.op = OpKind::kMatMul;
      n.attrs["mode"] = "attn_context";
      int64_t b = dim(), s = dim(), t = dim(), h = dim(), hd = pick(1, 2);
      ins = {{b, h, s, t}, {b, t, h * hd}};
      n.output = Spec({b, s, h * hd});
      break;
    }
    case 3: {
      n.op = OpKind::kElementwise;
      static const char* kFns[] = {"add", "mul", "gelu", "relu", "tanh"};
      std::string fn = kFns[pick(0, 4)];
      n.attrs["fn"] = fn;
      std::vector<int64_t> x = {dim(), dim()};
      if (pick(0, 1)) x.push_back(dim());
      ins.push_back(x);
      if (fn == "add" || fn == "mul") {
        if (pick(0, 1)) {
          n.weight = Spec({x.back()});
        } else {
          ins.push_back(x);
        }
      }
      n.output = Spec(x);
      break;
    }
    case 4:
    case 5: {
      n.op = pick(0, 1) ? OpKind::kLayerNorm : OpKind::kSoftmax;
      std::vector<int64_t> x = {dim(), dim(), dim()};
      ins.push_back(x);
      if (n.op == OpKind::kLayerNorm && pick(0, 1)) n.weight = Spec({2, x.back()});
      n.output = Spec(x);
      break;
    }
    default: {
      n.op = OpKind::kEmbedding;
      int64_t b = dim(), s = dim(), v = dim() * 2, d = dim();
      n.attrs["vocab"] = std::to_string(v);
      ins.push_back({b, s});
      n.weight = Spec({v, d});
      n.output = Spec({b, s, d});
      break;
    }
  }
  for (size_t i = 0; i < ins.size(); ++i) {
    c.input_specs.push_back(Spec(ins[i]));
    c.inputs.push_back(UniformTensor<double>(ins[i], seed, "in" + std::to_string(i)));
  }
  if (n.weight) c.weight = UniformTensor<double>(n.weight->shape, seed, "w");
  return c;
}

PatternQuery QueryOf(const Case& c) {
  PatternQuery q;
  for (const TensorSpec& t : c.input_specs) q.input_ranks.push_back(t.rank());
  if (c.node.weight) q.weight_rank = c.node.weight->rank();
  q.output_rank = c.node.output.rank();
  if (auto it = c.node.attrs.find("mode"); it != c.node.attrs.end()) q.mode = it->second;
  if (auto it = c.node.attrs.find("fn"); it != c.node.attrs.end()) q.fn = it->second;
  return q;
}

// Runs `p` on D devices and returns the relative error of the reassembled
// result against the unsharded operator.
double CertificateError(const Case& c, const ShardingPattern& p, int devices,
                        std::mt19937_64& rng) {
  const T64 reference = EvalNode<double>(c.node, [&] {
    std::vector<const T64*> v;
    for (const T64& t : c.inputs) v.push_back(&t);
    return v;
  }(), c.weight ? &*c.weight : nullptr);

  std::vector<std::vector<T64>> shards;
  for (size_t i = 0; i < c.inputs.size(); ++i) {
    shards.push_back(Distribute(c.inputs[i], p.input_specs.at(i), devices, rng));
  }
  std::vector<T64> locals;
  for (int d = 0; d < devices; ++d) {
    RawNode local = c.node;
    local.output.shape = Local(c.node.output.shape, p.output_spec, devices);
    std::optional<T64> w;
    if (c.weight) {
      w = p.weight_spec->is_split() ? SliceBlock(*c.weight, p.weight_spec->axis, devices, d)
                                    : *c.weight;
      if (c.node.op == OpKind::kEmbedding && p.weight_spec->is_split() &&
          p.weight_spec->axis == 0) {
        local.attrs["row_offset"] = std::to_string(d * w->dim(0));
      }
    }
    std::vector<const T64*> in;
    for (const auto& s : shards) in.push_back(&s[d]);
    locals.push_back(EvalNode<double>(local, in, w ? &*w : nullptr));
  }
  std::vector<T64> after = RunCollective(p.collective, locals);
  return RelativeError(Assemble(after, p.result_spec()), reference);
}

TEST(ShardingPatternTest, EveryPatternIsEquivalentToTheUnshardedOperator) {
  std::mt19937_64 rng(7);
  std::set<std::string> covered;
  int checked = 0;
  for (int trial = 0; trial < 160; ++trial) {
    const int devices = trial % 2 ? 4 : 2;
    Case c = RandomCase(rng, devices, trial);
    for (const ShardingPattern& p : PatternsFor(c.node.op, QueryOf(c))) {
      if (!PatternFits(p, c.input_specs, c.node.weight, c.node.output, devices)) continue;
      EXPECT_LE(CertificateError(c, p, devices, rng), kTol)
          << p.name << " on " << c.node.output.ShapeString() << " D=" << devices;
      covered.insert(p.name);
      ++checked;
    }
  }
  EXPECT_GE(checked, 100);
  for (const char* name :
       {"matmul.replica", "matmul.col", "matmul.row.allreduce", "matmul.data_parallel",
        "attn_scores.heads", "attn_scores.batch", "attn_context.heads", "attn_context.batch",
        "elementwise.channel", "elementwise.s0", "layernorm.s0", "softmax.s1", "embedding.col",
        "embedding.vocab.allreduce", "embedding.batch.s0"}) {
    EXPECT_TRUE(covered.count(name)) << name;
  }
}

TEST(ShardingPatternTest, ReplicaPatternComesFirst) {
  for (OpKind op : {OpKind::kMatMul, OpKind::kElementwise, OpKind::kLayerNorm, OpKind::kSoftmax,
                    OpKind::kEmbedding, OpKind::kOutput, OpKind::kReshape, OpKind::kAuxiliary}) {
    std::vector<ShardingPattern> patterns = PatternsFor(op);
    ASSERT_FALSE(patterns.empty()) << OpKindName(op);
    const ShardingPattern& p = patterns.front();
    for (const S& s : p.input_specs) EXPECT_TRUE(s.is_replica());
    if (p.weight_spec) {
      EXPECT_TRUE(p.weight_spec->is_replica());
    }
    EXPECT_TRUE(p.output_spec.is_replica());
    EXPECT_TRUE(p.collective.is_identity());
  }
}

TEST(ShardingPatternTest, UnknownOperatorsOnlyReplicate) {
  std::vector<ShardingPattern> patterns = PatternsFor(OpKind::kReshape);
  ASSERT_EQ(patterns.size(), 1u);
  EXPECT_EQ(patterns[0].name, "reshape.replica");
}

TEST(ShardingPatternTest, MatMulPatternNames) {
  std::vector<std::string> names;
  for (const ShardingPattern& p : PatternsFor(OpKind::kMatMul)) names.push_back(p.name);
  EXPECT_EQ(names, (std::vector<std::string>{"matmul.replica", "matmul.col",
                                             "matmul.row.allreduce", "matmul.data_parallel"}));
}

TEST(ShardingPatternTest, RowSplitNeedsAllReduce) {
  for (const ShardingPattern& p : PatternsFor(OpKind::kMatMul)) {
    if (p.name != "matmul.row.allreduce") continue;
    EXPECT_EQ(p.input_specs[0], S::Split(1));
    EXPECT_EQ(*p.weight_spec, S::Split(0));
    EXPECT_EQ(p.output_spec, S::Partial());
    EXPECT_EQ(p.collective, Collective::AllReduceSum());
    EXPECT_EQ(p.result_spec(), S::Replica());
  }
}

TEST(ShardingPatternTest, InferOutputChecksInputStates) {
  const ShardingPattern col = PatternsFor(OpKind::kMatMul)[1];
  auto [state, comm] = InferOutput(col, {S::Replica()});
  EXPECT_EQ(state, S::Split(1));
  EXPECT_TRUE(comm.is_identity());
  try {
    InferOutput(col, {S::Split(0)});
    FAIL() << "expected SpecMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSpecMismatch);
  }
  EXPECT_THROW(InferOutput(col, {}), Error);
}

TEST(ShardingPatternTest, ApplyCollectiveRejectsForeignStates) {
  EXPECT_EQ(ApplyCollective(S::Partial(), Collective::AllReduceSum()), S::Replica());
  EXPECT_EQ(ApplyCollective(S::Split(1), Collective::AllGather(1)), S::Replica());
  EXPECT_EQ(ApplyCollective(S::Partial(), Collective::ReduceScatter(0)), S::Split(0));
  EXPECT_EQ(ApplyCollective(S::Split(0), Collective::AllToAll(0, 1)), S::Split(1));
  EXPECT_THROW(ApplyCollective(S::Replica(), Collective::AllReduceSum()), Error);
  EXPECT_THROW(ApplyCollective(S::Split(0), Collective::AllGather(1)), Error);
  EXPECT_THROW(ApplyCollective(S::Split(1), Collective::ReduceScatter(0)), Error);
}

TEST(ConversionTest, Table) {
  const TensorSpec t = Spec({8, 8});
  EXPECT_EQ(ConversionCollective(S::Replica(), S::Replica(), t), Collective::Identity());
  EXPECT_EQ(ConversionCollective(S::Split(1), S::Split(1), t), Collective::Identity());
  EXPECT_EQ(ConversionCollective(S::Split(0), S::Replica(), t), Collective::AllGather(0));
  EXPECT_EQ(ConversionCollective(S::Partial(), S::Replica(), t), Collective::AllReduceSum());
  EXPECT_EQ(ConversionCollective(S::Split(0), S::Split(1), t), Collective::AllToAll(0, 1));
  EXPECT_EQ(ConversionCollective(S::Partial(), S::Split(1), t), Collective::ReduceScatter(1));
  EXPECT_FALSE(ConversionCollective(S::Replica(), S::Split(0), t));
  EXPECT_FALSE(ConversionCollective(S::Replica(), S::Partial(), t));
  EXPECT_FALSE(ConversionCollective(S::Split(0), S::Partial(), t));
  EXPECT_FALSE(ConversionCollective(S::Split(2), S::Replica(), t));
}

TEST(ConversionTest, EveryRouteMovesTheSameLogicalTensor) {
  std::mt19937_64 rng(11);
  const std::vector<S> states = {S::Replica(), S::Split(0), S::Split(1), S::Partial()};
  for (int devices : {2, 4}) {
    const T64 x = UniformTensor<double>({8, 4}, devices, "x");
    for (const S& from : states) {
      for (const S& to : states) {
        auto c = ConversionCollective(from, to, Spec(x.shape));
        if (!c) continue;
        std::vector<T64> moved = RunCollective(*c, Distribute(x, from, devices, rng));
        EXPECT_LE(RelativeError(Assemble(moved, to), x), kTol)
            << from.ToString() << "->" << to.ToString();
      }
    }
  }
}

TEST(PatternFitsTest, IndivisibleAxesAreRejected) {
  const std::vector<ShardingPattern> mm = PatternsFor(OpKind::kMatMul);
  const std::vector<TensorSpec> in = {Spec({6, 10})};
  const TensorSpec w = Spec({10, 6}), out = Spec({6, 6});
  EXPECT_TRUE(PatternFits(mm[0], in, w, out, 4));
  EXPECT_FALSE(PatternFits(mm[1], in, w, out, 4));
  EXPECT_TRUE(PatternFits(mm[1], in, w, out, 2));
  EXPECT_FALSE(PatternFits(mm[2], in, w, out, 4));
  EXPECT_TRUE(PatternFits(mm[2], in, w, out, 2));
  EXPECT_TRUE(SpecFits(S::Partial(), Spec({3}), 4));
  EXPECT_FALSE(SpecFits(S::Split(0), Spec({3}), 2));
}

}  // namespace
}  // namespace tpplan
