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

#include "tpplan/sharding_patterns.h"

#include "tpplan/status.h"

namespace tpplan {

namespace {

using S = ShardSpec;

ShardingPattern Make(OpKind op, std::string name, std::vector<ShardSpec> inputs,
                     std::optional<ShardSpec> weight, ShardSpec output,
                     Collective collective = Collective::Identity()) {
  return {op, std::move(name), std::move(inputs), weight, output, collective};
}

std::string Lower(std::string_view s) {
  std::string out;
  for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<ShardingPattern> MatMulPatterns(const PatternQuery& q) {
  const OpKind op = OpKind::kMatMul;
  std::vector<ShardingPattern> out;
  if (q.mode == "attn_scores") {
    // q (b,s,d) . k (b,t,d) -> (b,h,s,t); heads live in contiguous d-slices.
    out.push_back(Make(op, "attn_scores.replica", {S::Replica(), S::Replica()}, std::nullopt, S::Replica()));
    out.push_back(Make(op, "attn_scores.heads", {S::Split(2), S::Split(2)}, std::nullopt, S::Split(1)));
    out.push_back(Make(op, "attn_scores.batch", {S::Split(0), S::Split(0)}, std::nullopt, S::Split(0)));
    return out;
  }
  if (q.mode == "attn_context") {
    // p (b,h,s,t) . v (b,t,d) -> (b,s,d)
    out.push_back(Make(op, "attn_context.replica", {S::Replica(), S::Replica()}, std::nullopt, S::Replica()));
    out.push_back(Make(op, "attn_context.heads", {S::Split(1), S::Split(2)}, std::nullopt, S::Split(2)));
    out.push_back(Make(op, "attn_context.batch", {S::Split(0), S::Split(0)}, std::nullopt, S::Split(0)));
    return out;
  }
  const int r = q.input_ranks.empty() ? 2 : q.input_ranks[0];
  const int last = r - 1;
  out.push_back(Make(op, "matmul.replica", {S::Replica()}, S::Replica(), S::Replica()));
  out.push_back(Make(op, "matmul.col", {S::Replica()}, S::Split(1), S::Split(last)));
  out.push_back(Make(op, "matmul.row.allreduce", {S::Split(last)}, S::Split(0), S::Partial(),
                     Collective::AllReduceSum()));
  for (int a = 0; a < last; ++a) {
    out.push_back(Make(op, a == 0 ? "matmul.data_parallel" : "matmul.rows.s" + std::to_string(a),
                       {S::Split(a)}, S::Replica(), S::Split(a)));
  }
  return out;
}

std::vector<ShardingPattern> ElementwisePatterns(const PatternQuery& q) {
  const OpKind op = OpKind::kElementwise;
  const size_t n = std::max<size_t>(q.input_ranks.size(), 1);
  const int r = q.input_ranks.empty() ? q.output_rank : q.input_ranks[0];
  std::vector<ShardingPattern> out;
  if (q.weight_rank) {
    // Per-channel bias or scale along the last axis.
    out.push_back(Make(op, "elementwise.replica", {S::Replica()}, S::Replica(), S::Replica()));
    for (int a = 0; a + 1 < r; ++a) {
      out.push_back(Make(op, "elementwise.s" + std::to_string(a), {S::Split(a)}, S::Replica(), S::Split(a)));
    }
    out.push_back(Make(op, "elementwise.channel", {S::Split(r - 1)}, S::Split(0), S::Split(r - 1)));
    return out;
  }
  out.push_back(Make(op, "elementwise.replica", std::vector<ShardSpec>(n, S::Replica()),
                     std::nullopt, S::Replica()));
  for (int a = 0; a < r; ++a) {
    out.push_back(Make(op, "elementwise.s" + std::to_string(a), std::vector<ShardSpec>(n, S::Split(a)),
                       std::nullopt, S::Split(a)));
  }
  return out;
}

std::vector<ShardingPattern> RowwisePatterns(OpKind op, const std::string& prefix,
                                             const PatternQuery& q) {
  // Normalization over the last axis: that axis must stay whole.
  const int r = q.input_ranks.empty() ? 2 : q.input_ranks[0];
  std::optional<ShardSpec> w;
  if (q.weight_rank) w = S::Replica();
  std::vector<ShardingPattern> out;
  out.push_back(Make(op, prefix + ".replica", {S::Replica()}, w, S::Replica()));
  for (int a = 0; a + 1 < r; ++a) {
    out.push_back(Make(op, prefix + ".s" + std::to_string(a), {S::Split(a)}, w, S::Split(a)));
  }
  return out;
}

std::vector<ShardingPattern> EmbeddingPatterns(const PatternQuery& q) {
  const OpKind op = OpKind::kEmbedding;
  const int r = q.input_ranks.empty() ? 2 : q.input_ranks[0];
  std::vector<ShardingPattern> out;
  out.push_back(Make(op, "embedding.replica", {S::Replica()}, S::Replica(), S::Replica()));
  out.push_back(Make(op, "embedding.col", {S::Replica()}, S::Split(1), S::Split(r)));
  out.push_back(Make(op, "embedding.vocab.allreduce", {S::Replica()}, S::Split(0), S::Partial(),
                     Collective::AllReduceSum()));
  for (int a = 0; a < r; ++a) {
    out.push_back(Make(op, "embedding.batch.s" + std::to_string(a), {S::Split(a)}, S::Replica(), S::Split(a)));
  }
  return out;
}

}  // namespace

ShardSpec ShardingPattern::result_spec() const { return ApplyCollective(output_spec, collective); }

std::vector<ShardingPattern> PatternsFor(OpKind op, const PatternQuery& q) {
  switch (op) {
    case OpKind::kMatMul:
      return MatMulPatterns(q);
    case OpKind::kElementwise:
      return ElementwisePatterns(q);
    case OpKind::kLayerNorm:
      return RowwisePatterns(op, "layernorm", q);
    case OpKind::kSoftmax:
      return RowwisePatterns(op, "softmax", q);
    case OpKind::kEmbedding:
      return EmbeddingPatterns(q);
    case OpKind::kInput:
      return {Make(op, "input.replica", {}, std::nullopt, S::Replica())};
    case OpKind::kOutput:
      return {Make(op, "output.replica", {S::Replica()}, std::nullopt, S::Replica())};
    case OpKind::kReshape:
    case OpKind::kAuxiliary:
    case OpKind::kCollective:
      break;
  }
  std::string prefix = Lower(OpKindName(op));
  std::optional<ShardSpec> w;
  if (q.weight_rank) w = S::Replica();
  return {Make(op, prefix + ".replica",
               std::vector<ShardSpec>(std::max<size_t>(q.input_ranks.size(), 1), S::Replica()), w,
               S::Replica())};
}

std::vector<ShardingPattern> PatternsFor(OpKind op) {
  PatternQuery q;
  q.input_ranks = {2};
  q.output_rank = 2;
  if (op == OpKind::kMatMul || op == OpKind::kEmbedding) q.weight_rank = 2;
  if (op == OpKind::kEmbedding) q.output_rank = 3;
  if (op == OpKind::kInput) q.input_ranks.clear();
  if (op == OpKind::kElementwise) q.fn = "gelu";
  return PatternsFor(op, q);
}

PatternQuery QueryFor(const RawGraph& compute, const RawNode& node) {
  PatternQuery q;
  for (const std::string& in : node.inputs) {
    q.input_ranks.push_back(compute.node(in, node.device).output.rank());
  }
  if (node.weight) q.weight_rank = node.weight->rank();
  q.output_rank = node.output.rank();
  if (auto it = node.attrs.find("mode"); it != node.attrs.end() && it->second != "linear") {
    q.mode = it->second;
  }
  if (auto it = node.attrs.find("fn"); it != node.attrs.end()) q.fn = it->second;
  return q;
}

ShardSpec ApplyCollective(const ShardSpec& pre, const Collective& c) {
  auto mismatch = [&]() {
    return Error(ErrorKind::kSpecMismatch,
                 c.ToString() + " cannot be applied to state " + pre.ToString());
  };
  switch (c.kind) {
    case CollectiveKind::kIdentity:
      return pre;
    case CollectiveKind::kAllReduceSum:
      if (!pre.is_partial()) throw mismatch();
      return S::Replica();
    case CollectiveKind::kAllGather:
      if (pre != S::Split(c.axis)) throw mismatch();
      return S::Replica();
    case CollectiveKind::kReduceScatter:
      if (!pre.is_partial()) throw mismatch();
      return S::Split(c.axis);
    case CollectiveKind::kAllToAll:
      if (pre != S::Split(c.src_axis)) throw mismatch();
      return S::Split(c.axis);
  }
  throw mismatch();
}

std::pair<ShardSpec, Collective> InferOutput(const ShardingPattern& pattern,
                                             const std::vector<ShardSpec>& input_states) {
  if (input_states != pattern.input_specs) {
    std::string got;
    for (const ShardSpec& s : input_states) got += s.ToString() + " ";
    throw Error(ErrorKind::kSpecMismatch,
                "pattern " + pattern.name + " does not accept input states " + got);
  }
  return {pattern.result_spec(), pattern.collective};
}

std::optional<Collective> ConversionCollective(const ShardSpec& from, const ShardSpec& to,
                                               const TensorSpec& tensor) {
  const int rank = tensor.rank();
  if ((from.is_split() && from.axis >= rank) || (to.is_split() && to.axis >= rank)) {
    return std::nullopt;
  }
  if (from == to && !from.is_partial()) return Collective::Identity();
  if (to.is_replica()) {
    if (from.is_split()) return Collective::AllGather(from.axis);
    if (from.is_partial()) return Collective::AllReduceSum();
  }
  if (to.is_split()) {
    if (from.is_split()) return Collective::AllToAll(from.axis, to.axis);
    if (from.is_partial()) return Collective::ReduceScatter(to.axis);
  }
  return std::nullopt;
}

bool SpecFits(const ShardSpec& spec, const TensorSpec& tensor, int devices) {
  if (!spec.is_split()) return true;
  if (spec.axis < 0 || spec.axis >= tensor.rank()) return false;
  return tensor.shape[spec.axis] % devices == 0;
}

bool PatternFits(const ShardingPattern& pattern, const std::vector<TensorSpec>& inputs,
                 const std::optional<TensorSpec>& weight, const TensorSpec& output, int devices) {
  if (inputs.size() != pattern.input_specs.size()) return false;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (!SpecFits(pattern.input_specs[i], inputs[i], devices)) return false;
  }
  if (pattern.weight_spec.has_value() != weight.has_value()) return false;
  if (weight && !SpecFits(*pattern.weight_spec, *weight, devices)) return false;
  if (!SpecFits(pattern.output_spec, output, devices)) return false;
  return SpecFits(pattern.result_spec(), output, devices);
}

}  // namespace tpplan
