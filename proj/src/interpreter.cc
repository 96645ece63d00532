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

#include "tpplan/interpreter.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "tpplan/status.h"

namespace tpplan {

namespace {

Error Mismatch(const RawNode& node, const std::string& what) {
  return Error(ErrorKind::kShapeMismatch, node.name + ": " + what);
}

std::string Attr(const RawNode& node, const std::string& key, const std::string& fallback = "") {
  auto it = node.attrs.find(key);
  return it == node.attrs.end() ? fallback : it->second;
}

int64_t IntAttr(const RawNode& node, const std::string& key, int64_t fallback) {
  auto it = node.attrs.find(key);
  if (it == node.attrs.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorKind::kParse, node.name + ": attribute " + key + " is not an integer");
  }
}

template <typename T>
T Gelu(T x) {
  const T c = static_cast<T>(std::sqrt(2.0 / std::numbers::pi));
  return static_cast<T>(0.5) * x * (static_cast<T>(1) + std::tanh(c * (x + static_cast<T>(0.044715) * x * x * x)));
}

template <typename T>
Tensor<T> Linear(const RawNode& node, const Tensor<T>& x, const Tensor<T>& w) {
  if (w.rank() != 2 || x.rank() < 1 || x.shape.back() != w.dim(0)) {
    throw Mismatch(node, "matmul of " + ShapeToString(x.shape) + " by " + ShapeToString(w.shape));
  }
  const int64_t k = w.dim(0), n = w.dim(1), rows = x.size() / k;
  std::vector<int64_t> shape = x.shape;
  shape.back() = n;
  Tensor<T> y(shape);
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t j = 0; j < n; ++j) {
      T acc = 0;
      for (int64_t i = 0; i < k; ++i) acc += x.data[r * k + i] * w.data[i * n + j];
      y.data[r * n + j] = acc;
    }
  }
  return y;
}

template <typename T>
Tensor<T> AttnScores(const RawNode& node, const Tensor<T>& q, const Tensor<T>& k) {
  const int64_t hd = IntAttr(node, "head_dim", q.rank() == 3 ? q.dim(2) : 1);
  if (q.rank() != 3 || k.rank() != 3 || q.dim(0) != k.dim(0) || q.dim(2) != k.dim(2) ||
      hd < 1 || q.dim(2) % hd != 0) {
    throw Mismatch(node, "attention scores of " + ShapeToString(q.shape) + " and " +
                             ShapeToString(k.shape));
  }
  const int64_t b = q.dim(0), s = q.dim(1), t = k.dim(1), d = q.dim(2), h = d / hd;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  Tensor<T> out({b, h, s, t});
  for (int64_t bi = 0; bi < b; ++bi)
    for (int64_t hi = 0; hi < h; ++hi)
      for (int64_t si = 0; si < s; ++si)
        for (int64_t ti = 0; ti < t; ++ti) {
          T acc = 0;
          for (int64_t j = 0; j < hd; ++j) {
            acc += q.data[(bi * s + si) * d + hi * hd + j] * k.data[(bi * t + ti) * d + hi * hd + j];
          }
          out.data[((bi * h + hi) * s + si) * t + ti] = acc * scale;
        }
  return out;
}

template <typename T>
Tensor<T> AttnContext(const RawNode& node, const Tensor<T>& p, const Tensor<T>& v) {
  if (p.rank() != 4 || v.rank() != 3 || p.dim(0) != v.dim(0) || p.dim(3) != v.dim(1) ||
      v.dim(2) % p.dim(1) != 0) {
    throw Mismatch(node, "attention context of " + ShapeToString(p.shape) + " and " +
                             ShapeToString(v.shape));
  }
  const int64_t b = p.dim(0), h = p.dim(1), s = p.dim(2), t = p.dim(3), d = v.dim(2), hd = d / h;
  Tensor<T> out({b, s, d});
  for (int64_t bi = 0; bi < b; ++bi)
    for (int64_t hi = 0; hi < h; ++hi)
      for (int64_t si = 0; si < s; ++si)
        for (int64_t j = 0; j < hd; ++j) {
          T acc = 0;
          for (int64_t ti = 0; ti < t; ++ti) {
            acc += p.data[((bi * h + hi) * s + si) * t + ti] * v.data[(bi * t + ti) * d + hi * hd + j];
          }
          out.data[(bi * s + si) * d + hi * hd + j] = acc;
        }
  return out;
}

template <typename T>
Tensor<T> SoftmaxLast(const Tensor<T>& x) {
  Tensor<T> y = x;
  const int64_t n = x.shape.empty() ? 1 : x.shape.back();
  for (int64_t r = 0; r < x.size() / n; ++r) {
    T* row = y.data.data() + r * n;
    T mx = *std::max_element(row, row + n);
    T sum = 0;
    for (int64_t i = 0; i < n; ++i) sum += (row[i] = std::exp(row[i] - mx));
    for (int64_t i = 0; i < n; ++i) row[i] /= sum;
  }
  return y;
}

template <typename T>
Tensor<T> LayerNormLast(const RawNode& node, const Tensor<T>& x, const Tensor<T>* w) {
  const int64_t n = x.shape.back();
  if (w && (w->rank() != 2 || w->dim(0) != 2 || w->dim(1) != n)) {
    throw Mismatch(node, "layer norm weight " + ShapeToString(w->shape));
  }
  Tensor<T> y = x;
  for (int64_t r = 0; r < x.size() / n; ++r) {
    T* row = y.data.data() + r * n;
    T mean = 0, var = 0;
    for (int64_t i = 0; i < n; ++i) mean += row[i];
    mean /= static_cast<T>(n);
    for (int64_t i = 0; i < n; ++i) var += (row[i] - mean) * (row[i] - mean);
    var /= static_cast<T>(n);
    const T inv = static_cast<T>(1) / std::sqrt(var + static_cast<T>(1e-5));
    for (int64_t i = 0; i < n; ++i) {
      row[i] = (row[i] - mean) * inv;
      if (w) row[i] = row[i] * w->data[i] + w->data[n + i];
    }
  }
  return y;
}

template <typename T>
Tensor<T> Elementwise(const RawNode& node, const std::vector<const Tensor<T>*>& in,
                      const Tensor<T>* w) {
  if (in.empty()) throw Mismatch(node, "elementwise operator without inputs");
  const std::string fn = Attr(node, "fn", "add");
  Tensor<T> y = *in[0];
  if (fn == "gelu" || fn == "relu" || fn == "tanh") {
    for (T& v : y.data) {
      v = fn == "gelu" ? Gelu(v) : fn == "relu" ? std::max(v, static_cast<T>(0)) : std::tanh(v);
    }
    return y;
  }
  const bool mul = fn == "mul";
  for (size_t k = 1; k < in.size(); ++k) {
    if (in[k]->shape != y.shape) {
      throw Mismatch(node, "operands " + ShapeToString(y.shape) + " and " +
                               ShapeToString(in[k]->shape));
    }
    for (size_t i = 0; i < y.data.size(); ++i) {
      y.data[i] = mul ? y.data[i] * in[k]->data[i] : y.data[i] + in[k]->data[i];
    }
  }
  if (w) {
    const int64_t n = y.shape.back();
    if (w->size() != n) {
      throw Mismatch(node, "channel weight " + ShapeToString(w->shape) + " for " +
                               ShapeToString(y.shape));
    }
    for (size_t i = 0; i < y.data.size(); ++i) {
      y.data[i] = mul ? y.data[i] * w->data[i % n] : y.data[i] + w->data[i % n];
    }
  }
  return y;
}

template <typename T>
Tensor<T> Embedding(const RawNode& node, const Tensor<T>& ids, const Tensor<T>& w) {
  if (w.rank() != 2 || !node.weight) throw Mismatch(node, "embedding table must be 2-D");
  const int64_t vocab = IntAttr(node, "vocab", node.weight->shape[0]);
  const int64_t offset = IntAttr(node, "row_offset", 0);
  const int64_t rows = w.dim(0), d = w.dim(1);
  std::vector<int64_t> shape = ids.shape;
  shape.push_back(d);
  Tensor<T> y(shape);
  for (int64_t i = 0; i < ids.size(); ++i) {
    int64_t row = static_cast<int64_t>(std::floor((static_cast<double>(ids.data[i]) + 1.0) / 2.0 *
                                                  static_cast<double>(vocab)));
    row = std::clamp<int64_t>(row, 0, vocab - 1) - offset;
    if (row < 0 || row >= rows) continue;
    std::copy(w.data.begin() + row * d, w.data.begin() + (row + 1) * d, y.data.begin() + i * d);
  }
  return y;
}

template <typename T>
Tensor<T> SumAll(const std::vector<Tensor<T>>& inputs) {
  Tensor<T> sum = inputs[0];
  for (size_t p = 1; p < inputs.size(); ++p) {
    for (size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += inputs[p].data[i];
  }
  return sum;
}

}  // namespace

std::vector<std::string> GraphOutputs(const RawGraph& graph) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const RawNode& n : graph.nodes()) {
    if (n.op == OpKind::kOutput && seen.insert(n.name).second) out.push_back(n.name);
  }
  if (!out.empty()) return out;
  for (const RawNode& n : graph.nodes()) {
    if (n.op == OpKind::kAuxiliary || n.op == OpKind::kCollective) continue;
    bool consumed = false;
    for (const std::string& c : graph.consumers(n.name, n.device)) {
      consumed |= graph.node(c, n.device).op != OpKind::kAuxiliary;
    }
    if (!consumed && seen.insert(n.name).second) out.push_back(n.name);
  }
  return out;
}

template <typename T>
Tensor<T> InitWeight(const RawNode& node, uint64_t seed) {
  const std::vector<int64_t>& shape = node.weight->shape;
  const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<int64_t>(shape[0], 1)));
  return UniformTensor<T>(shape, seed, node.name, scale);
}

template <typename T>
ValueMap<T> RandomInputs(const RawGraph& graph, uint64_t seed) {
  ValueMap<T> out;
  for (const RawNode& n : graph.nodes()) {
    if (n.op == OpKind::kInput && !out.count(n.name)) {
      out[n.name] = UniformTensor<T>(n.output.shape, seed, "input:" + n.name);
    }
  }
  return out;
}

template <typename T>
Tensor<T> EvalNode(const RawNode& node, const std::vector<const Tensor<T>*>& in,
                   const Tensor<T>* weight) {
  auto need = [&](size_t n) {
    if (in.size() != n) {
      throw Mismatch(node, "expected " + std::to_string(n) + " inputs, got " +
                               std::to_string(in.size()));
    }
  };
  Tensor<T> y;
  switch (node.op) {
    case OpKind::kMatMul: {
      const std::string mode = Attr(node, "mode", "linear");
      if (mode == "attn_scores") {
        need(2);
        y = AttnScores(node, *in[0], *in[1]);
      } else if (mode == "attn_context") {
        need(2);
        y = AttnContext(node, *in[0], *in[1]);
      } else if (weight) {
        need(1);
        y = Linear(node, *in[0], *weight);
      } else {
        need(2);
        y = Linear(node, *in[0], *in[1]);
      }
      break;
    }
    case OpKind::kElementwise:
      y = Elementwise(node, in, weight);
      break;
    case OpKind::kLayerNorm:
      need(1);
      y = LayerNormLast(node, *in[0], weight);
      break;
    case OpKind::kSoftmax:
      need(1);
      y = SoftmaxLast(*in[0]);
      break;
    case OpKind::kEmbedding:
      need(1);
      if (!weight) throw Mismatch(node, "embedding without table");
      y = Embedding(node, *in[0], *weight);
      break;
    case OpKind::kReshape:
      need(1);
      y = *in[0];
      if (Tensor<T>::NumElements(node.output.shape) != y.size()) {
        throw Mismatch(node, "reshape of " + ShapeToString(y.shape) + " to " +
                                 ShapeToString(node.output.shape));
      }
      y.shape = node.output.shape;
      break;
    case OpKind::kOutput:
      need(1);
      y = *in[0];
      break;
    case OpKind::kInput:
    case OpKind::kAuxiliary:
    case OpKind::kCollective:
      throw Error(ErrorKind::kInternal, node.name + ": not a local operator");
  }
  if (y.shape != node.output.shape) {
    throw Mismatch(node, "computed " + ShapeToString(y.shape) + " but declared " +
                             ShapeToString(node.output.shape));
  }
  return y;
}

template <typename T>
std::vector<Tensor<T>> RunCollective(const Collective& c, const std::vector<Tensor<T>>& inputs) {
  if (inputs.empty()) throw Error(ErrorKind::kProtocol, "collective without participants");
  for (const Tensor<T>& t : inputs) {
    if (t.shape != inputs[0].shape) {
      throw Error(ErrorKind::kProtocol, c.ToString() + ": participant shapes " +
                                            ShapeToString(t.shape) + " and " +
                                            ShapeToString(inputs[0].shape) + " differ");
    }
  }
  const int d = static_cast<int>(inputs.size());
  std::vector<Tensor<T>> out;
  switch (c.kind) {
    case CollectiveKind::kIdentity:
      return inputs;
    case CollectiveKind::kAllReduceSum:
      out.assign(d, SumAll(inputs));
      return out;
    case CollectiveKind::kAllGather:
      out.assign(d, Concat(inputs, c.axis));
      return out;
    case CollectiveKind::kReduceScatter: {
      Tensor<T> sum = SumAll(inputs);
      for (int i = 0; i < d; ++i) out.push_back(SliceBlock(sum, c.axis, d, i));
      return out;
    }
    case CollectiveKind::kAllToAll: {
      // Device i sends block j of its dst axis to device j, which concatenates
      // the received blocks along the src axis.
      for (int j = 0; j < d; ++j) {
        std::vector<Tensor<T>> received;
        for (int i = 0; i < d; ++i) received.push_back(SliceBlock(inputs[i], c.axis, d, j));
        out.push_back(Concat(received, c.src_axis));
      }
      return out;
    }
  }
  throw Error(ErrorKind::kProtocol, "unknown collective");
}

template <typename T>
ValueMap<T> ExecuteSingle(const RawGraph& graph, const ValueMap<T>& inputs, uint64_t seed) {
  if (graph.version() != 1) {
    throw Error(ErrorKind::kBadConfig, "single-device execution needs a schema-1 graph");
  }
  const GroupedGraph grouped = TrimAndGroup(graph);
  const RawGraph& compute = grouped.compute();
  ValueMap<T> values;
  for (const RawNode& n : compute.nodes()) {
    if (n.op == OpKind::kInput) {
      auto it = inputs.find(n.name);
      if (it == inputs.end()) throw Error(ErrorKind::kShapeMismatch, "input '" + n.name + "' unbound");
      if (it->second.shape != n.output.shape) {
        throw Mismatch(n, "bound " + ShapeToString(it->second.shape) + " to input " +
                              ShapeToString(n.output.shape));
      }
      values[n.name] = it->second;
      continue;
    }
    std::vector<const Tensor<T>*> in;
    for (const std::string& i : n.inputs) in.push_back(&values.at(i));
    Tensor<T> w;
    if (n.weight) w = InitWeight<T>(n, seed);
    values[n.name] = EvalNode(n, in, n.weight ? &w : nullptr);
  }
  ValueMap<T> out;
  for (const std::string& name : GraphOutputs(compute)) out[name] = values.at(name);
  return out;
}

template <typename T>
ValueMap<T> ExecuteSharded(const RawGraph& pgraph, const ValueMap<T>& inputs, uint64_t seed,
                           const std::vector<std::string>& outputs) {
  const int devices = pgraph.device_count();
  if (pgraph.version() != 2 || devices < 1) {
    throw Error(ErrorKind::kBadConfig, "sharded execution needs a schema-2 graph");
  }
  // Stage order: device 0's topological order; every device runs the same
  // program.
  std::vector<const RawNode*> program;
  for (const RawNode& n : pgraph.nodes()) {
    if (n.device == 0 && n.op != OpKind::kAuxiliary) program.push_back(&n);
  }
  size_t per_device = 0;
  for (const RawNode& n : pgraph.nodes()) per_device += n.device == 0;
  for (int d = 1; d < devices; ++d) {
    size_t count = 0;
    for (const RawNode& n : pgraph.nodes()) count += n.device == d;
    if (count != per_device) {
      throw Error(ErrorKind::kProtocol, "device " + std::to_string(d) + " runs a different program");
    }
  }
  std::vector<ValueMap<T>> mem(devices);
  for (const RawNode* proto : program) {
    std::vector<const RawNode*> local(devices);
    for (int d = 0; d < devices; ++d) {
      if (!pgraph.contains(proto->name, d)) {
        throw Error(ErrorKind::kProtocol, "node '" + proto->name + "' missing on device " +
                                              std::to_string(d));
      }
      local[d] = &pgraph.node(proto->name, d);
    }
    if (proto->op == OpKind::kCollective) {
      const std::vector<int>& parts = proto->participants;
      if (!proto->collective || proto->inputs.size() != 1 || parts.empty()) {
        throw Error(ErrorKind::kProtocol, "malformed collective '" + proto->name + "'");
      }
      std::vector<bool> covered(devices, false);
      for (int d : parts) {
        if (d < 0 || d >= devices || covered[d]) {
          throw Error(ErrorKind::kProtocol, "bad participant set on '" + proto->name + "'");
        }
        covered[d] = true;
      }
      for (int d = 0; d < devices; ++d) {
        if (covered[d] && (local[d]->participants != parts || local[d]->collective != proto->collective)) {
          throw Error(ErrorKind::kProtocol, "participants of '" + proto->name + "' disagree");
        }
        if (!covered[d]) throw Error(ErrorKind::kProtocol, "device " + std::to_string(d) +
                                                               " skips collective '" + proto->name + "'");
      }
      std::vector<Tensor<T>> in;
      for (int d : parts) in.push_back(mem[d].at(local[d]->inputs[0]));
      std::vector<Tensor<T>> res = RunCollective(*proto->collective, in);
      for (size_t i = 0; i < parts.size(); ++i) {
        const RawNode& n = *local[parts[i]];
        if (res[i].shape != n.output.shape) {
          throw Mismatch(n, "collective produced " + ShapeToString(res[i].shape) + " but declared " +
                                ShapeToString(n.output.shape));
        }
        mem[parts[i]][n.name] = std::move(res[i]);
      }
      continue;
    }
    for (int d = 0; d < devices; ++d) {
      const RawNode& n = *local[d];
      if (n.op == OpKind::kInput) {
        auto it = inputs.find(n.name);
        if (it == inputs.end()) throw Error(ErrorKind::kShapeMismatch, "input '" + n.name + "' unbound");
        if (it->second.shape != n.output.shape) {
          throw Mismatch(n, "bound " + ShapeToString(it->second.shape) + " to input " +
                                ShapeToString(n.output.shape));
        }
        mem[d][n.name] = it->second;
        continue;
      }
      std::vector<const Tensor<T>*> in;
      for (const std::string& i : n.inputs) in.push_back(&mem[d].at(i));
      Tensor<T> w;
      if (n.weight) {
        w = InitWeight<T>(n, seed);
        if (n.weight_shard && n.weight_shard->is_split()) {
          w = SliceBlock(w, n.weight_shard->axis, devices, d);
        }
      }
      mem[d][n.name] = EvalNode(n, in, n.weight ? &w : nullptr);
    }
  }
  ValueMap<T> out;
  for (const std::string& name : outputs.empty() ? GraphOutputs(pgraph) : outputs) {
    // A sharded leaf reaches Replica through its trailing collectives.
    std::string cur = name;
    for (bool moved = true; moved;) {
      moved = false;
      std::string next;
      for (const std::string& c : pgraph.consumers(cur, 0)) {
        if (pgraph.node(c, 0).op != OpKind::kCollective) continue;
        if (c == cur + "/to_R" || next.empty()) next = c;
      }
      if (!next.empty()) {
        moved = next != cur + "/to_R";
        cur = next;
      }
    }
    out[name] = mem[0].at(cur);
  }
  return out;
}

namespace {

template <typename T>
void CompareTrials(const RawGraph& graph, const RawGraph& pgraph, int trials, uint64_t seed,
                   EquivalenceReport& report) {
  for (int t = 0; t < trials; ++t) {
    const uint64_t trial_seed = seed + static_cast<uint64_t>(t);
    ValueMap<T> inputs = RandomInputs<T>(graph, trial_seed);
    ValueMap<T> want = ExecuteSingle<T>(graph, inputs, trial_seed);
    std::vector<std::string> names;
    for (const auto& [name, value] : want) names.push_back(name);
    ValueMap<T> got = ExecuteSharded<T>(pgraph, inputs, trial_seed, names);
    for (const auto& [name, value] : want) {
      auto it = got.find(name);
      double err = it == got.end() ? std::numeric_limits<double>::infinity()
                                   : RelativeError(it->second, value);
      if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
      double& slot = report.max_error[name];
      slot = std::max(slot, err);
      report.worst = std::max(report.worst, err);
    }
  }
}

}  // namespace

EquivalenceReport CheckEquivalence(const RawGraph& graph, const RawGraph& pgraph, int trials,
                                   double tolerance, DType dtype, uint64_t seed) {
  EquivalenceReport report;
  report.trials = std::max(trials, 1);
  report.tolerance = tolerance;
  report.dtype = dtype;
  try {
    if (dtype == DType::kF64) {
      CompareTrials<double>(graph, pgraph, report.trials, seed, report);
    } else {
      CompareTrials<float>(graph, pgraph, report.trials, seed, report);
    }
  } catch (const Error&) {
    report.worst = std::numeric_limits<double>::infinity();
  }
  report.pass = !report.max_error.empty() && report.worst <= tolerance;
  return report;
}

nlohmann::json EquivalenceReportToJson(const EquivalenceReport& r) {
  nlohmann::json errors = nlohmann::json::object();
  for (const auto& [name, e] : r.max_error) errors[name] = e;
  return {{"trials", r.trials},
          {"tolerance", r.tolerance},
          {"dtype", std::string(DTypeName(r.dtype))},
          {"max_relative_error", errors},
          {"worst", r.worst},
          {"pass", r.pass}};
}

#define TPPLAN_INSTANTIATE(T)                                                                  \
  template Tensor<T> InitWeight<T>(const RawNode&, uint64_t);                                  \
  template ValueMap<T> RandomInputs<T>(const RawGraph&, uint64_t);                             \
  template Tensor<T> EvalNode<T>(const RawNode&, const std::vector<const Tensor<T>*>&,         \
                                 const Tensor<T>*);                                            \
  template std::vector<Tensor<T>> RunCollective<T>(const Collective&,                          \
                                                   const std::vector<Tensor<T>>&);             \
  template ValueMap<T> ExecuteSingle<T>(const RawGraph&, const ValueMap<T>&, uint64_t);        \
  template ValueMap<T> ExecuteSharded<T>(const RawGraph&, const ValueMap<T>&, uint64_t,         \
                                          const std::vector<std::string>&);

TPPLAN_INSTANTIATE(float)
TPPLAN_INSTANTIATE(double)

#undef TPPLAN_INSTANTIATE

}  // namespace tpplan
