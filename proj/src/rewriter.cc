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

#include "tpplan/rewriter.h"

#include "tpplan/status.h"

namespace tpplan {

size_t ParallelGraph::collective_count() const {
  size_t n = 0;
  for (const RawNode& node : graph.nodes()) n += node.device == 0 && node.op == OpKind::kCollective;
  return n;
}

std::vector<const RawNode*> ParallelGraph::device_nodes(int device) const {
  std::vector<const RawNode*> out;
  for (const RawNode& node : graph.nodes()) {
    if (node.device == device) out.push_back(&node);
  }
  return out;
}

std::vector<int64_t> LocalShape(const TensorSpec& tensor, const ShardSpec& state, int devices,
                                const std::string& node) {
  std::vector<int64_t> shape = tensor.shape;
  if (!state.is_split()) return shape;
  if (state.axis < 0 || state.axis >= tensor.rank() || shape[state.axis] % devices != 0) {
    throw Error(ErrorKind::kIndivisibleShard,
                node + ": axis " + std::to_string(state.axis) + " of " + tensor.ShapeString() +
                    " does not divide across " + std::to_string(devices) + " devices");
  }
  shape[state.axis] /= devices;
  return shape;
}

namespace {

std::string OwnerOf(const GroupedGraph& graph, const std::string& aux) {
  std::string best;
  for (const GraphNode& g : graph.nodes()) {
    const std::string& id = g.id;
    if (aux.size() > id.size() && aux.compare(0, id.size(), id) == 0 && aux[id.size()] == '/' &&
        id.size() > best.size()) {
      best = id;
    }
  }
  return best;
}

}  // namespace

ParallelGraph RewriteGraph(const GroupedGraph& graph, const RoutedPlan& plan,
                           const ClusterSpec& mesh) {
  mesh.Validate();
  const int devices = mesh.devices();
  const RawGraph& compute = graph.compute();
  if (plan.routes.size() != compute.size()) {
    throw Error(ErrorKind::kInternal, "plan routes " + std::to_string(plan.routes.size()) +
                                          " of " + std::to_string(compute.size()) + " members");
  }
  std::vector<int> participants(devices);
  for (int d = 0; d < devices; ++d) participants[d] = d;

  ParallelGraph out;
  std::vector<RawNode> nodes;
  std::map<std::string, std::string> visible;  // member -> node holding its final state
  std::vector<std::string> conversion_node(plan.conversions.size());

  auto collective_node = [&](const std::string& name, const std::string& input,
                             const Collective& c, TensorSpec spec, const std::string& source) {
    RawNode n;
    n.name = name;
    n.op = OpKind::kCollective;
    n.inputs = {input};
    n.output = std::move(spec);
    n.collective = c;
    n.participants = participants;
    out.provenance[name] = source;
    nodes.push_back(std::move(n));
  };
  auto materialize = [&](int idx) -> const std::string& {
    std::string& name = conversion_node[idx];
    if (!name.empty()) return name;
    const Conversion& c = plan.conversions[idx];
    if (c.collective.kind == CollectiveKind::kIdentity) {
      name = visible.at(c.producer);
      return name;
    }
    name = c.producer + "/to_" + c.to.ToString();
    TensorSpec spec = c.tensor;
    spec.shape = LocalShape(c.tensor, c.to, devices, name);
    collective_node(name, visible.at(c.producer), c.collective, spec, graph.group_of(c.producer));
    return name;
  };

  for (const MemberRoute& r : plan.routes) {
    const RawNode& src = compute.node(r.member);
    RawNode n = src;
    n.device = -1;
    n.inputs.clear();
    for (size_t k = 0; k < src.inputs.size(); ++k) {
      const MemberRoute& producer = plan.routes.at(r.producers[k]);
      const ShardSpec& need = r.pattern.input_specs.at(k);
      if (r.conversions[k] >= 0) {
        n.inputs.push_back(materialize(r.conversions[k]));
      } else if (need == producer.output_state) {
        n.inputs.push_back(visible.at(producer.member));
      } else if (producer.exit_conversion >= 0 &&
                 plan.conversions[producer.exit_conversion].to == need) {
        n.inputs.push_back(materialize(producer.exit_conversion));
      } else {
        throw Error(ErrorKind::kInternal, r.member + " needs " + need.ToString() + " from " +
                                              producer.member + " in state " +
                                              producer.output_state.ToString());
      }
    }
    if (src.weight) {
      n.weight_shard = r.pattern.weight_spec.value_or(ShardSpec::Replica());
      LocalShape(*src.weight, *n.weight_shard, devices, src.name);
      if (src.op == OpKind::kEmbedding) n.attrs["vocab"] = std::to_string(src.weight->shape[0]);
    }
    n.output.shape = LocalShape(src.output, r.pattern.output_spec, devices, src.name);
    out.provenance[n.name] = r.graph_node;
    visible[r.member] = r.member;
    nodes.push_back(std::move(n));
    if (r.pattern.collective.kind != CollectiveKind::kIdentity) {
      std::string name = r.member + "/" + std::string(CollectiveKindName(r.pattern.collective.kind));
      TensorSpec spec = src.output;
      spec.shape = LocalShape(src.output, r.output_state, devices, name);
      collective_node(name, r.member, r.pattern.collective, spec, r.graph_node);
      visible[r.member] = name;
    }
    if (r.exit_conversion >= 0) materialize(r.exit_conversion);
  }
  for (const RawNode& aux : graph.side_table()) {
    RawNode n = aux;
    n.device = -1;
    std::string owner = OwnerOf(graph, aux.name);
    if (!owner.empty()) {
      n.attrs["owner"] = owner;
      const GraphNode& g = graph.node(owner);
      if (g.weight && aux.output.shape == g.weight->shape) {
        const MemberRoute* r = nullptr;
        for (const MemberRoute& route : plan.routes) {
          if (route.member == g.weight_member) r = &route;
        }
        if (r && r->pattern.weight_spec) {
          n.output.shape = LocalShape(aux.output, *r->pattern.weight_spec, devices, aux.name);
        }
      }
    }
    out.provenance[n.name] = owner;
    nodes.push_back(std::move(n));
  }

  std::vector<RawNode> all;
  all.reserve(nodes.size() * devices);
  for (int d = 0; d < devices; ++d) {
    for (const RawNode& n : nodes) {
      RawNode copy = n;
      copy.device = d;
      if (copy.op == OpKind::kEmbedding && copy.weight_shard && copy.weight_shard->is_split() &&
          copy.weight_shard->axis == 0) {
        copy.attrs["row_offset"] = std::to_string(copy.weight->shape[0] / devices * d);
      }
      all.push_back(std::move(copy));
    }
  }
  out.graph = RawGraph::Build(std::move(all), 2, devices);
  return out;
}

ParallelGraph RewriteGraph(const GroupedGraph& graph, const BestPlanReport& report,
                           const ClusterSpec& mesh) {
  return RewriteGraph(graph, ExpandPlan(graph, report), mesh);
}

}  // namespace tpplan
