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

#include "tpplan/graph.h"

#include <algorithm>
#include <cctype>
#include <queue>
#include <set>

#include "tpplan/status.h"

namespace tpplan {

namespace {

constexpr OpKind kAllOps[] = {
    OpKind::kMatMul, OpKind::kElementwise, OpKind::kLayerNorm, OpKind::kSoftmax,
    OpKind::kEmbedding, OpKind::kReshape, OpKind::kInput, OpKind::kOutput,
    OpKind::kAuxiliary, OpKind::kCollective,
};

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string KeyString(int device, std::string_view name) {
  return device < 0 ? std::string(name) : std::to_string(device) + ":" + std::string(name);
}

}  // namespace

std::string_view OpKindName(OpKind op) {
  switch (op) {
    case OpKind::kMatMul: return "MatMul";
    case OpKind::kElementwise: return "Elementwise";
    case OpKind::kLayerNorm: return "LayerNorm";
    case OpKind::kSoftmax: return "Softmax";
    case OpKind::kEmbedding: return "Embedding";
    case OpKind::kReshape: return "Reshape";
    case OpKind::kInput: return "Input";
    case OpKind::kOutput: return "Output";
    case OpKind::kAuxiliary: return "Auxiliary";
    case OpKind::kCollective: return "Collective";
  }
  return "Elementwise";
}

std::optional<OpKind> ParseOpKind(std::string_view name) {
  std::string lower = Lower(name);
  for (OpKind op : kAllOps) {
    if (Lower(OpKindName(op)) == lower) return op;
  }
  return std::nullopt;
}

std::vector<std::string_view> SplitScopes(std::string_view name) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (start <= name.size()) {
    size_t slash = name.find('/', start);
    if (slash == std::string_view::npos) slash = name.size();
    parts.push_back(name.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

std::string ParentScope(std::string_view name) {
  size_t slash = name.rfind('/');
  return slash == std::string_view::npos ? std::string() : std::string(name.substr(0, slash));
}

int ScopeDepth(std::string_view name) {
  return static_cast<int>(std::count(name.begin(), name.end(), '/')) + 1;
}

// ---------------------------------------------------------------------------
// RawGraph

RawGraph RawGraph::Build(std::vector<RawNode> nodes, int version, int device_count) {
  if (version != 1 && version != 2) {
    throw Error(ErrorKind::kParse, "unsupported graph version " + std::to_string(version));
  }
  if (device_count < 1) throw Error(ErrorKind::kParse, "device count must be >= 1");

  std::map<Key, size_t, std::less<>> index;
  for (size_t i = 0; i < nodes.size(); ++i) {
    RawNode& n = nodes[i];
    if (n.name.empty()) throw Error(ErrorKind::kParse, "node without a name");
    if (version == 1) {
      if (n.op == OpKind::kCollective) {
        throw Error(ErrorKind::kParse, "collective node '" + n.name + "' in an unrewritten graph");
      }
      n.device = -1;
    } else if (n.device < 0 || n.device >= device_count) {
      throw Error(ErrorKind::kParse, "node '" + n.name + "' has device out of range");
    }
    if (n.collective && n.op != OpKind::kCollective) {
      throw Error(ErrorKind::kParse, "node '" + n.name + "' carries a collective but is not one");
    }
    n.output.Validate();
    if (n.weight) n.weight->Validate();
    if (!index.emplace(Key{n.device, n.name}, i).second) {
      throw Error(ErrorKind::kParse, "duplicate node name '" + KeyString(n.device, n.name) + "'");
    }
  }

  // Producer lists by index.
  std::vector<std::vector<size_t>> producers(nodes.size());
  std::vector<std::vector<size_t>> consumers(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    for (const std::string& in : nodes[i].inputs) {
      auto it = index.find(Key{nodes[i].device, in});
      if (it == index.end()) {
        throw Error(ErrorKind::kDanglingRef,
                    "node '" + nodes[i].name + "' references missing input '" + in + "'");
      }
      producers[i].push_back(it->second);
      consumers[it->second].push_back(i);
    }
  }

  // Kahn's algorithm with (device, name) tie-break.
  std::vector<size_t> pending(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) pending[i] = producers[i].size();
  auto later = [&](size_t a, size_t b) {
    return std::tie(nodes[a].device, nodes[a].name) > std::tie(nodes[b].device, nodes[b].name);
  };
  std::priority_queue<size_t, std::vector<size_t>, decltype(later)> ready(later);
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<size_t> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (size_t c : consumers[i]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (order.size() != nodes.size()) {
    // Every unplaced node has an unplaced producer; walk producers until a
    // node repeats to find one edge of a cycle.
    size_t u = 0;
    while (pending[u] == 0) ++u;
    std::vector<int> step(nodes.size(), -1);
    int t = 0;
    size_t prev = u;
    while (step[u] < 0) {
      step[u] = t++;
      prev = u;
      for (size_t p : producers[u]) {
        if (pending[p] != 0) {
          u = p;
          break;
        }
      }
    }
    std::string from = nodes[u].name, to = nodes[prev].name;
    throw Error(ErrorKind::kCycle, "cycle through edge '" + from + "' -> '" + to + "'");
  }

  RawGraph g;
  g.version_ = version;
  g.device_count_ = device_count;
  g.nodes_.reserve(nodes.size());
  for (size_t i : order) g.nodes_.push_back(std::move(nodes[i]));
  for (size_t i = 0; i < g.nodes_.size(); ++i) {
    g.index_.emplace(Key{g.nodes_[i].device, g.nodes_[i].name}, i);
  }
  g.consumers_.resize(g.nodes_.size());
  for (size_t i = 0; i < g.nodes_.size(); ++i) {
    for (const std::string& in : g.nodes_[i].inputs) {
      auto& list = g.consumers_[g.index_.find(Key{g.nodes_[i].device, in})->second];
      if (list.empty() || list.back() != g.nodes_[i].name) list.push_back(g.nodes_[i].name);
    }
  }
  return g;
}

bool RawGraph::contains(std::string_view name, int device) const {
  return index_.find(Key{device, std::string(name)}) != index_.end();
}

const RawNode& RawGraph::node(std::string_view name, int device) const {
  auto it = index_.find(Key{device, std::string(name)});
  if (it == index_.end()) {
    throw Error(ErrorKind::kDanglingRef, "no node '" + KeyString(device, name) + "'");
  }
  return nodes_[it->second];
}

const std::vector<std::string>& RawGraph::consumers(std::string_view name, int device) const {
  auto it = index_.find(Key{device, std::string(name)});
  if (it == index_.end()) {
    throw Error(ErrorKind::kDanglingRef, "no node '" + KeyString(device, name) + "'");
  }
  return consumers_[it->second];
}

size_t RawGraph::edge_count() const {
  size_t n = 0;
  for (const RawNode& node : nodes_) n += node.inputs.size();
  return n;
}

// ---------------------------------------------------------------------------
// GroupedGraph

GroupedGraph::GroupedGraph(RawGraph compute, std::vector<GraphNode> nodes,
                           std::vector<RawNode> side_table)
    : compute_(std::move(compute)), nodes_(std::move(nodes)), side_table_(std::move(side_table)) {
  for (size_t i = 0; i < nodes_.size(); ++i) {
    index_.emplace(nodes_[i].id, i);
    for (const std::string& m : nodes_[i].members) group_of_.emplace(m, nodes_[i].id);
  }
}

const GraphNode& GroupedGraph::node(std::string_view id) const { return nodes_[index_of(id)]; }

bool GroupedGraph::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

size_t GroupedGraph::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorKind::kDanglingRef, "no GraphNode '" + std::string(id) + "'");
  }
  return it->second;
}

const std::string& GroupedGraph::group_of(std::string_view member) const {
  auto it = group_of_.find(member);
  if (it == group_of_.end()) {
    throw Error(ErrorKind::kDanglingRef, "'" + std::string(member) + "' belongs to no GraphNode");
  }
  return it->second;
}

std::vector<std::pair<std::string, std::string>> GroupedGraph::edges() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const GraphNode& n : nodes_) {
    for (const std::string& c : n.fan_out) out.emplace_back(n.id, c);
  }
  return out;
}

std::vector<std::string> GroupedGraph::roots() const {
  std::vector<std::string> out;
  for (const GraphNode& n : nodes_) {
    if (n.fan_in.empty()) out.push_back(n.id);
  }
  return out;
}

std::vector<std::string> GroupedGraph::leaves() const {
  std::vector<std::string> out;
  for (const GraphNode& n : nodes_) {
    if (n.fan_out.empty()) out.push_back(n.id);
  }
  return out;
}

int GroupedGraph::depth() const {
  int d = 0;
  for (const GraphNode& n : nodes_) d = std::max(d, ScopeDepth(n.id));
  return d;
}

// ---------------------------------------------------------------------------
// Trimming and grouping

namespace {

struct Group {
  std::string id;
  std::string scope;
  std::vector<std::string> members;
};

// Returns group index per compute node, or nullopt if the group graph is
// cyclic, in which case `cyclic` lists the offending group indices.
std::optional<std::vector<std::set<size_t>>> GroupEdges(const RawGraph& compute,
                                                        const std::vector<Group>& groups,
                                                        const std::map<std::string, size_t>& group_of,
                                                        std::vector<size_t>* cyclic) {
  std::vector<std::set<size_t>> out(groups.size());
  for (const RawNode& n : compute.nodes()) {
    size_t g = group_of.at(n.name);
    for (const std::string& in : n.inputs) {
      size_t p = group_of.at(in);
      if (p != g) out[p].insert(g);
    }
  }
  std::vector<size_t> pending(groups.size(), 0);
  for (const auto& succ : out) {
    for (size_t s : succ) ++pending[s];
  }
  std::vector<size_t> stack;
  for (size_t i = 0; i < groups.size(); ++i) {
    if (pending[i] == 0) stack.push_back(i);
  }
  size_t seen = 0;
  while (!stack.empty()) {
    size_t i = stack.back();
    stack.pop_back();
    ++seen;
    for (size_t s : out[i]) {
      if (--pending[s] == 0) stack.push_back(s);
    }
  }
  if (seen == groups.size()) return out;
  for (size_t i = 0; i < groups.size(); ++i) {
    if (pending[i] != 0) cyclic->push_back(i);
  }
  return std::nullopt;
}

}  // namespace

GroupedGraph TrimAndGroup(const RawGraph& graph) {
  if (graph.version() != 1) {
    throw Error(ErrorKind::kBadConfig, "only unrewritten (version 1) graphs can be grouped");
  }

  // Compute ancestors of each auxiliary node, in input order.
  std::map<std::string, std::vector<std::string>, std::less<>> aux_sources;
  std::vector<RawNode> side_table;
  std::vector<RawNode> compute_nodes;
  for (const RawNode& n : graph.nodes()) {
    std::vector<std::string> stitched;
    for (const std::string& in : n.inputs) {
      auto it = aux_sources.find(in);
      if (it == aux_sources.end()) {
        stitched.push_back(in);
        continue;
      }
      for (const std::string& src : it->second) {
        if (std::find(stitched.begin(), stitched.end(), src) == stitched.end()) {
          stitched.push_back(src);
        }
      }
    }
    if (n.op == OpKind::kAuxiliary) {
      aux_sources.emplace(n.name, std::move(stitched));
      side_table.push_back(n);
    } else {
      RawNode c = n;
      c.inputs = std::move(stitched);
      compute_nodes.push_back(std::move(c));
    }
  }
  if (compute_nodes.empty()) {
    throw Error(ErrorKind::kEmptyGraph, "graph has no compute operators after trimming");
  }
  RawGraph compute = RawGraph::Build(std::move(compute_nodes));

  // Initial grouping by parent scope.
  std::map<std::string, std::vector<std::string>> by_scope;
  for (const RawNode& n : compute.nodes()) {
    std::string scope = ParentScope(n.name);
    by_scope[scope.empty() ? n.name : scope].push_back(n.name);
  }
  std::vector<Group> groups;
  for (auto& [scope, members] : by_scope) {
    int weighted = 0;
    for (const std::string& m : members) weighted += compute.node(m).weight.has_value();
    if (weighted > 1) {
      for (const std::string& m : members) groups.push_back({m, scope, {m}});
    } else {
      groups.push_back({scope, scope, members});
    }
  }

  std::map<std::string, size_t> group_of;
  std::vector<std::set<size_t>> succ;
  for (;;) {
    group_of.clear();
    for (size_t i = 0; i < groups.size(); ++i) {
      for (const std::string& m : groups[i].members) group_of[m] = i;
    }
    std::vector<size_t> cyclic;
    auto edges = GroupEdges(compute, groups, group_of, &cyclic);
    if (edges) {
      succ = std::move(*edges);
      break;
    }
    // Break cycles by dissolving every group on them into singletons.
    std::vector<Group> next;
    std::set<size_t> bad(cyclic.begin(), cyclic.end());
    for (size_t i = 0; i < groups.size(); ++i) {
      if (bad.count(i) && groups[i].members.size() > 1) {
        for (const std::string& m : groups[i].members) next.push_back({m, groups[i].scope, {m}});
      } else {
        next.push_back(groups[i]);
      }
    }
    if (next.size() == groups.size()) {
      throw Error(ErrorKind::kInternal, "grouping failed to remove a cycle");
    }
    groups = std::move(next);
  }

  // Topological order of groups, ties by id.
  std::vector<size_t> pending(groups.size(), 0);
  std::vector<std::set<size_t>> pred(groups.size());
  for (size_t i = 0; i < groups.size(); ++i) {
    for (size_t s : succ[i]) {
      ++pending[s];
      pred[s].insert(i);
    }
  }
  auto later = [&](size_t a, size_t b) { return groups[a].id > groups[b].id; };
  std::priority_queue<size_t, std::vector<size_t>, decltype(later)> ready(later);
  for (size_t i = 0; i < groups.size(); ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<GraphNode> nodes;
  while (!ready.empty()) {
    size_t i = ready.top();
    ready.pop();
    const Group& g = groups[i];
    GraphNode gn;
    gn.id = g.id;
    gn.scope = g.scope;
    gn.members = g.members;
    gn.op = compute.node(g.members.front()).op;
    for (const std::string& m : g.members) {
      const RawNode& raw = compute.node(m);
      if (raw.weight) {
        gn.weight = raw.weight;
        gn.weight_member = m;
        gn.op = raw.op;
      }
    }
    // Activation: the last member whose value leaves the group, else the last member.
    std::string out_member = g.members.back();
    for (const std::string& m : g.members) {
      for (const std::string& c : compute.consumers(m)) {
        if (group_of.at(c) != i) out_member = m;
      }
    }
    gn.activation = compute.node(out_member).output;
    for (size_t p : pred[i]) gn.fan_in.push_back(groups[p].id);
    for (size_t s : succ[i]) gn.fan_out.push_back(groups[s].id);
    std::sort(gn.fan_in.begin(), gn.fan_in.end());
    std::sort(gn.fan_out.begin(), gn.fan_out.end());
    nodes.push_back(std::move(gn));
    for (size_t s : succ[i]) {
      if (--pending[s] == 0) ready.push(s);
    }
  }
  return GroupedGraph(std::move(compute), std::move(nodes), std::move(side_table));
}

RawGraph Ungroup(const GroupedGraph& graph) { return graph.compute(); }

}  // namespace tpplan
