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

#include "tpplan/pruning.h"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "tpplan/status.h"

namespace tpplan {

namespace {

std::string Prefix(std::string_view id, int depth) {
  size_t pos = 0;
  for (int i = 0; i < depth; ++i) {
    pos = id.find('/', pos);
    if (pos == std::string_view::npos) return std::string(id);
    if (i + 1 < depth) ++pos;
  }
  return std::string(id.substr(0, pos));
}

std::string Relative(std::string_view name, std::string_view prefix) {
  if (name.size() <= prefix.size()) return "";
  return std::string(name.substr(prefix.size()));
}

std::string OpDesc(const RawNode& n) {
  std::string s(OpKindName(n.op));
  if (auto it = n.attrs.find("mode"); it != n.attrs.end()) s += ":" + it->second;
  if (auto it = n.attrs.find("fn"); it != n.attrs.end()) s += ":" + it->second;
  return s;
}

std::string SpecDesc(const TensorSpec& t) {
  return t.ShapeString() + std::string(DTypeName(t.dtype)) + (t.trainable ? "T" : "");
}

std::vector<std::string> ByName(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  return names;
}

class GroupCanonicalizer {
 public:
  explicit GroupCanonicalizer(const GroupedGraph& graph) : graph_(graph) {}

  // Exact structure of a prefix group with names taken relative to the
  // prefix. Two groups with equal forms are isomorphic under substitution.
  std::string Form(const PrefixGroup& g, size_t* steps) const {
    std::unordered_set<std::string> ids(g.members.begin(), g.members.end());
    std::string out;
    for (const std::string& id : ByName(g.members)) {
      const GraphNode& n = graph_.node(id);
      out += "#" + Relative(id, g.prefix) + "\n";
      for (const std::string& m : ByName(n.members)) {
        ++*steps;
        const RawNode& raw = graph_.compute().node(m);
        out += Relative(m, g.prefix) + "|" + OpDesc(raw) + "|" +
               (raw.weight ? SpecDesc(*raw.weight) : "-") + "|" + SpecDesc(raw.output) + "|";
        for (const auto& [k, v] : raw.attrs) out += k + "=" + v + ",";
        out += "|";
        for (const std::string& in : raw.inputs) {
          out += ids.count(graph_.group_of(in)) ? Relative(in, g.prefix) : std::string("^");
          out += ",";
        }
        out += "\n";
      }
    }
    return out;
  }

  BlockSignature Signature(const PrefixGroup& g) const {
    std::unordered_set<std::string> ids(g.members.begin(), g.members.end());
    BlockSignature sig;
    for (const std::string& id : g.members) {
      const GraphNode& n = graph_.node(id);
      for (const std::string& m : n.members) sig.ops.push_back(OpDesc(graph_.compute().node(m)));
      if (n.weight) sig.weight_shapes.push_back(SpecDesc(*n.weight));
      for (const std::string& c : n.fan_out) sig.internal_edges += ids.count(c);
    }
    std::sort(sig.ops.begin(), sig.ops.end());
    std::sort(sig.weight_shapes.begin(), sig.weight_shapes.end());
    return sig;
  }

 private:
  const GroupedGraph& graph_;
};

Subgraph MakeSubgraph(const GroupedGraph& graph, Subgraph::Kind kind,
                      std::vector<PrefixGroup> groups) {
  std::sort(groups.begin(), groups.end(), [&](const PrefixGroup& a, const PrefixGroup& b) {
    return graph.index_of(a.members.front()) < graph.index_of(b.members.front());
  });
  Subgraph sg;
  sg.kind = kind;
  const PrefixGroup& rep = groups.front();
  sg.template_nodes = rep.members;
  std::map<std::string, size_t> local;
  for (size_t i = 0; i < rep.members.size(); ++i) local[rep.members[i]] = i;
  for (size_t i = 0; i < rep.members.size(); ++i) {
    const GraphNode& n = graph.node(rep.members[i]);
    bool entry = false, exit = false;
    for (const std::string& p : n.fan_in) entry |= !local.count(p);
    for (const std::string& c : n.fan_out) {
      auto it = local.find(c);
      if (it == local.end()) {
        exit = true;
      } else {
        sg.internal_edges.emplace_back(i, it->second);
      }
    }
    if (entry) sg.entry_nodes.push_back(i);
    if (exit) sg.exit_nodes.push_back(i);
  }
  std::sort(sg.internal_edges.begin(), sg.internal_edges.end());
  for (const PrefixGroup& g : groups) {
    SubgraphInstance inst;
    inst.prefix = g.prefix;
    std::map<std::string, std::string> by_rel;
    for (const std::string& id : g.members) by_rel[Relative(id, g.prefix)] = id;
    for (const std::string& t : rep.members) inst.nodes.push_back(by_rel.at(Relative(t, rep.prefix)));
    sg.instances.push_back(std::move(inst));
  }
  return sg;
}

}  // namespace

const std::vector<PrefixGroup>& NodeTree::level(int depth) const {
  static const std::vector<PrefixGroup> kEmpty;
  auto it = levels.find(depth);
  return it == levels.end() ? kEmpty : it->second;
}

std::string BlockSignature::ToString() const {
  std::string s = "ops=[";
  for (size_t i = 0; i < ops.size(); ++i) s += (i ? "," : "") + ops[i];
  s += "] weights=[";
  for (size_t i = 0; i < weight_shapes.size(); ++i) s += (i ? "," : "") + weight_shapes[i];
  return s + "] edges=" + std::to_string(internal_edges);
}

std::string Subgraph::name() const { return instances.empty() ? "" : instances.front().prefix; }

NodeTree BuildNodeTree(const GroupedGraph& graph) {
  NodeTree tree;
  std::map<int, std::map<std::string, std::vector<std::string>>> levels;
  for (const GraphNode& n : graph.nodes()) {
    int depth = ScopeDepth(n.id);
    tree.max_depth = std::max(tree.max_depth, depth);
    for (int d = 1; d <= depth; ++d) levels[d][Prefix(n.id, d)].push_back(n.id);
  }
  for (auto& [d, groups] : levels) {
    auto& out = tree.levels[d];
    for (auto& [prefix, members] : groups) out.push_back({prefix, std::move(members)});
  }
  return tree;
}

std::vector<SimilarBlocks> FindSimilarBlocks(const GroupedGraph& graph, const NodeTree& tree,
                                             int depth) {
  GroupCanonicalizer canon(graph);
  std::map<BlockSignature, SimilarBlocks> buckets;
  for (const PrefixGroup& g : tree.level(depth)) {
    BlockSignature sig = canon.Signature(g);
    SimilarBlocks& b = buckets[sig];
    b.signature = sig;
    ++b.count;
    b.prefixes.push_back(g.prefix);
  }
  std::vector<SimilarBlocks> out;
  for (auto& [sig, b] : buckets) out.push_back(std::move(b));
  return out;
}

PruneResult PruneGraph(const GroupedGraph& graph, int min_duplicates) {
  if (min_duplicates < 1) throw Error(ErrorKind::kBadConfig, "minDuplicates must be >= 1");
  PruneResult result;
  result.stats.graph_nodes = graph.nodes().size();

  if (min_duplicates == 1) {
    PrefixGroup all{"", {}};
    for (const GraphNode& n : graph.nodes()) all.members.push_back(n.id);
    result.subgraphs.push_back(MakeSubgraph(graph, Subgraph::Kind::kWholeGraph, {all}));
    result.stats.search_nodes = all.members.size();
    result.stats.steps = all.members.size();
    return result;
  }

  NodeTree tree = BuildNodeTree(graph);
  GroupCanonicalizer canon(graph);
  size_t steps = 0;
  std::map<std::string, bool> alive;
  std::map<std::string, bool> children_alive;
  std::map<std::string, std::string> form_of;
  std::map<std::string, const PrefixGroup*> group_of_prefix;

  for (int d = tree.max_depth; d >= 1; --d) {
    std::map<std::string, std::vector<const PrefixGroup*>> classes;
    for (const PrefixGroup& g : tree.level(d)) {
      steps += g.members.size();
      std::string form = canon.Form(g, &steps);
      form_of[g.prefix] = form;
      group_of_prefix[g.prefix] = &g;
      classes[form].push_back(&g);
    }
    for (const auto& [form, groups] : classes) {
      bool enough = groups.size() >= static_cast<size_t>(min_duplicates);
      for (const PrefixGroup* g : groups) {
        auto ch = children_alive.find(g->prefix);
        bool ok = enough && (ch == children_alive.end() || ch->second);
        alive[g->prefix] = ok;
        if (d > 1) {
          auto [it, inserted] = children_alive.emplace(Prefix(g->prefix, d - 1), ok);
          if (!inserted) it->second = it->second && ok;
        }
      }
    }
  }

  // Shallowest surviving groups, bucketed by exact structure.
  std::map<std::string, std::vector<PrefixGroup>> maximal;
  for (const auto& [prefix, ok] : alive) {
    if (!ok) continue;
    int d = ScopeDepth(prefix);
    if (d > 1 && alive.at(Prefix(prefix, d - 1))) continue;
    maximal[form_of.at(prefix)].push_back(*group_of_prefix.at(prefix));
  }

  std::set<std::string> covered;
  for (auto& [form, groups] : maximal) {
    if (groups.size() < static_cast<size_t>(min_duplicates)) continue;
    for (const PrefixGroup& g : groups) covered.insert(g.members.begin(), g.members.end());
    result.subgraphs.push_back(MakeSubgraph(graph, Subgraph::Kind::kShared, std::move(groups)));
  }
  std::sort(result.subgraphs.begin(), result.subgraphs.end(),
            [&](const Subgraph& a, const Subgraph& b) {
              return graph.index_of(a.template_nodes.front()) <
                     graph.index_of(b.template_nodes.front());
            });
  result.stats.shared_subgraphs = result.subgraphs.size();

  for (const GraphNode& n : graph.nodes()) {
    ++steps;
    if (covered.count(n.id)) continue;
    result.subgraphs.push_back(
        MakeSubgraph(graph, Subgraph::Kind::kResidual, {PrefixGroup{n.id, {n.id}}}));
    ++result.stats.residual_subgraphs;
  }
  for (const Subgraph& sg : result.subgraphs) result.stats.search_nodes += sg.template_nodes.size();
  result.stats.steps = steps;
  return result;
}

}  // namespace tpplan
