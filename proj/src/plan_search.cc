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

#include "tpplan/plan_search.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "tpplan/status.h"

namespace tpplan {

int CandidatePlan::split_count() const {
  int n = 0;
  for (const ShardSpec& s : assignments) n += s.is_replica() ? 0 : 1;
  return n;
}

ShardSpec CandidatePlan::assignment_for(const std::string& node) const {
  for (size_t i = 0; i < weight_nodes.size(); ++i) {
    if (weight_nodes[i] == node) return assignments[i];
  }
  return ShardSpec::Replica();
}

std::string CandidatePlan::ToString() const {
  std::string out;
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (i) out += ",";
    out += assignments[i].ToString();
  }
  return out;
}

const MemberRoute* RoutedPlan::route_for(const std::string& member) const {
  for (const MemberRoute& r : routes) {
    if (r.member == member) return &r;
  }
  return nullptr;
}

size_t RoutedPlan::collective_count() const {
  size_t n = 0;
  for (const MemberRoute& r : routes) n += r.pattern.collective.kind != CollectiveKind::kIdentity;
  for (const Conversion& c : conversions) n += c.collective.kind != CollectiveKind::kIdentity;
  return n;
}

std::vector<ShardSpec> WeightOptions(const TensorSpec& weight) {
  if (weight.rank() <= 1) return {ShardSpec::Replica(), ShardSpec::Split(0)};
  return {ShardSpec::Replica(), ShardSpec::Split(0), ShardSpec::Split(1)};
}

PlanEnumerator::PlanEnumerator(const GroupedGraph& graph, const Subgraph& subgraph) {
  for (const std::string& id : subgraph.template_nodes) {
    const GraphNode& node = graph.node(id);
    if (!node.weight) continue;
    weight_nodes_.push_back(id);
    options_.push_back(WeightOptions(*node.weight));
    size_t radix = options_.back().size();
    if (size_ > std::numeric_limits<size_t>::max() / radix) overflow_ = true;
    size_ *= radix;
  }
}

size_t PlanEnumerator::size() const {
  if (overflow_) {
    throw Error(ErrorKind::kBadConfig, "candidate space over " +
                                           std::to_string(weight_nodes_.size()) +
                                           " weights exceeds 64 bits");
  }
  return size_;
}

CandidatePlan PlanEnumerator::at(size_t index) const {
  CandidatePlan plan;
  plan.index = index;
  plan.weight_nodes = weight_nodes_;
  plan.assignments.resize(weight_nodes_.size());
  for (size_t i = weight_nodes_.size(); i-- > 0;) {
    size_t radix = options_[i].size();
    plan.assignments[i] = options_[i][index % radix];
    index /= radix;
  }
  return plan;
}

PlanEnumerator::iterator::iterator(const PlanEnumerator* owner, size_t index)
    : owner_(owner), index_(index) {
  if (index_ < owner_->size()) current_ = owner_->at(index_);
}

PlanEnumerator::iterator& PlanEnumerator::iterator::operator++() {
  ++index_;
  if (index_ < owner_->size()) current_ = owner_->at(index_);
  return *this;
}

PlanEnumerator::iterator PlanEnumerator::iterator::operator++(int) {
  iterator copy = *this;
  ++*this;
  return copy;
}

PlanEnumerator EnumerateAllPlans(const GroupedGraph& graph, const Subgraph& subgraph) {
  return PlanEnumerator(graph, subgraph);
}

PatternRouter::PatternRouter(const GroupedGraph& graph, const Subgraph& subgraph,
                             const ClusterSpec& mesh)
    : mesh_(mesh) {
  const RawGraph& compute = graph.compute();
  std::set<std::string> in_subgraph;
  std::map<std::string, std::string> owner;
  for (const std::string& id : subgraph.template_nodes) {
    for (const std::string& m : graph.node(id).members) {
      in_subgraph.insert(m);
      owner[m] = id;
    }
  }
  std::map<std::string, int> local;
  for (const RawNode& n : compute.nodes()) {
    if (!in_subgraph.count(n.name)) continue;
    local[n.name] = static_cast<int>(members_.size());
    Member m;
    m.node = &n;
    m.graph_node = owner[n.name];
    members_.push_back(std::move(m));
  }
  const int devices = mesh.devices();
  for (size_t i = 0; i < members_.size(); ++i) {
    Member& m = members_[i];
    for (const std::string& in : m.node->inputs) {
      auto it = local.find(in);
      int p = it == local.end() ? -1 : it->second;
      m.producers.push_back(p);
      m.inputs.push_back(compute.node(in).output);
      if (p >= 0) members_[p].consumers.push_back(static_cast<int>(i));
    }
    for (ShardingPattern& p : PatternsFor(m.node->op, QueryFor(compute, *m.node))) {
      if (PatternFits(p, m.inputs, m.node->weight, m.node->output, devices)) {
        m.patterns.push_back(std::move(p));
      }
    }
    const auto& consumers = compute.consumers(m.node->name);
    m.exits = consumers.empty();
    for (const std::string& c : consumers) {
      if (!in_subgraph.count(c)) m.exits = true;
    }
    bool internal_input = false;
    for (int p : m.producers) internal_input |= p >= 0;
    if (!internal_input) initial_.push_back(static_cast<int>(i));
  }
  for (Member& m : members_) {
    std::sort(m.consumers.begin(), m.consumers.end());
    m.consumers.erase(std::unique(m.consumers.begin(), m.consumers.end()), m.consumers.end());
  }
}

RouteResult PatternRouter::Route(const CandidatePlan& plan, size_t* steps) const {
  const bool single = mesh_.devices() <= 1;
  RoutedPlan out;
  out.plan = plan;
  std::vector<int> route_of(members_.size(), -1);
  std::vector<ShardSpec> state(members_.size());
  std::map<std::pair<int, ShardSpec>, int> conversion_index;

  auto conversion_for = [&](int producer, const ShardSpec& to, const Collective& c,
                            const TensorSpec& tensor) -> int {
    if (producer < 0 || state[producer] == to) return -1;
    auto key = std::make_pair(producer, to);
    if (auto it = conversion_index.find(key); it != conversion_index.end()) return it->second;
    Conversion conv;
    conv.producer = members_[producer].node->name;
    conv.from = state[producer];
    conv.to = to;
    conv.collective = single ? Collective::Identity() : c;
    conv.tensor = tensor;
    int idx = static_cast<int>(out.conversions.size());
    out.conversions.push_back(std::move(conv));
    conversion_index.emplace(key, idx);
    return idx;
  };

  std::vector<int> pending(members_.size());
  for (size_t i = 0; i < members_.size(); ++i) {
    for (int p : members_[i].producers) pending[i] += p >= 0;
  }
  std::deque<int> queue(initial_.begin(), initial_.end());
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    if (steps) ++*steps;
    const Member& m = members_[i];
    std::optional<ShardSpec> assigned;
    if (m.node->weight) assigned = plan.assignment_for(m.graph_node);

    const ShardingPattern* best = nullptr;
    std::vector<Collective> best_convs;
    double best_cost = 0;
    for (const ShardingPattern& p : m.patterns) {
      if (p.weight_spec != assigned) continue;
      std::vector<Collective> convs;
      double cost = 0;
      bool ok = true;
      for (size_t k = 0; k < m.producers.size() && ok; ++k) {
        ShardSpec from = m.producers[k] >= 0 ? state[m.producers[k]] : ShardSpec::Replica();
        std::optional<Collective> c = ConversionCollective(from, p.input_specs[k], m.inputs[k]);
        if (!c) {
          ok = false;
          break;
        }
        cost += CollectiveCallCost(*c, m.inputs[k], mesh_);
        convs.push_back(*c);
      }
      if (!ok) continue;
      cost += CollectiveCallCost(p.collective, m.node->output, mesh_);
      if (!best || cost < best_cost) {
        best = &p;
        best_cost = cost;
        best_convs = std::move(convs);
      }
    }
    if (!best) {
      std::string states;
      for (size_t k = 0; k < m.producers.size(); ++k) {
        states += k ? "," : "";
        states += (m.producers[k] >= 0 ? state[m.producers[k]] : ShardSpec::Replica()).ToString();
      }
      std::string reason = "no pattern of " + std::string(OpKindName(m.node->op)) + " '" +
                           m.node->name + "' accepts inputs (" + states + ")";
      if (assigned) reason += " with weight " + assigned->ToString();
      return RoutingFailure{m.graph_node, reason};
    }

    MemberRoute r;
    r.member = m.node->name;
    r.graph_node = m.graph_node;
    r.pattern = *best;
    r.output_state = best->result_spec();
    r.output = m.node->output;
    r.producers.reserve(m.producers.size());
    for (size_t k = 0; k < m.producers.size(); ++k) {
      int p = m.producers[k];
      r.producers.push_back(p >= 0 ? route_of[p] : -1);
      r.conversions.push_back(conversion_for(p, best->input_specs[k], best_convs[k], m.inputs[k]));
    }
    if (single) {
      r.pattern.collective = Collective::Identity();
      r.pattern.output_spec = r.output_state;
    }
    state[i] = r.output_state;
    if (m.exits && !r.output_state.is_replica()) {
      std::optional<Collective> c =
          ConversionCollective(r.output_state, ShardSpec::Replica(), m.node->output);
      if (!c) {
        return RoutingFailure{m.graph_node, "output of '" + m.node->name + "' in state " +
                                                r.output_state.ToString() +
                                                " cannot leave the subgraph"};
      }
      r.exit_conversion = conversion_for(i, ShardSpec::Replica(), *c, m.node->output);
    }
    if (m.node->weight && m.node->weight->trainable && assigned && assigned->is_replica()) {
      out.gradients.push_back({m.node->name, *m.node->weight});
    }
    route_of[i] = static_cast<int>(out.routes.size());
    out.routes.push_back(std::move(r));
    for (int c : m.consumers) {
      if (--pending[c] == 0) queue.push_back(c);
    }
  }
  if (out.routes.size() != members_.size()) {
    throw Error(ErrorKind::kInternal, "routing did not reach every member");
  }
  out.cost = PlanCost(out, mesh_);
  return out;
}

RouteResult PatternRouting(const GroupedGraph& graph, const Subgraph& subgraph,
                           const CandidatePlan& plan, const ClusterSpec& mesh) {
  return PatternRouter(graph, subgraph, mesh).Route(plan);
}

namespace {

bool EntryLess(const PlanCostEntry& a, const PlanCostEntry& b) {
  return std::make_tuple(!a.valid, a.cost, a.splits, a.index) <
         std::make_tuple(!b.valid, b.cost, b.splits, b.index);
}

std::string Substitute(const std::string& name, const std::string& from, const std::string& to) {
  if (name.compare(0, from.size(), from) != 0) {
    throw Error(ErrorKind::kInternal, "'" + name + "' lies outside prefix '" + from + "'");
  }
  return to + name.substr(from.size());
}

void ParallelFor(size_t count, int jobs, const std::function<void(size_t)>& body) {
  const size_t workers = std::min<size_t>(std::max(jobs, 1), std::max<size_t>(count, 1));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void FinishReport(const GroupedGraph& graph, BestPlanReport& report) {
  report.total_cost = 0;
  report.replica_cost = 0;
  report.assignments.clear();
  report.stats.candidates = 0;
  report.stats.valid = 0;
  for (size_t s = 0; s < report.subgraphs.size(); ++s) {
    const Subgraph& sub = report.prune.subgraphs[s];
    const SubgraphResult& res = report.subgraphs[s];
    report.total_cost += res.best.cost.total * static_cast<double>(sub.multiplicity());
    report.replica_cost += res.replica_cost * static_cast<double>(sub.multiplicity());
    report.stats.candidates += res.candidates;
    report.stats.valid += res.valid;
    for (const SubgraphInstance& inst : sub.instances) {
      for (size_t t = 0; t < sub.template_nodes.size(); ++t) {
        const GraphNode& node = graph.node(inst.nodes[t]);
        if (node.weight) {
          report.assignments[node.id] = res.best.plan.assignment_for(sub.template_nodes[t]);
        }
      }
    }
  }
  report.stats.unique_subgraphs = report.subgraphs.size();
  report.stats.prune = report.prune.stats;
}

}  // namespace

BestPlanReport DerivePlan(const GroupedGraph& graph, const ClusterSpec& mesh,
                          const SearchOptions& options) {
  mesh.Validate();
  const auto start = std::chrono::steady_clock::now();
  BestPlanReport report;
  report.prune = PruneGraph(graph, options.min_duplicates);
  for (const Subgraph& sub : report.prune.subgraphs) {
    PlanEnumerator plans(graph, sub);
    const size_t count = plans.size();
    if (count > options.max_candidates) {
      throw Error(ErrorKind::kBadConfig, "subgraph '" + sub.name() + "' has " +
                                             std::to_string(count) +
                                             " candidate plans; raise min duplicates");
    }
    PatternRouter router(graph, sub, mesh);
    std::vector<PlanCostEntry> entries(count);
    std::vector<size_t> steps(count, 0);
    ParallelFor(count, options.jobs, [&](size_t i) {
      CandidatePlan plan = plans.at(i);
      PlanCostEntry& e = entries[i];
      e.index = i;
      e.plan = plan.ToString();
      e.splits = plan.split_count();
      RouteResult r = router.Route(plan, &steps[i]);
      if (auto* ok = std::get_if<RoutedPlan>(&r)) {
        e.valid = true;
        e.cost = ok->cost.total;
      } else {
        e.failure = std::get<RoutingFailure>(r).node;
      }
    });
    SubgraphResult res;
    res.name = sub.name();
    res.kind = sub.kind;
    res.multiplicity = sub.multiplicity();
    res.candidates = count;
    for (size_t i = 0; i < count; ++i) {
      res.valid += entries[i].valid;
      report.stats.routing_steps += steps[i];
    }
    if (entries.empty() || !entries[0].valid) {
      throw Error(ErrorKind::kNoValidPlan,
                  "all-Replica plan of subgraph '" + sub.name() + "' does not route");
    }
    res.replica_cost = entries[0].cost;
    std::sort(entries.begin(), entries.end(), EntryLess);
    res.best = std::get<RoutedPlan>(router.Route(plans.at(entries[0].index)));
    res.table = std::move(entries);
    report.subgraphs.push_back(std::move(res));
  }
  FinishReport(graph, report);
  report.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

BestPlanReport PlanFromAssignments(const GroupedGraph& graph, const ClusterSpec& mesh,
                                   const std::map<std::string, ShardSpec>& assignments,
                                   int min_duplicates) {
  mesh.Validate();
  for (const auto& [id, spec] : assignments) {
    if (!graph.contains(id) || !graph.node(id).weight) {
      throw Error(ErrorKind::kBadConfig, "plan assigns '" + id + "', which is not a weight node");
    }
  }
  auto lookup = [&](const std::string& id) {
    auto it = assignments.find(id);
    return it == assignments.end() ? ShardSpec::Replica() : it->second;
  };
  BestPlanReport report;
  report.prune = PruneGraph(graph, min_duplicates);
  for (const Subgraph& sub : report.prune.subgraphs) {
    PlanEnumerator plans(graph, sub);
    CandidatePlan plan = plans.at(0);
    for (size_t w = 0; w < plan.weight_nodes.size(); ++w) {
      plan.assignments[w] = lookup(plan.weight_nodes[w]);
    }
    for (const SubgraphInstance& inst : sub.instances) {
      for (size_t t = 0; t < sub.template_nodes.size(); ++t) {
        if (graph.node(inst.nodes[t]).weight &&
            lookup(inst.nodes[t]) != plan.assignment_for(sub.template_nodes[t])) {
          throw Error(ErrorKind::kBadConfig, "plan assigns '" + inst.nodes[t] +
                                                 "' differently from '" +
                                                 sub.template_nodes[t] + "'; raise min duplicates");
        }
      }
    }
    PatternRouter router(graph, sub, mesh);
    RouteResult r = router.Route(plan, &report.stats.routing_steps);
    if (auto* fail = std::get_if<RoutingFailure>(&r)) {
      throw Error(ErrorKind::kNoValidPlan, "plan does not route at '" + fail->node + "': " +
                                               fail->reason);
    }
    SubgraphResult res;
    res.name = sub.name();
    res.kind = sub.kind;
    res.multiplicity = sub.multiplicity();
    res.candidates = 1;
    res.valid = 1;
    res.best = std::get<RoutedPlan>(std::move(r));
    RouteResult replica = router.Route(plans.at(0));
    res.replica_cost = std::get<RoutedPlan>(replica).cost.total;
    res.table.push_back({plan.index, plan.ToString(), true, res.best.cost.total,
                         plan.split_count(), ""});
    report.subgraphs.push_back(std::move(res));
  }
  FinishReport(graph, report);
  return report;
}

RoutedPlan ExpandPlan(const GroupedGraph& graph, const BestPlanReport& report) {
  std::map<std::string, MemberRoute> by_member;
  std::map<std::string, std::vector<Conversion>> conversions_of;  // keyed by member
  RoutedPlan out;
  for (size_t s = 0; s < report.subgraphs.size(); ++s) {
    const Subgraph& sub = report.prune.subgraphs[s];
    const RoutedPlan& best = report.subgraphs[s].best;
    const std::string& from = sub.instances[0].prefix;
    for (const SubgraphInstance& inst : sub.instances) {
      const std::string& to = inst.prefix;
      for (const MemberRoute& r : best.routes) {
        MemberRoute copy = r;
        copy.member = Substitute(r.member, from, to);
        copy.graph_node = Substitute(r.graph_node, from, to);
        std::vector<Conversion> convs;
        auto local = [&](int idx) {
          if (idx < 0) return -1;
          Conversion c = best.conversions[idx];
          c.producer = Substitute(c.producer, from, to);
          convs.push_back(std::move(c));
          return static_cast<int>(convs.size()) - 1;
        };
        for (int& c : copy.conversions) c = local(c);
        copy.exit_conversion = local(copy.exit_conversion);
        conversions_of[copy.member] = std::move(convs);
        by_member.emplace(copy.member, std::move(copy));
      }
      for (const GradientSpec& g : best.gradients) {
        out.gradients.push_back({Substitute(g.member, from, to), g.tensor});
      }
    }
  }
  std::map<std::string, int> route_index;
  std::map<std::pair<std::string, ShardSpec>, int> conversion_index;
  for (const RawNode& n : graph.compute().nodes()) {
    auto it = by_member.find(n.name);
    if (it == by_member.end()) {
      throw Error(ErrorKind::kInternal, "no route for member '" + n.name + "'");
    }
    MemberRoute r = std::move(it->second);
    const std::vector<Conversion>& convs = conversions_of[n.name];
    auto global = [&](int idx) {
      if (idx < 0) return -1;
      const Conversion& c = convs[idx];
      auto key = std::make_pair(c.producer, c.to);
      if (auto found = conversion_index.find(key); found != conversion_index.end()) {
        return found->second;
      }
      int g = static_cast<int>(out.conversions.size());
      out.conversions.push_back(c);
      conversion_index.emplace(key, g);
      return g;
    };
    for (size_t k = 0; k < n.inputs.size(); ++k) {
      r.producers[k] = route_index.at(n.inputs[k]);
      r.conversions[k] = global(r.conversions[k]);
    }
    r.exit_conversion = global(r.exit_conversion);
    route_index[n.name] = static_cast<int>(out.routes.size());
    out.routes.push_back(std::move(r));
  }
  for (const auto& [id, spec] : report.assignments) {
    out.plan.weight_nodes.push_back(id);
    out.plan.assignments.push_back(spec);
  }
  return out;
}

namespace {

const char* KindName(Subgraph::Kind kind) {
  switch (kind) {
    case Subgraph::Kind::kShared:
      return "shared";
    case Subgraph::Kind::kResidual:
      return "residual";
    case Subgraph::Kind::kWholeGraph:
      return "whole_graph";
  }
  return "residual";
}

nlohmann::json RoutedPlanToJson(const RoutedPlan& plan) {
  nlohmann::json patterns = nlohmann::json::array();
  for (const MemberRoute& r : plan.routes) {
    patterns.push_back({{"member", r.member},
                        {"graph_node", r.graph_node},
                        {"pattern", r.pattern.name},
                        {"collective", r.pattern.collective.ToString()},
                        {"output_state", r.output_state.ToString()}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const Conversion& c : plan.conversions) {
    edges.push_back({{"producer", c.producer},
                     {"from", c.from.ToString()},
                     {"to", c.to.ToString()},
                     {"collective", c.collective.ToString()}});
  }
  nlohmann::json assignments = nlohmann::json::object();
  for (size_t i = 0; i < plan.plan.weight_nodes.size(); ++i) {
    assignments[plan.plan.weight_nodes[i]] = plan.plan.assignments[i].ToString();
  }
  return {{"plan", plan.plan.ToString()},
          {"index", plan.plan.index},
          {"assignments", assignments},
          {"patterns", patterns},
          {"edge_collectives", edges},
          {"cost", CostReportToJson(plan.cost)}};
}

}  // namespace

nlohmann::json BestPlanReportToJson(const BestPlanReport& report, size_t table_limit,
                                    bool include_timing) {
  nlohmann::json subs = nlohmann::json::array();
  for (const SubgraphResult& res : report.subgraphs) {
    nlohmann::json table = nlohmann::json::array();
    size_t rows = table_limit ? std::min(table_limit, res.table.size()) : res.table.size();
    for (size_t i = 0; i < rows; ++i) {
      const PlanCostEntry& e = res.table[i];
      nlohmann::json row = {{"index", e.index}, {"plan", e.plan}, {"valid", e.valid},
                            {"splits", e.splits}};
      if (e.valid) {
        row["cost"] = e.cost;
      } else {
        row["failed_at"] = e.failure;
      }
      table.push_back(std::move(row));
    }
    subs.push_back({{"name", res.name},
                    {"kind", KindName(res.kind)},
                    {"multiplicity", res.multiplicity},
                    {"candidates", res.candidates},
                    {"valid", res.valid},
                    {"replica_cost", res.replica_cost},
                    {"best", RoutedPlanToJson(res.best)},
                    {"cost_table", table}});
  }
  nlohmann::json assignments = nlohmann::json::object();
  for (const auto& [id, spec] : report.assignments) assignments[id] = spec.ToString();
  const PruneStats& p = report.stats.prune;
  nlohmann::json stats = {{"candidates_enumerated", report.stats.candidates},
                          {"valid_plans", report.stats.valid},
                          {"routing_steps", report.stats.routing_steps},
                          {"unique_subgraphs", report.stats.unique_subgraphs},
                          {"graph_nodes", p.graph_nodes},
                          {"search_nodes", p.search_nodes},
                          {"shared_subgraphs", p.shared_subgraphs},
                          {"residual_subgraphs", p.residual_subgraphs},
                          {"prune_steps", p.steps}};
  if (include_timing) stats["wall_seconds"] = report.stats.wall_seconds;
  return {{"total_cost", report.total_cost},
          {"replica_cost", report.replica_cost},
          {"boundary_state", "R"},
          {"assignments", assignments},
          {"subgraphs", subs},
          {"stats", stats}};
}

std::map<std::string, ShardSpec> AssignmentsFromJson(const nlohmann::json& doc) {
  const nlohmann::json* a = &doc;
  if (doc.is_object() && doc.contains("assignments")) a = &doc.at("assignments");
  if (!a->is_object()) throw Error(ErrorKind::kParse, "plan must contain an assignments object");
  std::map<std::string, ShardSpec> out;
  for (const auto& [id, value] : a->items()) {
    if (!value.is_string()) throw Error(ErrorKind::kParse, "assignment of '" + id + "' must be a string");
    ShardSpec s = ShardSpec::Parse(value.get<std::string>());
    if (s.is_partial()) throw Error(ErrorKind::kParse, "weight '" + id + "' cannot be Partial");
    out[id] = s;
  }
  return out;
}

}  // namespace tpplan
