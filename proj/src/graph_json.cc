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

#include "tpplan/graph_json.h"

#include <fstream>
#include <sstream>

#include "tpplan/status.h"

namespace tpplan {

using nlohmann::json;

namespace {

template <typename T>
T Field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorKind::kParse, where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, where + ": bad field '" + key + "': " + e.what());
  }
}

json CollectiveToJson(const Collective& c, const std::vector<int>& participants) {
  json j = {{"kind", std::string(CollectiveKindName(c.kind))}, {"participants", participants}};
  if (c.axis >= 0) j["axis"] = c.axis;
  if (c.src_axis >= 0) j["src_axis"] = c.src_axis;
  return j;
}

}  // namespace

json TensorSpecToJson(const TensorSpec& spec) {
  return {{"shape", spec.shape}, {"dtype", std::string(DTypeName(spec.dtype))},
          {"trainable", spec.trainable}};
}

TensorSpec TensorSpecFromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kParse, "tensor spec must be an object");
  TensorSpec spec;
  spec.shape = Field<std::vector<int64_t>>(j, "shape", "tensor spec");
  spec.dtype = ParseDType(Field<std::string>(j, "dtype", "tensor spec"));
  spec.trainable = j.value("trainable", false);
  spec.Validate();
  return spec;
}

LoadResult LoadGraph(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("malformed graph document: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kParse, "graph document must be an object");
  int version = Field<int>(doc, "version", "graph");
  int devices = version == 2 ? Field<int>(doc, "devices", "graph") : 1;
  auto nodes_it = doc.find("nodes");
  if (nodes_it == doc.end() || !nodes_it->is_array()) {
    throw Error(ErrorKind::kParse, "graph: 'nodes' must be an array");
  }

  std::vector<std::string> warnings;
  std::vector<RawNode> nodes;
  for (const json& jn : *nodes_it) {
    if (!jn.is_object()) throw Error(ErrorKind::kParse, "node entries must be objects");
    RawNode n;
    n.name = Field<std::string>(jn, "name", "node");
    std::string where = "node '" + n.name + "'";
    std::string op = Field<std::string>(jn, "op", where);
    if (auto kind = ParseOpKind(op)) {
      n.op = *kind;
    } else {
      n.op = OpKind::kElementwise;
      warnings.push_back(where + ": unknown op '" + op + "' read as Elementwise");
    }
    n.inputs = Field<std::vector<std::string>>(jn, "inputs", where);
    auto w = jn.find("weight");
    if (w != jn.end() && !w->is_null()) n.weight = TensorSpecFromJson(*w);
    n.output = TensorSpecFromJson(Field<json>(jn, "output", where));
    if (auto a = jn.find("attrs"); a != jn.end() && !a->is_null()) {
      n.attrs = a->get<Attrs>();
    }
    if (version == 2) {
      n.device = Field<int>(jn, "device", where);
      if (auto s = jn.find("weight_shard"); s != jn.end() && !s->is_null()) {
        n.weight_shard = ShardSpec::Parse(s->get<std::string>());
      }
      if (auto c = jn.find("collective"); c != jn.end() && !c->is_null()) {
        Collective col;
        col.kind = ParseCollectiveKind(Field<std::string>(*c, "kind", where));
        col.axis = c->value("axis", -1);
        col.src_axis = c->value("src_axis", -1);
        n.collective = col;
        n.participants = Field<std::vector<int>>(*c, "participants", where);
      }
    }
    nodes.push_back(std::move(n));
  }
  return {RawGraph::Build(std::move(nodes), version, devices), std::move(warnings)};
}

LoadResult LoadGraphFile(const std::string& path) { return LoadGraph(ReadTextFile(path)); }

std::string SaveGraph(const RawGraph& graph) {
  json nodes = json::array();
  for (const RawNode& n : graph.nodes()) {
    json jn = {{"name", n.name},
               {"op", std::string(OpKindName(n.op))},
               {"inputs", n.inputs},
               {"weight", n.weight ? TensorSpecToJson(*n.weight) : json(nullptr)},
               {"output", TensorSpecToJson(n.output)}};
    if (!n.attrs.empty()) jn["attrs"] = n.attrs;
    if (graph.version() == 2) {
      jn["device"] = n.device;
      if (n.weight_shard) jn["weight_shard"] = n.weight_shard->ToString();
      if (n.collective) jn["collective"] = CollectiveToJson(*n.collective, n.participants);
    }
    nodes.push_back(std::move(jn));
  }
  json doc = {{"version", graph.version()}, {"nodes", std::move(nodes)}};
  if (graph.version() == 2) doc["devices"] = graph.device_count();
  return doc.dump(2) + "\n";
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path + "'");
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tpplan
