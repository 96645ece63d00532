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

#ifndef TPPLAN_GRAPH_JSON_H_
#define TPPLAN_GRAPH_JSON_H_

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tpplan/graph.h"

namespace tpplan {

struct LoadResult {
  RawGraph graph;
  // One entry per unknown op string that was read as Elementwise.
  std::vector<std::string> warnings;
};

// Parses the JSON graph format (schema version 1, or version 2 for rewritten
// per-device graphs). Throws kParse, kDanglingRef or kCycle.
LoadResult LoadGraph(std::string_view document);
LoadResult LoadGraphFile(const std::string& path);

// Canonical serialization: nodes in canonical (topological, then name) order,
// object keys sorted, two-space indentation, trailing newline.
std::string SaveGraph(const RawGraph& graph);
void WriteTextFile(const std::string& path, const std::string& text);
std::string ReadTextFile(const std::string& path);

nlohmann::json TensorSpecToJson(const TensorSpec& spec);
TensorSpec TensorSpecFromJson(const nlohmann::json& j);

}  // namespace tpplan

#endif  // TPPLAN_GRAPH_JSON_H_
