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

#include "tpplan/shard_spec.h"

#include <charconv>

#include "tpplan/status.h"

namespace tpplan {

std::string ShardSpec::ToString() const {
  switch (kind) {
    case Kind::kReplica: return "R";
    case Kind::kPartial: return "P";
    case Kind::kSplit: return "S" + std::to_string(axis);
  }
  return "R";
}

ShardSpec ShardSpec::Parse(std::string_view text) {
  if (text == "R") return Replica();
  if (text == "P") return Partial();
  if (text.size() >= 2 && text[0] == 'S') {
    int axis = 0;
    auto body = text.substr(1);
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), axis);
    if (ec == std::errc() && ptr == body.data() + body.size()) return Split(axis);
  }
  throw Error(ErrorKind::kParse, "bad shard spec '" + std::string(text) + "'");
}

std::string_view CollectiveKindName(CollectiveKind kind) {
  switch (kind) {
    case CollectiveKind::kIdentity: return "identity";
    case CollectiveKind::kAllReduceSum: return "all_reduce_sum";
    case CollectiveKind::kAllGather: return "all_gather";
    case CollectiveKind::kReduceScatter: return "reduce_scatter";
    case CollectiveKind::kAllToAll: return "all_to_all";
  }
  return "identity";
}

CollectiveKind ParseCollectiveKind(std::string_view name) {
  for (auto kind : {CollectiveKind::kIdentity, CollectiveKind::kAllReduceSum,
                    CollectiveKind::kAllGather, CollectiveKind::kReduceScatter,
                    CollectiveKind::kAllToAll}) {
    if (CollectiveKindName(kind) == name) return kind;
  }
  throw Error(ErrorKind::kParse, "unknown collective '" + std::string(name) + "'");
}

std::string Collective::ToString() const {
  std::string s(CollectiveKindName(kind));
  switch (kind) {
    case CollectiveKind::kAllGather:
    case CollectiveKind::kReduceScatter:
      return s + "(" + std::to_string(axis) + ")";
    case CollectiveKind::kAllToAll:
      return s + "(" + std::to_string(src_axis) + "->" + std::to_string(axis) + ")";
    default:
      return s;
  }
}

}  // namespace tpplan
