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

#include "tpplan/status.h"

namespace tpplan {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kCycle: return "cycle";
    case ErrorKind::kDanglingRef: return "dangling_ref";
    case ErrorKind::kEmptyGraph: return "empty_graph";
    case ErrorKind::kBadConfig: return "bad_config";
    case ErrorKind::kSpecMismatch: return "spec_mismatch";
    case ErrorKind::kIndivisibleShard: return "indivisible_shard";
    case ErrorKind::kShapeMismatch: return "shape_mismatch";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kNoValidPlan: return "no_valid_plan";
    case ErrorKind::kInternal: return "internal";
  }
  return "internal";
}

}  // namespace tpplan
