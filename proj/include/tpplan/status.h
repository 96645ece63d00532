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

#ifndef TPPLAN_STATUS_H_
#define TPPLAN_STATUS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tpplan {

// Every failure raised by the library carries one of these kinds. The CLI maps
// them onto exit codes and the "kind" field of its error JSON.
enum class ErrorKind {
  kParse,
  kCycle,
  kDanglingRef,
  kEmptyGraph,
  kBadConfig,
  kSpecMismatch,
  kIndivisibleShard,
  kShapeMismatch,
  kProtocol,
  kIo,
  kConfig,
  kNoValidPlan,
  kInternal,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tpplan

#endif  // TPPLAN_STATUS_H_
