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

#ifndef TPPLAN_TENSOR_SPEC_H_
#define TPPLAN_TENSOR_SPEC_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tpplan {

enum class DType { kF32, kF64 };

int DTypeWidth(DType dtype);
std::string_view DTypeName(DType dtype);
DType ParseDType(std::string_view name);

// Shape, element type and trainability of one tensor edge or weight.
struct TensorSpec {
  std::vector<int64_t> shape;
  DType dtype = DType::kF32;
  bool trainable = false;

  int rank() const { return static_cast<int>(shape.size()); }
  // Throws kBadConfig on overflow (shapes beyond 2^60 elements).
  int64_t num_elements() const;
  int64_t byte_size() const;
  // Throws kParse unless the shape is non-empty with every dimension >= 1.
  void Validate() const;
  std::string ShapeString() const;

  bool operator==(const TensorSpec&) const = default;
};

}  // namespace tpplan

#endif  // TPPLAN_TENSOR_SPEC_H_
