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

#ifndef TPPLAN_GRADIENT_PACKING_H_
#define TPPLAN_GRADIENT_PACKING_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tpplan/tensor_spec.h"

namespace tpplan {

struct FusionBucket {
  std::vector<size_t> members;  // indices into the packed gradient list
  int64_t total_bytes = 0;
  size_t chunk_index = 0;

  bool operator==(const FusionBucket&) const = default;
};

struct PackResult {
  std::vector<FusionBucket> buckets;
  std::vector<size_t> unfused;  // indices, input order

  // Collective calls needed after packing.
  size_t packet_count() const { return buckets.size() + unfused.size(); }
};

inline constexpr int64_t kDefaultFusionThreshold = int64_t{1} << 20;
inline constexpr int64_t kDefaultChunkSize = int64_t{4} << 20;

// Greedy first-fit in input order. Gradients of at least `mu` bytes are left
// unfused; smaller ones fill the open bucket until the next would overflow
// `chunk_size`. Throws kBadConfig when mu > chunk_size or either is < 1.
PackResult PackGradients(const std::vector<TensorSpec>& gradients, int64_t mu, int64_t chunk_size);
PackResult PackGradientBytes(const std::vector<int64_t>& sizes, int64_t mu, int64_t chunk_size);

}  // namespace tpplan

#endif  // TPPLAN_GRADIENT_PACKING_H_
