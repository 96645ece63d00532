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

#include "tpplan/gradient_packing.h"

#include <string>

#include "tpplan/status.h"

namespace tpplan {

PackResult PackGradientBytes(const std::vector<int64_t>& sizes, int64_t mu, int64_t chunk_size) {
  if (mu < 1 || chunk_size < 1 || mu > chunk_size) {
    throw Error(ErrorKind::kBadConfig, "fusion threshold " + std::to_string(mu) +
                                           " must be in [1, chunk size " +
                                           std::to_string(chunk_size) + "]");
  }
  PackResult out;
  bool open = false;
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 0) throw Error(ErrorKind::kBadConfig, "negative gradient size");
    if (sizes[i] >= mu) {
      out.unfused.push_back(i);
      continue;
    }
    if (!open || out.buckets.back().total_bytes + sizes[i] > chunk_size) {
      FusionBucket b;
      b.chunk_index = out.buckets.size();
      out.buckets.push_back(b);
      open = true;
    }
    out.buckets.back().members.push_back(i);
    out.buckets.back().total_bytes += sizes[i];
  }
  return out;
}

PackResult PackGradients(const std::vector<TensorSpec>& gradients, int64_t mu, int64_t chunk_size) {
  std::vector<int64_t> sizes;
  sizes.reserve(gradients.size());
  for (const TensorSpec& g : gradients) sizes.push_back(g.byte_size());
  return PackGradientBytes(sizes, mu, chunk_size);
}

}  // namespace tpplan
