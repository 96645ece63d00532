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

#ifndef TPPLAN_TENSOR_H_
#define TPPLAN_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tpplan/status.h"

namespace tpplan {

// Dense row-major tensor.
template <typename T>
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s, T fill = T(0)) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(NumElements(shape)), fill);
  }

  static int64_t NumElements(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return n;
  }
  int rank() const { return static_cast<int>(shape.size()); }
  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int64_t dim(int axis) const { return shape.at(axis); }

  // Product of dimensions before / after `axis`.
  int64_t outer(int axis) const {
    int64_t n = 1;
    for (int i = 0; i < axis; ++i) n *= shape[i];
    return n;
  }
  int64_t inner(int axis) const {
    int64_t n = 1;
    for (int i = axis + 1; i < rank(); ++i) n *= shape[i];
    return n;
  }

  bool operator==(const Tensor&) const = default;
};

using TensorValue = std::variant<Tensor<float>, Tensor<double>>;

std::string ShapeToString(const std::vector<int64_t>& shape);

// Block `index` of `parts` equal blocks along `axis`. Throws kShapeMismatch.
template <typename T>
Tensor<T> SliceBlock(const Tensor<T>& t, int axis, int parts, int index) {
  if (axis < 0 || axis >= t.rank() || parts < 1 || t.dim(axis) % parts != 0 || index < 0 ||
      index >= parts) {
    throw Error(ErrorKind::kShapeMismatch, "cannot take block " + std::to_string(index) + "/" +
                                               std::to_string(parts) + " of axis " +
                                               std::to_string(axis) + " from " +
                                               ShapeToString(t.shape));
  }
  const int64_t block = t.dim(axis) / parts;
  const int64_t outer = t.outer(axis);
  const int64_t inner = t.inner(axis);
  std::vector<int64_t> shape = t.shape;
  shape[axis] = block;
  Tensor<T> out(shape);
  for (int64_t o = 0; o < outer; ++o) {
    const T* src = t.data.data() + (o * t.dim(axis) + index * block) * inner;
    std::copy(src, src + block * inner, out.data.data() + o * block * inner);
  }
  return out;
}

// Concatenation along `axis`. Throws kShapeMismatch.
template <typename T>
Tensor<T> Concat(const std::vector<Tensor<T>>& parts, int axis) {
  if (parts.empty()) throw Error(ErrorKind::kShapeMismatch, "concat of nothing");
  std::vector<int64_t> shape = parts[0].shape;
  if (axis < 0 || axis >= parts[0].rank()) {
    throw Error(ErrorKind::kShapeMismatch, "concat axis out of range");
  }
  int64_t total = 0;
  for (const Tensor<T>& p : parts) {
    std::vector<int64_t> a = p.shape, b = shape;
    if (a.size() != b.size()) throw Error(ErrorKind::kShapeMismatch, "concat rank mismatch");
    a[axis] = b[axis] = 0;
    if (a != b) {
      throw Error(ErrorKind::kShapeMismatch, "concat of " + ShapeToString(p.shape) + " with " +
                                                 ShapeToString(shape));
    }
    total += p.dim(axis);
  }
  shape[axis] = total;
  Tensor<T> out(shape);
  const int64_t outer = out.outer(axis);
  const int64_t inner = out.inner(axis);
  int64_t offset = 0;
  for (const Tensor<T>& p : parts) {
    const int64_t len = p.dim(axis) * inner;
    for (int64_t o = 0; o < outer; ++o) {
      std::copy(p.data.data() + o * len, p.data.data() + (o + 1) * len,
                out.data.data() + o * total * inner + offset);
    }
    offset += len;
  }
  return out;
}

// max|a - b| / max(max|b|, 1e-30); infinity on shape mismatch.
template <typename T>
double RelativeError(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape != b.shape) return std::numeric_limits<double>::infinity();
  double diff = 0, scale = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    diff = std::max(diff, std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i])));
    scale = std::max(scale, std::abs(static_cast<double>(b.data[i])));
  }
  return diff / std::max(scale, 1e-30);
}

// Seeded uniform(-1, 1) stream keyed by name, identical across platforms.
class UniformStream {
 public:
  UniformStream(uint64_t seed, std::string_view key);
  double Next();

 private:
  uint64_t state_;
};

uint64_t Fnv1a(std::string_view text);

template <typename T>
Tensor<T> UniformTensor(const std::vector<int64_t>& shape, uint64_t seed, std::string_view key,
                        double scale = 1.0) {
  Tensor<T> t(shape);
  UniformStream rng(seed, key);
  for (T& v : t.data) v = static_cast<T>(rng.Next() * scale);
  return t;
}

}  // namespace tpplan

#endif  // TPPLAN_TENSOR_H_
