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

#ifndef TPPLAN_GENERATORS_H_
#define TPPLAN_GENERATORS_H_

#include <cstdint>

#include "tpplan/graph.h"

namespace tpplan {

// Synthetic benchmark models. All generators are deterministic and emit the
// auxiliary initializer and optimizer-slot operators unless `with_aux` is off.

struct TransformerConfig {
  int layers = 2;
  int64_t d_model = 8;
  int64_t heads = 2;
  int64_t batch = 4;
  int64_t seq = 4;
  int64_t vocab = 16;
  int64_t ffn_mult = 4;
  DType dtype = DType::kF32;
  bool with_aux = true;
};

// "encoder/layer_i/..." stack of pre-embedding, L transformer layers with six
// trainable weights each (query, key, value, attention output, FFN
// intermediate, FFN output), and a vocabulary head. Throws kBadConfig.
RawGraph GenTransformerStack(const TransformerConfig& config);
RawGraph GenTransformerStack(int layers, int64_t d_model, int64_t heads);

struct T5Config {
  int encoder_layers = 2;
  int decoder_layers = 2;
  int64_t d_model = 8;
  int64_t heads = 2;
  int64_t batch = 4;
  int64_t seq = 4;
  int64_t vocab = 16;
  int64_t ffn_mult = 4;
  DType dtype = DType::kF32;
  bool with_aux = true;
};

// Encoder/decoder model. Decoder layers add a cross-attention block.
RawGraph GenT5Like(const T5Config& config);

struct ClassifierConfig {
  int64_t num_classes = 10;
  int64_t feature_dim = 16;
  int blocks = 4;
  int64_t batch = 4;
  DType dtype = DType::kF32;
  bool with_aux = true;
};

// "backbone/block_i/..." feature extractor followed by one wide FC layer of
// shape (feature_dim, num_classes). Throws kBadConfig.
RawGraph GenWideClassifier(const ClassifierConfig& config);
RawGraph GenWideClassifier(int64_t num_classes, int64_t feature_dim);

}  // namespace tpplan

#endif  // TPPLAN_GENERATORS_H_
