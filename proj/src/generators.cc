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

#include "tpplan/generators.h"

#include <string>
#include <vector>

#include "tpplan/status.h"

namespace tpplan {

namespace {

class Builder {
 public:
  Builder(DType dtype, bool with_aux) : dtype_(dtype), with_aux_(with_aux) {}

  TensorSpec Act(std::vector<int64_t> shape) const { return {std::move(shape), dtype_, false}; }
  TensorSpec Weight(std::vector<int64_t> shape) const { return {std::move(shape), dtype_, true}; }

  const std::string& Add(std::string name, OpKind op, std::vector<std::string> inputs,
                         TensorSpec output, Attrs attrs = {},
                         std::optional<TensorSpec> weight = std::nullopt) {
    if (weight && with_aux_) {
      inputs.push_back(VariableChain(ParentScope(name) + "/kernel", *weight));
    }
    RawNode n;
    n.name = std::move(name);
    n.op = op;
    n.inputs = std::move(inputs);
    n.weight = std::move(weight);
    n.output = std::move(output);
    n.attrs = std::move(attrs);
    nodes_.push_back(std::move(n));
    return nodes_.back().name;
  }

  // An auxiliary identity (dropout at inference, checkpoint marker) sitting in
  // the data path; trimming stitches around it.
  std::string PassThrough(const std::string& scope, const std::string& input, const TensorSpec& spec) {
    if (!with_aux_) return input;
    std::string name = scope + "/Identity";
    AddAux(name, {input}, spec);
    return name;
  }

  RawGraph Finish() { return RawGraph::Build(std::move(nodes_)); }

 private:
  // Variable, initializer, two optimizer slots, the update and checkpoint ops;
  // returns the read op.
  std::string VariableChain(const std::string& var, const TensorSpec& shape) {
    TensorSpec scalar{{1}, dtype_, false};
    TensorSpec full{shape.shape, dtype_, false};
    std::string init = var + "/Initializer/random_uniform";
    AddAux(init + "/shape", {}, scalar);
    AddAux(init + "/min", {}, scalar);
    AddAux(init + "/max", {}, scalar);
    AddAux(init + "/RandomUniform", {init + "/shape"}, full);
    AddAux(init + "/sub", {init + "/max", init + "/min"}, scalar);
    AddAux(init + "/mul", {init + "/RandomUniform", init + "/sub"}, full);
    AddAux(init, {init + "/mul", init + "/min"}, full);
    AddAux(var, {}, full);
    AddAux(var + "/Assign", {var, init}, full);
    AddAux(var + "/read", {var}, full);
    for (const char* slot : {"/Adam", "/Adam_1"}) {
      std::string s = var + slot;
      AddAux(s + "/Initializer/zeros", {}, full);
      AddAux(s, {}, full);
      AddAux(s + "/Assign", {s, s + "/Initializer/zeros"}, full);
      AddAux(s + "/read", {s}, full);
    }
    std::string update = var + "/Adam/update";
    AddAux(update + "/learning_rate", {}, scalar);
    AddAux(update + "/ApplyAdam", {var, var + "/Adam", var + "/Adam_1", update + "/learning_rate"}, full);
    AddAux(var + "/save/restore", {var}, full);
    AddAux(var + "/save/Assign", {var, var + "/save/restore"}, full);
    return var + "/read";
  }

  void AddAux(std::string name, std::vector<std::string> inputs, TensorSpec spec) {
    RawNode n;
    n.name = std::move(name);
    n.op = OpKind::kAuxiliary;
    n.inputs = std::move(inputs);
    n.output = std::move(spec);
    nodes_.push_back(std::move(n));
  }

  DType dtype_;
  bool with_aux_;
  std::vector<RawNode> nodes_;
};

struct Dims {
  int64_t batch, seq, d_model, heads, ffn_mult;
};

// Multi-head attention with residual connection and layer norm. Returns the
// name of the block output.
std::string AttentionBlock(Builder& b, const std::string& p, const std::string& x,
                           const std::string& kv, int64_t kv_seq, const Dims& dims) {
  const int64_t d = dims.d_model;
  const Attrs head = {{"head_dim", std::to_string(d / dims.heads)}};
  auto q = b.Add(p + "/query/MatMul", OpKind::kMatMul, {x}, b.Act({dims.batch, dims.seq, d}), {},
                 b.Weight({d, d}));
  auto k = b.Add(p + "/key/MatMul", OpKind::kMatMul, {kv}, b.Act({dims.batch, kv_seq, d}), {},
                 b.Weight({d, d}));
  auto v = b.Add(p + "/value/MatMul", OpKind::kMatMul, {kv}, b.Act({dims.batch, kv_seq, d}), {},
                 b.Weight({d, d}));
  Attrs scores_attrs = head;
  scores_attrs["mode"] = "attn_scores";
  auto scores = b.Add(p + "/scores/MatMul", OpKind::kMatMul, {q, k},
                      b.Act({dims.batch, dims.heads, dims.seq, kv_seq}), scores_attrs);
  auto probs = b.Add(p + "/probs/Softmax", OpKind::kSoftmax, {scores},
                     b.Act({dims.batch, dims.heads, dims.seq, kv_seq}));
  Attrs context_attrs = head;
  context_attrs["mode"] = "attn_context";
  auto context = b.Add(p + "/context/MatMul", OpKind::kMatMul, {probs, v},
                       b.Act({dims.batch, dims.seq, d}), context_attrs);
  auto out = b.Add(p + "/output/MatMul", OpKind::kMatMul, {context},
                   b.Act({dims.batch, dims.seq, d}), {}, b.Weight({d, d}));
  auto dropped = b.PassThrough(p + "/dropout", out, b.Act({dims.batch, dims.seq, d}));
  auto residual = b.Add(p + "/residual/Add", OpKind::kElementwise, {dropped, x},
                        b.Act({dims.batch, dims.seq, d}), {{"fn", "add"}});
  return b.Add(p + "/layer_norm/LayerNorm", OpKind::kLayerNorm, {residual},
               b.Act({dims.batch, dims.seq, d}));
}

std::string FeedForwardBlock(Builder& b, const std::string& p, const std::string& x,
                             const Dims& dims) {
  const int64_t d = dims.d_model;
  const int64_t f = d * dims.ffn_mult;
  auto inter = b.Add(p + "/intermediate/MatMul", OpKind::kMatMul, {x},
                     b.Act({dims.batch, dims.seq, f}), {}, b.Weight({d, f}));
  auto act = b.Add(p + "/intermediate/Gelu", OpKind::kElementwise, {inter},
                   b.Act({dims.batch, dims.seq, f}), {{"fn", "gelu"}});
  auto out = b.Add(p + "/output/MatMul", OpKind::kMatMul, {act}, b.Act({dims.batch, dims.seq, d}),
                   {}, b.Weight({f, d}));
  auto dropped = b.PassThrough(p + "/dropout", out, b.Act({dims.batch, dims.seq, d}));
  auto residual = b.Add(p + "/residual/Add", OpKind::kElementwise, {dropped, x},
                        b.Act({dims.batch, dims.seq, d}), {{"fn", "add"}});
  return b.Add(p + "/layer_norm/LayerNorm", OpKind::kLayerNorm, {residual},
               b.Act({dims.batch, dims.seq, d}));
}

std::string Embed(Builder& b, const std::string& scope, const std::string& ids, int64_t vocab,
                  const Dims& dims) {
  return b.Add(scope + "/Gather", OpKind::kEmbedding, {ids},
               b.Act({dims.batch, dims.seq, dims.d_model}), {{"vocab", std::to_string(vocab)}},
               b.Weight({vocab, dims.d_model}));
}

void CheckTransformerDims(int64_t layers, int64_t d_model, int64_t heads, int64_t batch,
                          int64_t seq, int64_t vocab, int64_t ffn_mult) {
  if (layers < 1 || d_model < 1 || heads < 1 || batch < 1 || seq < 1 || vocab < 1 ||
      ffn_mult < 1) {
    throw Error(ErrorKind::kBadConfig, "transformer dimensions must be positive");
  }
  if (d_model % heads != 0) {
    throw Error(ErrorKind::kBadConfig, "d_model " + std::to_string(d_model) +
                                           " is not divisible by heads " + std::to_string(heads));
  }
}

}  // namespace

RawGraph GenTransformerStack(const TransformerConfig& c) {
  CheckTransformerDims(c.layers, c.d_model, c.heads, c.batch, c.seq, c.vocab, c.ffn_mult);
  Builder b(c.dtype, c.with_aux);
  const Dims dims{c.batch, c.seq, c.d_model, c.heads, c.ffn_mult};
  std::string x = b.Add("input_ids", OpKind::kInput, {}, b.Act({c.batch, c.seq}));
  x = Embed(b, "embeddings/word", x, c.vocab, dims);
  for (int i = 0; i < c.layers; ++i) {
    const std::string p = "encoder/layer_" + std::to_string(i);
    x = AttentionBlock(b, p + "/attention", x, x, c.seq, dims);
    x = FeedForwardBlock(b, p + "/ffn", x, dims);
  }
  x = b.Add("head/dense/MatMul", OpKind::kMatMul, {x}, b.Act({c.batch, c.seq, c.vocab}), {},
            b.Weight({c.d_model, c.vocab}));
  b.Add("output", OpKind::kOutput, {x}, b.Act({c.batch, c.seq, c.vocab}));
  return b.Finish();
}

RawGraph GenTransformerStack(int layers, int64_t d_model, int64_t heads) {
  TransformerConfig c;
  c.layers = layers;
  c.d_model = d_model;
  c.heads = heads;
  return GenTransformerStack(c);
}

RawGraph GenT5Like(const T5Config& c) {
  CheckTransformerDims(std::min(c.encoder_layers, c.decoder_layers), c.d_model, c.heads, c.batch,
                       c.seq, c.vocab, c.ffn_mult);
  Builder b(c.dtype, c.with_aux);
  const Dims dims{c.batch, c.seq, c.d_model, c.heads, c.ffn_mult};
  const int64_t d = c.d_model;

  std::string enc = b.Add("encoder_input_ids", OpKind::kInput, {}, b.Act({c.batch, c.seq}));
  enc = Embed(b, "embeddings/encoder", enc, c.vocab, dims);
  for (int i = 0; i < c.encoder_layers; ++i) {
    const std::string p = "encoder/layer_" + std::to_string(i);
    enc = AttentionBlock(b, p + "/self_attention", enc, enc, c.seq, dims);
    enc = FeedForwardBlock(b, p + "/ffn", enc, dims);
  }
  enc = b.Add("encoder/final_layer_norm/LayerNorm", OpKind::kLayerNorm, {enc},
              b.Act({c.batch, c.seq, d}));

  std::string dec = b.Add("decoder_input_ids", OpKind::kInput, {}, b.Act({c.batch, c.seq}));
  dec = Embed(b, "embeddings/decoder", dec, c.vocab, dims);
  for (int i = 0; i < c.decoder_layers; ++i) {
    const std::string p = "decoder/layer_" + std::to_string(i);
    dec = AttentionBlock(b, p + "/self_attention", dec, dec, c.seq, dims);
    dec = AttentionBlock(b, p + "/cross_attention", dec, enc, c.seq, dims);
    dec = FeedForwardBlock(b, p + "/ffn", dec, dims);
  }
  dec = b.Add("decoder/final_layer_norm/LayerNorm", OpKind::kLayerNorm, {dec},
              b.Act({c.batch, c.seq, d}));
  dec = b.Add("lm_head/dense/MatMul", OpKind::kMatMul, {dec}, b.Act({c.batch, c.seq, c.vocab}), {},
              b.Weight({d, c.vocab}));
  b.Add("output", OpKind::kOutput, {dec}, b.Act({c.batch, c.seq, c.vocab}));
  return b.Finish();
}

RawGraph GenWideClassifier(const ClassifierConfig& c) {
  if (c.num_classes < 1 || c.feature_dim < 1 || c.blocks < 0 || c.batch < 1) {
    throw Error(ErrorKind::kBadConfig, "classifier dimensions must be positive");
  }
  Builder b(c.dtype, c.with_aux);
  const int64_t f = c.feature_dim;
  std::string x = b.Add("images", OpKind::kInput, {}, b.Act({c.batch, f}));
  for (int i = 0; i < c.blocks; ++i) {
    const std::string p = "backbone/block_" + std::to_string(i);
    auto h = b.Add(p + "/dense/MatMul", OpKind::kMatMul, {x}, b.Act({c.batch, f}), {},
                   b.Weight({f, f}));
    h = b.Add(p + "/dense/Relu", OpKind::kElementwise, {h}, b.Act({c.batch, f}), {{"fn", "relu"}});
    h = b.Add(p + "/scale/Mul", OpKind::kElementwise, {h}, b.Act({c.batch, f}), {{"fn", "mul"}},
              b.Weight({f}));
    x = b.Add(p + "/residual/Add", OpKind::kElementwise, {h, x}, b.Act({c.batch, f}),
              {{"fn", "add"}});
  }
  x = b.Add("classifier/fc/MatMul", OpKind::kMatMul, {x}, b.Act({c.batch, c.num_classes}), {},
            b.Weight({f, c.num_classes}));
  x = b.Add("classifier/probs/Softmax", OpKind::kSoftmax, {x}, b.Act({c.batch, c.num_classes}));
  b.Add("predictions", OpKind::kOutput, {x}, b.Act({c.batch, c.num_classes}));
  return b.Finish();
}

RawGraph GenWideClassifier(int64_t num_classes, int64_t feature_dim) {
  ClassifierConfig c;
  c.num_classes = num_classes;
  c.feature_dim = feature_dim;
  return GenWideClassifier(c);
}

}  // namespace tpplan
