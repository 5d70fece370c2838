// include/ser/nn/model.hpp

// Copyright 2026  SER Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "ser/audio.hpp"
#include "ser/nn/layers.hpp"

namespace ser::nn {

/// Hyperparameters of the classifier.  Defaults are the trained
/// configuration; every field is persisted in the checkpoint header.
struct ModelConfig {
  std::vector<size_t> conv_filters = {64, 128, 256};
  size_t kernel_size = 3;
  size_t pool_size = 2;
  double conv_dropout = 0.15;
  double dense_dropout = 0.25;
  size_t dense_units = 256;
  size_t n_classes = 8;
  size_t input_len = 2772;
  double learning_rate = 1e-3;
  size_t epochs = 100;
  size_t batch_size = 64;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double bn_momentum = 0.9;
  double bn_eps = 1e-5;
  uint64_t seed = 0;
  // Optional early exit once the epoch-average training loss drops below
  // this value; 0 disables it.
  double stop_at_train_loss = 0.0;

  void validate() const {
    require(!conv_filters.empty(), "model config: conv_filters empty");
    for (size_t f : conv_filters) require(f > 0, "model config: zero filters");
    require(kernel_size > 0 && pool_size > 0 && dense_units > 0 &&
                n_classes > 0 && input_len > 0 && batch_size > 0,
            "model config: sizes must be positive");
    require(conv_dropout >= 0.0 && conv_dropout < 1.0 && dense_dropout >= 0.0 &&
                dense_dropout < 1.0,
            "model config: dropout rates must be in [0, 1)");
    require(learning_rate > 0.0 || learning_rate == 0.0,
            "model config: bad learning rate");
  }
};

/// One view into a trainable parameter tensor and its gradient.
template <class T>
struct ParamRef {
  std::string name;
  std::vector<T>* w;
  std::vector<T>* g;
};

template <class T>
struct ConvBlock {
  Conv1d<T> conv;
  BatchNorm1d<T> bn;
  Relu<T> relu;
  MaxPool1d<T> pool;
  Dropout<T> dropout;
};

/// The classifier stack:
///   [Conv -> BN -> ReLU -> MaxPool -> Dropout] per filter count,
///   Flatten, Dense -> ReLU -> Dropout, Dense -> Softmax.
template <class T>
class Model {
 public:
  ModelConfig config;
  std::vector<ConvBlock<T>> blocks;
  Dense<T> dense1;
  Relu<T> relu_dense;
  Dropout<T> dropout_dense;
  Dense<T> dense2;
  Softmax<T> softmax;
  /// Gradient-check switch: freeze batch-norm statistics at their running
  /// values so the loss is a fixed function of the parameters.
  bool bn_frozen = false;

  static Model build(const ModelConfig& cfg) {
    cfg.validate();
    Model m;
    m.config = cfg;
    Rng rng(mix_seed(cfg.seed, 0x6d6f64656cull));  // "model"

    size_t ch = 1;
    size_t len = cfg.input_len;
    for (size_t f : cfg.conv_filters) {
      ConvBlock<T> blk;
      blk.conv.init(ch, f, cfg.kernel_size, rng);
      blk.bn.init(f, cfg.bn_momentum, cfg.bn_eps);
      blk.pool.pool = cfg.pool_size;
      blk.dropout.rate = cfg.conv_dropout;
      m.blocks.push_back(std::move(blk));
      ch = f;
      require(len >= cfg.pool_size, "model config: input_len too short for ",
              cfg.conv_filters.size(), " pooling stages");
      len /= cfg.pool_size;
    }
    m.dense1.init(len * ch, cfg.dense_units, rng);
    m.dropout_dense.rate = cfg.dense_dropout;
    m.dense2.init(cfg.dense_units, cfg.n_classes, rng);
    return m;
  }

  size_t flatten_len() const { return dense1.in; }

  /// Probabilities (batch, 1, n_classes).
  Tensor<T> forward(const Tensor<T>& x, Mode mode, uint64_t dropout_seed = 0) {
    require(x.len == config.input_len && x.ch == 1,
            "model: expected input (batch, ", config.input_len, ", 1)");
    Tensor<T> cur = x;
    uint64_t layer = 0;
    for (auto& blk : blocks) {
      Tensor<T> tmp;
      blk.conv.forward(cur, tmp, mode);
      blk.bn.forward(tmp, cur, mode, bn_frozen);
      blk.relu.forward(cur, mode);
      blk.pool.forward(cur, tmp, mode);
      cur = std::move(tmp);
      blk.dropout.forward(cur, mode, mix_seed(dropout_seed, layer++));
    }
    // Flatten (b, len, ch) -> (b, 1, len*ch); the buffer is already
    // row-major per sample.
    cur.ch = cur.len * cur.ch;
    cur.len = 1;

    Tensor<T> tmp;
    dense1.forward(cur, tmp, mode);
    relu_dense.forward(tmp, mode);
    dropout_dense.forward(tmp, mode, mix_seed(dropout_seed, layer++));
    Tensor<T> logits;
    dense2.forward(tmp, logits, mode);
    Tensor<T> probs;
    softmax.forward(logits, probs);
    return probs;
  }

  /// Backpropagates from the cross-entropy gradient of the last forward
  /// (train-mode) pass; fills every layer's dw/db/dgamma/dbeta.
  void backward(const Tensor<T>& probs, const std::vector<T>& targets) {
    Tensor<T> d = cross_entropy_grad(probs, targets);
    Tensor<T> tmp;
    softmax.backward(d, tmp);
    d = std::move(tmp);

    dense2.backward(d, tmp);
    d = std::move(tmp);
    dropout_dense.backward(d);
    relu_dense.backward(d);
    dense1.backward(d, tmp);
    d = std::move(tmp);

    // Un-flatten to the last block's pooled shape.
    const auto& last = blocks.back();
    const size_t ch = last.conv.cout;
    d.len = d.ch / ch;
    d.ch = ch;

    for (size_t bi = blocks.size(); bi-- > 0;) {
      auto& blk = blocks[bi];
      blk.dropout.backward(d);
      blk.pool.backward(d, tmp);
      d = std::move(tmp);
      blk.relu.backward(d);
      blk.bn.backward(d, tmp);
      d = std::move(tmp);
      blk.conv.backward(d, tmp, /*need_din=*/bi != 0);
      d = std::move(tmp);
    }
  }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> out;
    for (size_t i = 0; i < blocks.size(); ++i) {
      auto& blk = blocks[i];
      const std::string tag = "conv" + std::to_string(i + 1);
      out.push_back({tag + ".w", &blk.conv.w, &blk.conv.dw});
      out.push_back({tag + ".b", &blk.conv.b, &blk.conv.db});
      out.push_back({"bn" + std::to_string(i + 1) + ".gamma", &blk.bn.gamma,
                     &blk.bn.dgamma});
      out.push_back({"bn" + std::to_string(i + 1) + ".beta", &blk.bn.beta,
                     &blk.bn.dbeta});
    }
    out.push_back({"dense1.w", &dense1.w, &dense1.dw});
    out.push_back({"dense1.b", &dense1.b, &dense1.db});
    out.push_back({"dense2.w", &dense2.w, &dense2.dw});
    out.push_back({"dense2.b", &dense2.b, &dense2.db});
    return out;
  }

  /// Running batch-norm statistics, saved with the parameters but not
  /// touched by the optimizer.
  std::vector<ParamRef<T>> running_stats() {
    std::vector<ParamRef<T>> out;
    for (size_t i = 0; i < blocks.size(); ++i) {
      const std::string tag = "bn" + std::to_string(i + 1);
      out.push_back({tag + ".running_mean", &blocks[i].bn.running_mean, nullptr});
      out.push_back({tag + ".running_var", &blocks[i].bn.running_var, nullptr});
    }
    return out;
  }

  /// Releases per-batch caches (training activations).
  void drop_caches() {
    for (auto& blk : blocks) {
      blk.conv.cached_in = Tensor<T>();
      blk.bn.xhat = Tensor<T>();
      blk.relu.mask.clear();
      blk.pool.argmax.clear();
      blk.dropout.mask.clear();
    }
    dense1.cached_in = Tensor<T>();
    relu_dense.mask.clear();
    dropout_dense.mask.clear();
    softmax.probs = Tensor<T>();
  }
};

struct Prediction {
  size_t class_index;
  std::string label;
  std::vector<double> probabilities;
};

/// Inference on one feature row (already scaled).  Ties at the argmax break
/// toward the lowest class index.
template <class T>
Prediction predict(Model<T>& model, const std::vector<T>& features) {
  require(features.size() == model.config.input_len,
          "predict: feature vector has ", features.size(), " values, expected ",
          model.config.input_len);
  Tensor<T> x(1, model.config.input_len, 1);
  std::copy(features.begin(), features.end(), x.v.begin());
  const Tensor<T> probs = model.forward(x, Mode::infer);

  Prediction p;
  p.probabilities.resize(model.config.n_classes);
  size_t best = 0;
  for (size_t c = 0; c < model.config.n_classes; ++c) {
    p.probabilities[c] = static_cast<double>(probs.at(0, 0, c));
    if (p.probabilities[c] > p.probabilities[best]) best = c;
  }
  p.class_index = best;
  p.label = best < audio::kNumEmotions
                ? std::string(audio::kEmotionNames[best])
                : "class" + std::to_string(best);
  return p;
}

}  // namespace ser::nn
