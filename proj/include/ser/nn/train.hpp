// include/ser/nn/train.hpp

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

#include <cmath>
#include <vector>

#include "ser/features.hpp"
#include "ser/nn/adam.hpp"
#include "ser/nn/model.hpp"

namespace ser::nn {

struct EpochStats {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
};

namespace detail {

template <class T>
void fill_batch(const feat::FeatureMatrix& data,
                const std::vector<size_t>& order, size_t first, size_t count,
                Tensor<T>& x, std::vector<T>& targets, size_t n_classes) {
  x = Tensor<T>(count, data.cols, 1);
  targets.assign(count * n_classes, T(0));
  for (size_t r = 0; r < count; ++r) {
    const size_t src = order[first + r];
    const float* row = data.row(src);
    for (size_t c = 0; c < data.cols; ++c) {
      x.v[r * data.cols + c] = static_cast<T>(row[c]);
    }
    require(data.labels[src] < n_classes, "train: label ", data.labels[src],
            " out of range");
    targets[r * n_classes + data.labels[src]] = T(1);
  }
}

template <class T>
std::pair<double, double> evaluate_batched(Model<T>& model,
                                           const feat::FeatureMatrix& data,
                                           size_t batch_size) {
  if (data.rows == 0) return {0.0, 0.0};
  std::vector<size_t> order(data.rows);
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  double loss_sum = 0.0;
  size_t correct = 0;
  for (size_t first = 0; first < data.rows; first += batch_size) {
    const size_t count = std::min(batch_size, data.rows - first);
    Tensor<T> x;
    std::vector<T> targets;
    fill_batch(data, order, first, count, x, targets, model.config.n_classes);
    const Tensor<T> probs = model.forward(x, Mode::infer);
    loss_sum += cross_entropy(probs, targets) * static_cast<double>(count);
    for (size_t r = 0; r < count; ++r) {
      size_t best = 0;
      for (size_t c = 1; c < model.config.n_classes; ++c) {
        if (probs.at(r, 0, c) > probs.at(r, 0, best)) best = c;
      }
      if (best == data.labels[order[first + r]]) ++correct;
    }
  }
  return {loss_sum / static_cast<double>(data.rows),
          static_cast<double>(correct) / static_cast<double>(data.rows)};
}

template <class T>
std::vector<std::vector<T>> snapshot_tensors(Model<T>& model) {
  std::vector<std::vector<T>> snap;
  for (auto& p : model.params()) snap.push_back(*p.w);
  for (auto& p : model.running_stats()) snap.push_back(*p.w);
  return snap;
}

template <class T>
void restore_tensors(Model<T>& model, const std::vector<std::vector<T>>& snap) {
  size_t idx = 0;
  for (auto& p : model.params()) *p.w = snap[idx++];
  for (auto& p : model.running_stats()) *p.w = snap[idx++];
}

}  // namespace detail

/// Mini-batch training with a seeded shuffle per epoch and a best-model
/// snapshot by validation accuracy (by training loss when the validation
/// set is empty).  The model is left at the best snapshot when training
/// ends.  A non-finite loss aborts with the epoch and batch in the message.
template <class T>
TrainHistory train(Model<T>& model, const feat::FeatureMatrix& train_set,
                   const feat::FeatureMatrix& val_set) {
  const ModelConfig& cfg = model.config;
  require(train_set.rows > 0, "train: empty training set");
  require(train_set.cols == cfg.input_len, "train: feature length ",
          train_set.cols, " does not match model input ", cfg.input_len);

  auto params = model.params();
  AdamState<T> adam = AdamState<T>::for_params(params);

  TrainHistory history;
  std::vector<std::vector<T>> best;
  double best_metric = -1.0;

  std::vector<size_t> order(train_set.rows);
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(cfg.seed, 0x65706f6368ull, epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    size_t correct = 0;
    size_t batch_index = 0;
    for (size_t first = 0; first < train_set.rows;
         first += cfg.batch_size, ++batch_index) {
      const size_t count = std::min(cfg.batch_size, train_set.rows - first);
      Tensor<T> x;
      std::vector<T> targets;
      detail::fill_batch(train_set, order, first, count, x, targets,
                         cfg.n_classes);

      const uint64_t dropout_seed =
          mix_seed(cfg.seed, epoch * 1000003ull + batch_index);
      const Tensor<T> probs = model.forward(x, Mode::train, dropout_seed);
      const double loss = cross_entropy(probs, targets);
      if (!std::isfinite(loss)) {
        fail("train: non-finite loss at epoch ", epoch, ", batch ", batch_index);
      }
      loss_sum += loss * static_cast<double>(count);
      for (size_t r = 0; r < count; ++r) {
        size_t bestc = 0;
        for (size_t c = 1; c < cfg.n_classes; ++c) {
          if (probs.at(r, 0, c) > probs.at(r, 0, bestc)) bestc = c;
        }
        if (bestc == train_set.labels[order[first + r]]) ++correct;
      }

      model.backward(probs, targets);
      adam_step(params, adam, cfg);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(train_set.rows);
    stats.train_acc =
        static_cast<double>(correct) / static_cast<double>(train_set.rows);
    const auto [vl, va] =
        detail::evaluate_batched(model, val_set, cfg.batch_size);
    stats.val_loss = vl;
    stats.val_acc = va;
    history.epochs.push_back(stats);

    const double metric = val_set.rows > 0 ? va : -stats.train_loss;
    if (metric > best_metric) {
      best_metric = metric;
      best = detail::snapshot_tensors(model);
      history.best_epoch = epoch;
    }

    if (cfg.stop_at_train_loss > 0.0 &&
        stats.train_loss < cfg.stop_at_train_loss) {
      break;
    }
  }

  if (!best.empty()) detail::restore_tensors(model, best);
  model.drop_caches();
  return history;
}

}  // namespace ser::nn
