// include/ser/nn/adam.hpp

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
#include <cstdint>
#include <vector>

#include "ser/nn/model.hpp"

namespace ser::nn {

/// First/second-moment buffers, one pair per trainable tensor, plus the
/// shared step counter.
template <class T>
struct AdamState {
  std::vector<std::vector<T>> m, v;
  int64_t step = 0;

  static AdamState for_params(const std::vector<ParamRef<T>>& params) {
    AdamState s;
    for (const auto& p : params) {
      s.m.emplace_back(p.w->size(), T(0));
      s.v.emplace_back(p.w->size(), T(0));
    }
    return s;
  }
};

/// One bias-corrected Adam update of a single tensor.  `step` is the
/// post-increment step number (1 on the first call).
template <class T>
void adam_step_tensor(std::vector<T>& w, const std::vector<T>& g,
                      std::vector<T>& m, std::vector<T>& v, int64_t step,
                      const ModelConfig& cfg) {
  require(w.size() == g.size() && w.size() == m.size() && w.size() == v.size(),
          "adam: buffer size mismatch");
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step));
  const double lr = cfg.learning_rate;
  const double eps = cfg.adam_eps;

#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < w.size(); ++i) {
    const double gi = static_cast<double>(g[i]);
    const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * gi;
    const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * gi * gi;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double mhat = mi / corr1;
    const double vhat = vi / corr2;
    w[i] = static_cast<T>(static_cast<double>(w[i]) -
                          lr * mhat / (std::sqrt(vhat) + eps));
  }
}

/// Updates every trainable tensor of the model and advances the step count.
template <class T>
void adam_step(std::vector<ParamRef<T>>& params, AdamState<T>& state,
               const ModelConfig& cfg) {
  ++state.step;
  for (size_t i = 0; i < params.size(); ++i) {
    adam_step_tensor(*params[i].w, *params[i].g, state.m[i], state.v[i],
                     state.step, cfg);
  }
}

}  // namespace ser::nn
