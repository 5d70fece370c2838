// include/ser/nn/layers.hpp

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

#include "ser/nn/kernels.hpp"
#include "ser/nn/tensor.hpp"
#include "ser/rng.hpp"

namespace ser::nn {

/// Same-padded stride-1 1D convolution.  Weights (k, cin, cout).
template <class T>
struct Conv1d {
  size_t cin = 0, cout = 0, k = 3;
  std::vector<T> w, b;
  std::vector<T> dw, db;
  Tensor<T> cached_in;  // kept in train mode for the weight gradient

  void init(size_t cin_, size_t cout_, size_t k_, Rng& rng) {
    cin = cin_;
    cout = cout_;
    k = k_;
    w.resize(k * cin * cout);
    // He-normal: std = sqrt(2 / fan_in) suits the downstream ReLU.
    const double std_dev = std::sqrt(2.0 / static_cast<double>(k * cin));
    for (T& x : w) x = static_cast<T>(std_dev * rng.normal());
    b.assign(cout, T(0));
    dw.assign(w.size(), T(0));
    db.assign(cout, T(0));
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode) {
    require(in.ch == cin, "conv1d: input has ", in.ch, " channels, expected ",
            cin);
    out = Tensor<T>(in.batch, in.len, cout);
    kern::conv1d_forward(in.v.data(), in.batch, in.len, cin, w.data(), k, cout,
                         b.data(), out.v.data());
    if (mode == Mode::train) cached_in = in;
  }

  void backward(const Tensor<T>& dout, Tensor<T>& din, bool need_din = true) {
    const Tensor<T>& in = cached_in;
    kern::conv1d_backward_weights(in.v.data(), dout.v.data(), in.batch, in.len,
                                  cin, k, cout, dw.data(), db.data());
    if (!need_din) return;
    std::vector<T> wt(w.size());
    kern::conv1d_transpose_weights(w.data(), k, cin, cout, wt.data());
    din = Tensor<T>(in.batch, in.len, cin);
    kern::conv1d_forward(dout.v.data(), in.batch, in.len, cout, wt.data(), k,
                         cin, static_cast<const T*>(nullptr), din.v.data());
  }
};

/// Per-channel batch normalization over (batch x length).  Population
/// statistics in train mode, running statistics at inference; running stats
/// are updated as r = momentum * r + (1 - momentum) * batch_stat.
template <class T>
struct BatchNorm1d {
  size_t ch = 0;
  double momentum = 0.9, eps = 1e-5;
  std::vector<T> gamma, beta, running_mean, running_var;
  std::vector<T> dgamma, dbeta;
  // caches
  Tensor<T> xhat;
  std::vector<double> inv_std;
  bool used_batch_stats = false;

  void init(size_t ch_, double momentum_, double eps_) {
    ch = ch_;
    momentum = momentum_;
    eps = eps_;
    gamma.assign(ch, T(1));
    beta.assign(ch, T(0));
    running_mean.assign(ch, T(0));
    running_var.assign(ch, T(1));
    dgamma.assign(ch, T(0));
    dbeta.assign(ch, T(0));
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode,
               bool frozen_stats) {
    require(in.ch == ch, "batchnorm: channel mismatch");
    const size_t rows = in.batch * in.len;
    const bool batch_stats = mode == Mode::train && !frozen_stats;
    if (batch_stats) {
      require(in.batch >= 2, "batchnorm: train mode needs batch >= 2");
    }

    std::vector<double> mean(ch, 0.0), var(ch, 0.0);
    if (batch_stats) {
      for (size_t r = 0; r < rows; ++r) {
        const T* __restrict row = in.v.data() + r * ch;
        for (size_t c = 0; c < ch; ++c) mean[c] += static_cast<double>(row[c]);
      }
      for (size_t c = 0; c < ch; ++c) mean[c] /= static_cast<double>(rows);
      for (size_t r = 0; r < rows; ++r) {
        const T* __restrict row = in.v.data() + r * ch;
        for (size_t c = 0; c < ch; ++c) {
          const double d = static_cast<double>(row[c]) - mean[c];
          var[c] += d * d;
        }
      }
      for (size_t c = 0; c < ch; ++c) var[c] /= static_cast<double>(rows);
      for (size_t c = 0; c < ch; ++c) {
        running_mean[c] = static_cast<T>(momentum * running_mean[c] +
                                         (1.0 - momentum) * mean[c]);
        running_var[c] = static_cast<T>(momentum * running_var[c] +
                                        (1.0 - momentum) * var[c]);
      }
    } else {
      for (size_t c = 0; c < ch; ++c) {
        mean[c] = static_cast<double>(running_mean[c]);
        var[c] = static_cast<double>(running_var[c]);
      }
    }

    inv_std.resize(ch);
    for (size_t c = 0; c < ch; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + eps);

    out = Tensor<T>(in.batch, in.len, ch);
    const bool keep_cache = mode == Mode::train;
    if (keep_cache) xhat = Tensor<T>(in.batch, in.len, ch);
#pragma omp parallel for schedule(static)
    for (size_t r = 0; r < rows; ++r) {
      const T* __restrict src = in.v.data() + r * ch;
      T* __restrict dst = out.v.data() + r * ch;
      T* __restrict xh = keep_cache ? xhat.v.data() + r * ch : nullptr;
      for (size_t c = 0; c < ch; ++c) {
        const T z = static_cast<T>((static_cast<double>(src[c]) - mean[c]) *
                                   inv_std[c]);
        if (xh) xh[c] = z;
        dst[c] = gamma[c] * z + beta[c];
      }
    }
    used_batch_stats = batch_stats;
  }

  void backward(const Tensor<T>& dout, Tensor<T>& din) {
    const size_t rows = dout.batch * dout.len;
    const double n = static_cast<double>(rows);

    std::vector<double> sum_dy(ch, 0.0), sum_dy_xhat(ch, 0.0);
    for (size_t r = 0; r < rows; ++r) {
      const T* __restrict dyr = dout.v.data() + r * ch;
      const T* __restrict xh = xhat.v.data() + r * ch;
      for (size_t c = 0; c < ch; ++c) {
        sum_dy[c] += static_cast<double>(dyr[c]);
        sum_dy_xhat[c] += static_cast<double>(dyr[c]) * static_cast<double>(xh[c]);
      }
    }
    for (size_t c = 0; c < ch; ++c) {
      dgamma[c] = static_cast<T>(sum_dy_xhat[c]);
      dbeta[c] = static_cast<T>(sum_dy[c]);
    }

    din = Tensor<T>(dout.batch, dout.len, ch);
    if (used_batch_stats) {
#pragma omp parallel for schedule(static)
      for (size_t r = 0; r < rows; ++r) {
        const T* __restrict dyr = dout.v.data() + r * ch;
        const T* __restrict xh = xhat.v.data() + r * ch;
        T* __restrict dx = din.v.data() + r * ch;
        for (size_t c = 0; c < ch; ++c) {
          const double g = static_cast<double>(gamma[c]) * inv_std[c];
          dx[c] = static_cast<T>(
              g * (static_cast<double>(dyr[c]) - sum_dy[c] / n -
                   static_cast<double>(xh[c]) * sum_dy_xhat[c] / n));
        }
      }
    } else {
      // Frozen statistics: the normalization is a constant affine map.
#pragma omp parallel for schedule(static)
      for (size_t r = 0; r < rows; ++r) {
        const T* __restrict dyr = dout.v.data() + r * ch;
        T* __restrict dx = din.v.data() + r * ch;
        for (size_t c = 0; c < ch; ++c) {
          dx[c] = static_cast<T>(static_cast<double>(gamma[c]) * inv_std[c] *
                                 static_cast<double>(dyr[c]));
        }
      }
    }
  }
};

template <class T>
struct Relu {
  std::vector<uint8_t> mask;

  void forward(Tensor<T>& x, Mode mode) {
    if (mode == Mode::train) mask.assign(x.size(), 0);
#pragma omp parallel for schedule(static)
    for (size_t idx = 0; idx < x.size(); ++idx) {
      if (x.v[idx] > T(0)) {
        if (mode == Mode::train) mask[idx] = 1;
      } else {
        x.v[idx] = T(0);
      }
    }
  }

  void backward(Tensor<T>& d) {
#pragma omp parallel for schedule(static)
    for (size_t idx = 0; idx < d.size(); ++idx) {
      if (!mask[idx]) d.v[idx] = T(0);
    }
  }
};

/// Non-overlapping max pooling along the position axis; an odd tail is
/// truncated.  Argmax indices are cached for the backward routing.
template <class T>
struct MaxPool1d {
  size_t pool = 2;
  size_t in_len = 0;
  std::vector<uint32_t> argmax;

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode) {
    require(in.len >= pool, "maxpool: length ", in.len,
            " shorter than pool window ", pool);
    in_len = in.len;
    const size_t out_len = in.len / pool;
    out = Tensor<T>(in.batch, out_len, in.ch);
    if (mode == Mode::train) argmax.assign(out.size(), 0);
#pragma omp parallel for schedule(static)
    for (size_t b = 0; b < in.batch; ++b) {
      for (size_t i = 0; i < out_len; ++i) {
        const T* __restrict src = in.row(b, i * pool);
        T* __restrict dst = out.v.data() + (b * out_len + i) * in.ch;
        uint32_t* __restrict am =
            mode == Mode::train ? argmax.data() + (b * out_len + i) * in.ch
                                : nullptr;
        for (size_t c = 0; c < in.ch; ++c) {
          T best = src[c];
          uint32_t best_p = 0;
          for (size_t p = 1; p < pool; ++p) {
            const T v = src[p * in.ch + c];
            if (v > best) {
              best = v;
              best_p = static_cast<uint32_t>(p);
            }
          }
          dst[c] = best;
          if (am) am[c] = best_p;
        }
      }
    }
  }

  void backward(const Tensor<T>& dout, Tensor<T>& din) {
    din = Tensor<T>(dout.batch, in_len, dout.ch);
    din.zero();
    const size_t out_len = dout.len;
#pragma omp parallel for schedule(static)
    for (size_t b = 0; b < dout.batch; ++b) {
      for (size_t i = 0; i < out_len; ++i) {
        const T* __restrict dyr = dout.row(b, i);
        const uint32_t* __restrict am =
            argmax.data() + (b * out_len + i) * dout.ch;
        for (size_t c = 0; c < dout.ch; ++c) {
          din.at(b, i * pool + am[c], c) = dyr[c];
        }
      }
    }
  }
};

/// Inverted dropout: zero with probability `rate`, scale survivors by
/// 1/(1-rate); identity at inference.  The mask is drawn serially from the
/// given seed so the pattern is independent of thread count.
template <class T>
struct Dropout {
  double rate = 0.0;
  std::vector<uint8_t> mask;

  void forward(Tensor<T>& x, Mode mode, uint64_t seed) {
    if (mode != Mode::train || rate <= 0.0) return;
    mask.assign(x.size(), 0);
    Rng rng(seed);
    const uint64_t threshold =
        static_cast<uint64_t>(rate * 18446744073709551616.0 /* 2^64 */);
    for (size_t idx = 0; idx < x.size(); ++idx) {
      mask[idx] = rng.next_u64() >= threshold ? 1 : 0;
    }
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
#pragma omp parallel for schedule(static)
    for (size_t idx = 0; idx < x.size(); ++idx) {
      x.v[idx] = mask[idx] ? x.v[idx] * scale : T(0);
    }
  }

  void backward(Tensor<T>& d) {
    if (rate <= 0.0 || mask.empty()) return;
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
#pragma omp parallel for schedule(static)
    for (size_t idx = 0; idx < d.size(); ++idx) {
      d.v[idx] = mask[idx] ? d.v[idx] * scale : T(0);
    }
  }
};

template <class T>
struct Dense {
  size_t in = 0, out = 0;
  std::vector<T> w, b;
  std::vector<T> dw, db;
  Tensor<T> cached_in;

  void init(size_t in_, size_t out_, Rng& rng) {
    in = in_;
    out = out_;
    w.resize(in * out);
    const double std_dev = std::sqrt(2.0 / static_cast<double>(in));
    for (T& x : w) x = static_cast<T>(std_dev * rng.normal());
    b.assign(out, T(0));
    dw.assign(w.size(), T(0));
    db.assign(out, T(0));
  }

  void forward(const Tensor<T>& x, Tensor<T>& y, Mode mode) {
    require(x.len == 1 && x.ch == in, "dense: expected (batch, 1, ", in, ")");
    y = Tensor<T>(x.batch, 1, out);
    kern::dense_forward(x.v.data(), x.batch, in, w.data(), out, b.data(),
                        y.v.data());
    if (mode == Mode::train) cached_in = x;
  }

  void backward(const Tensor<T>& dout, Tensor<T>& din) {
    const Tensor<T>& x = cached_in;
    kern::dense_backward_weights(x.v.data(), dout.v.data(), x.batch, in, out,
                                 dw.data(), db.data());
    din = Tensor<T>(x.batch, 1, in);
    kern::dense_backward_data(dout.v.data(), x.batch, in, w.data(), out,
                              din.v.data());
  }
};

/// Row softmax with max subtraction; caches the probabilities for the
/// Jacobian-vector backward.
template <class T>
struct Softmax {
  Tensor<T> probs;

  void forward(const Tensor<T>& x, Tensor<T>& y) {
    y = Tensor<T>(x.batch, 1, x.ch);
    for (size_t b = 0; b < x.batch; ++b) {
      const T* __restrict src = x.row(b, 0);
      T* __restrict dst = y.row(b, 0);
      T mx = src[0];
      for (size_t c = 1; c < x.ch; ++c) mx = std::max(mx, src[c]);
      double sum = 0.0;
      for (size_t c = 0; c < x.ch; ++c) {
        const double e = std::exp(static_cast<double>(src[c] - mx));
        dst[c] = static_cast<T>(e);
        sum += e;
      }
      for (size_t c = 0; c < x.ch; ++c) {
        dst[c] = static_cast<T>(static_cast<double>(dst[c]) / sum);
      }
    }
    probs = y;
  }

  /// dz_j = p_j * (dy_j - sum_k dy_k p_k)
  void backward(const Tensor<T>& dout, Tensor<T>& din) {
    din = Tensor<T>(dout.batch, 1, dout.ch);
    for (size_t b = 0; b < dout.batch; ++b) {
      const T* __restrict dy = dout.row(b, 0);
      const T* __restrict p = probs.row(b, 0);
      T* __restrict dz = din.row(b, 0);
      double dot = 0.0;
      for (size_t c = 0; c < dout.ch; ++c) {
        dot += static_cast<double>(dy[c]) * static_cast<double>(p[c]);
      }
      for (size_t c = 0; c < dout.ch; ++c) {
        dz[c] = static_cast<T>(static_cast<double>(p[c]) *
                               (static_cast<double>(dy[c]) - dot));
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

inline constexpr double kProbFloor = 1e-12;

/// Categorical cross-entropy: -(1/N) sum log p[true], p floored at 1e-12.
/// `targets` is row-major one-hot (batch x classes).
template <class T>
double cross_entropy(const Tensor<T>& probs, const std::vector<T>& targets) {
  require(targets.size() == probs.size(), "cross_entropy: size mismatch");
  double loss = 0.0;
  for (size_t b = 0; b < probs.batch; ++b) {
    const T* __restrict p = probs.row(b, 0);
    const T* __restrict t = targets.data() + b * probs.ch;
    for (size_t c = 0; c < probs.ch; ++c) {
      if (t[c] > T(0)) {
        loss -= static_cast<double>(t[c]) *
                std::log(std::max(static_cast<double>(p[c]), kProbFloor));
      }
    }
  }
  return loss / static_cast<double>(probs.batch);
}

/// Gradient of cross_entropy with respect to the probabilities:
/// dL/dp_c = -(1/N) * t_c / max(p_c, floor).
template <class T>
Tensor<T> cross_entropy_grad(const Tensor<T>& probs,
                             const std::vector<T>& targets) {
  Tensor<T> d(probs.batch, 1, probs.ch);
  const double inv_n = 1.0 / static_cast<double>(probs.batch);
  for (size_t b = 0; b < probs.batch; ++b) {
    const T* __restrict p = probs.row(b, 0);
    const T* __restrict t = targets.data() + b * probs.ch;
    T* __restrict dst = d.row(b, 0);
    for (size_t c = 0; c < probs.ch; ++c) {
      dst[c] = t[c] > T(0)
                   ? static_cast<T>(-inv_n * static_cast<double>(t[c]) /
                                    std::max(static_cast<double>(p[c]),
                                             kProbFloor))
                   : T(0);
    }
  }
  return d;
}

}  // namespace ser::nn
