// include/ser/nn/kernels.hpp

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

// Hot loops for the 1D CNN.  Layout everywhere is (batch, position,
// channel) with the channel axis contiguous, so the inner loops run over
// contiguous channel rows and vectorize.
//
// Determinism contract: every output element is accumulated by exactly one
// thread in a fixed order, so results are identical for any OMP thread
// count.  Parallel regions only ever split disjoint output tiles.

#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "ser/common.hpp"

namespace ser::nn::kern {

// Register tile sizes shared by the fast paths.  The fast paths engage when
// the output channel count is a multiple of kTileF; the scalar path covers
// everything else (edges, remainders, odd shapes).
inline constexpr size_t kTileF = 16;
inline constexpr size_t kTileI = 4;

// ---------------------------------------------------------------------------
// conv1d, "same" zero padding, stride 1
//   x: (B, L, Cin)   w: (K, Cin, Cout)   bias: (Cout) or null   y: (B, L, Cout)
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
void conv_row_scalar(const T* __restrict x, size_t L, size_t cin,
                     const T* __restrict w, size_t k, size_t cout,
                     const T* __restrict bias, long i, long pad,
                     T* __restrict out_row) {
  for (size_t f = 0; f < cout; ++f) out_row[f] = bias ? bias[f] : T(0);
  for (size_t kk = 0; kk < k; ++kk) {
    const long j = i + static_cast<long>(kk) - pad;
    if (j < 0 || j >= static_cast<long>(L)) continue;
    const T* __restrict x_row = x + static_cast<size_t>(j) * cin;
    for (size_t c = 0; c < cin; ++c) {
      const T xv = x_row[c];
      const T* __restrict w_row = w + (kk * cin + c) * cout;
      for (size_t f = 0; f < cout; ++f) out_row[f] += xv * w_row[f];
    }
  }
}

// Four consecutive interior rows, one 16-wide output tile held in registers
// across the whole (k, c) reduction.
template <class T>
void conv_rows4_tiled(const T* __restrict xb, size_t cin,
                      const T* __restrict w, size_t k, size_t cout,
                      const T* __restrict bias, long i, long pad,
                      T* __restrict y_rows) {
  for (size_t f0 = 0; f0 < cout; f0 += kTileF) {
    T acc0[kTileF], acc1[kTileF], acc2[kTileF], acc3[kTileF];
    for (size_t j = 0; j < kTileF; ++j) {
      const T b = bias ? bias[f0 + j] : T(0);
      acc0[j] = b;
      acc1[j] = b;
      acc2[j] = b;
      acc3[j] = b;
    }
    for (size_t kk = 0; kk < k; ++kk) {
      const T* __restrict xk =
          xb + static_cast<size_t>(i + static_cast<long>(kk) - pad) * cin;
      const T* __restrict wk = w + kk * cin * cout + f0;
      for (size_t c = 0; c < cin; ++c) {
        const T x0 = xk[c];
        const T x1 = xk[cin + c];
        const T x2 = xk[2 * cin + c];
        const T x3 = xk[3 * cin + c];
        const T* __restrict w_row = wk + c * cout;
        for (size_t j = 0; j < kTileF; ++j) {
          const T wv = w_row[j];
          acc0[j] += x0 * wv;
          acc1[j] += x1 * wv;
          acc2[j] += x2 * wv;
          acc3[j] += x3 * wv;
        }
      }
    }
    T* __restrict o = y_rows + f0;
    for (size_t j = 0; j < kTileF; ++j) {
      o[j] = acc0[j];
      o[cout + j] = acc1[j];
      o[2 * cout + j] = acc2[j];
      o[3 * cout + j] = acc3[j];
    }
  }
}

}  // namespace detail

template <class T>
void conv1d_forward(const T* x, size_t batch, size_t L, size_t cin, const T* w,
                    size_t k, size_t cout, const T* bias, T* y) {
  const long pad = static_cast<long>(k / 2);
  // Rows with every tap in bounds:
  const long lo = pad;
  const long hi = static_cast<long>(L) - (static_cast<long>(k) - 1 - pad) - 1;
  const bool fast = cout % kTileF == 0 && hi - lo + 1 >= static_cast<long>(kTileI);

#pragma omp parallel for schedule(static)
  for (size_t b = 0; b < batch; ++b) {
    const T* xb = x + b * L * cin;
    T* yb = y + b * L * cout;
    long i = 0;
    if (fast) {
      for (; i < lo; ++i) {
        detail::conv_row_scalar(xb, L, cin, w, k, cout, bias, i, pad,
                                yb + static_cast<size_t>(i) * cout);
      }
      for (; i + static_cast<long>(kTileI) - 1 <= hi;
           i += static_cast<long>(kTileI)) {
        detail::conv_rows4_tiled(xb, cin, w, k, cout, bias, i, pad,
                                 yb + static_cast<size_t>(i) * cout);
      }
    }
    for (; i < static_cast<long>(L); ++i) {
      detail::conv_row_scalar(xb, L, cin, w, k, cout, bias, i, pad,
                              yb + static_cast<size_t>(i) * cout);
    }
  }
}

/// Input gradient as a forward convolution with transposed, tap-reversed
/// weights: wt[k'][f][c] = w[K-1-k'][c][f].
template <class T>
void conv1d_transpose_weights(const T* w, size_t k, size_t cin, size_t cout,
                              T* wt) {
  for (size_t kk = 0; kk < k; ++kk) {
    for (size_t c = 0; c < cin; ++c) {
      for (size_t f = 0; f < cout; ++f) {
        wt[((k - 1 - kk) * cout + f) * cin + c] = w[(kk * cin + c) * cout + f];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// conv1d weight/bias gradient
//   dw[k][c][f] = sum_{b,i} x[b, i+k-pad, c] * dy[b, i, f]
//
// The (b, i) reduction is packed into contiguous panels so the register tile
// streams; each (k, c-tile, f-tile) output block is owned by one thread and
// accumulated over panels in fixed order.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr size_t kPanel = 512;  // (b, i) pairs per packed panel

template <class T>
struct WgradPack {
  // xp: (cin/4 groups, panel, 4); dyp: (panel, cout)
  std::vector<T> xp, dyp;
};

}  // namespace detail

template <class T>
void conv1d_backward_weights(const T* x, const T* dy, size_t batch, size_t L,
                             size_t cin, size_t k, size_t cout, T* dw, T* db) {
  const long pad = static_cast<long>(k / 2);
  const size_t n = batch * L;

  // Bias gradient: fixed-order accumulation, vector over f.
  if (db) {
    for (size_t f = 0; f < cout; ++f) db[f] = T(0);
    for (size_t r = 0; r < n; ++r) {
      const T* __restrict dyr = dy + r * cout;
      for (size_t f = 0; f < cout; ++f) db[f] += dyr[f];
    }
  }

  const bool fast = cout % kTileF == 0 && cin % kTileI == 0;
  if (!fast) {
    // Scalar fallback, still deterministic: each (k,c) row owned by one
    // thread.
#pragma omp parallel for collapse(2) schedule(static)
    for (size_t kk = 0; kk < k; ++kk) {
      for (size_t c = 0; c < cin; ++c) {
        T* __restrict dwr = dw + (kk * cin + c) * cout;
        for (size_t f = 0; f < cout; ++f) dwr[f] = T(0);
        for (size_t b = 0; b < batch; ++b) {
          for (size_t i = 0; i < L; ++i) {
            const long j = static_cast<long>(i) + static_cast<long>(kk) - pad;
            if (j < 0 || j >= static_cast<long>(L)) continue;
            const T xv = x[(b * L + static_cast<size_t>(j)) * cin + c];
            const T* __restrict dyr = dy + (b * L + i) * cout;
            for (size_t f = 0; f < cout; ++f) dwr[f] += xv * dyr[f];
          }
        }
      }
    }
    return;
  }

  const size_t cgroups = cin / kTileI;
  const size_t ftiles = cout / kTileF;
  const size_t n_panels = (n + detail::kPanel - 1) / detail::kPanel;

  for (size_t idx = 0; idx < k * cin * cout; ++idx) dw[idx] = T(0);

  // Per-tap pass: pack panels of shifted x and dy, then accumulate every
  // (c-group, f-tile) block over the panel with register tiles.
  std::vector<T> xp(cgroups * detail::kPanel * kTileI);
  std::vector<T> dyp(detail::kPanel * cout);
  for (size_t kk = 0; kk < k; ++kk) {
    for (size_t panel = 0; panel < n_panels; ++panel) {
      const size_t r0 = panel * detail::kPanel;
      const size_t rows = std::min(detail::kPanel, n - r0);

      // Pack: out-of-range taps contribute zeros.
#pragma omp parallel for schedule(static)
      for (size_t r = 0; r < rows; ++r) {
        const size_t b = (r0 + r) / L;
        const size_t i = (r0 + r) % L;
        const long j = static_cast<long>(i) + static_cast<long>(kk) - pad;
        const bool ok = j >= 0 && j < static_cast<long>(L);
        const T* __restrict xr =
            ok ? x + (b * L + static_cast<size_t>(j)) * cin : nullptr;
        for (size_t g = 0; g < cgroups; ++g) {
          T* __restrict dst = xp.data() + (g * detail::kPanel + r) * kTileI;
          for (size_t u = 0; u < kTileI; ++u) {
            dst[u] = ok ? xr[g * kTileI + u] : T(0);
          }
        }
        const T* __restrict dyr = dy + (r0 + r) * cout;
        T* __restrict dyd = dyp.data() + r * cout;
        for (size_t f = 0; f < cout; ++f) dyd[f] = dyr[f];
      }

#pragma omp parallel for collapse(2) schedule(static)
      for (size_t g = 0; g < cgroups; ++g) {
        for (size_t ft = 0; ft < ftiles; ++ft) {
          const T* __restrict xsrc = xp.data() + g * detail::kPanel * kTileI;
          const T* __restrict dysrc = dyp.data() + ft * kTileF;
          T acc0[kTileF], acc1[kTileF], acc2[kTileF], acc3[kTileF];
          for (size_t j = 0; j < kTileF; ++j) {
            acc0[j] = T(0);
            acc1[j] = T(0);
            acc2[j] = T(0);
            acc3[j] = T(0);
          }
          for (size_t r = 0; r < rows; ++r) {
            const T* __restrict x4 = xsrc + r * kTileI;
            const T* __restrict dyr = dysrc + r * cout;
            const T x0 = x4[0], x1 = x4[1], x2 = x4[2], x3 = x4[3];
            for (size_t j = 0; j < kTileF; ++j) {
              const T d = dyr[j];
              acc0[j] += x0 * d;
              acc1[j] += x1 * d;
              acc2[j] += x2 * d;
              acc3[j] += x3 * d;
            }
          }
          T* __restrict out =
              dw + (kk * cin + g * kTileI) * cout + ft * kTileF;
          for (size_t j = 0; j < kTileF; ++j) {
            out[j] += acc0[j];
            out[cout + j] += acc1[j];
            out[2 * cout + j] += acc2[j];
            out[3 * cout + j] += acc3[j];
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Dense (fully connected): x (B, In), w (In, Out), y (B, Out)
// ---------------------------------------------------------------------------

template <class T>
void dense_forward(const T* x, size_t batch, size_t in, const T* w, size_t out,
                   const T* bias, T* y) {
  const bool fast = out % kTileF == 0 && batch >= kTileI;
  const size_t b_blocks = fast ? batch / kTileI : 0;

#pragma omp parallel for schedule(static)
  for (size_t blk = 0; blk < (fast ? b_blocks : batch); ++blk) {
    if (fast) {
      const size_t b = blk * kTileI;
      const T* __restrict x0 = x + (b + 0) * in;
      const T* __restrict x1 = x + (b + 1) * in;
      const T* __restrict x2 = x + (b + 2) * in;
      const T* __restrict x3 = x + (b + 3) * in;
      for (size_t f0 = 0; f0 < out; f0 += kTileF) {
        T acc0[kTileF], acc1[kTileF], acc2[kTileF], acc3[kTileF];
        for (size_t j = 0; j < kTileF; ++j) {
          const T bb = bias ? bias[f0 + j] : T(0);
          acc0[j] = bb;
          acc1[j] = bb;
          acc2[j] = bb;
          acc3[j] = bb;
        }
        for (size_t i = 0; i < in; ++i) {
          const T* __restrict wr = w + i * out + f0;
          const T a0 = x0[i], a1 = x1[i], a2 = x2[i], a3 = x3[i];
          for (size_t j = 0; j < kTileF; ++j) {
            const T wv = wr[j];
            acc0[j] += a0 * wv;
            acc1[j] += a1 * wv;
            acc2[j] += a2 * wv;
            acc3[j] += a3 * wv;
          }
        }
        for (size_t j = 0; j < kTileF; ++j) {
          y[(b + 0) * out + f0 + j] = acc0[j];
          y[(b + 1) * out + f0 + j] = acc1[j];
          y[(b + 2) * out + f0 + j] = acc2[j];
          y[(b + 3) * out + f0 + j] = acc3[j];
        }
      }
    } else {
      const T* __restrict xr = x + blk * in;
      T* __restrict yr = y + blk * out;
      for (size_t f = 0; f < out; ++f) yr[f] = bias ? bias[f] : T(0);
      for (size_t i = 0; i < in; ++i) {
        const T xv = xr[i];
        const T* __restrict wr = w + i * out;
        for (size_t f = 0; f < out; ++f) yr[f] += xv * wr[f];
      }
    }
  }
  if (fast) {
    // Remainder rows.
    for (size_t b = b_blocks * kTileI; b < batch; ++b) {
      const T* __restrict xr = x + b * in;
      T* __restrict yr = y + b * out;
      for (size_t f = 0; f < out; ++f) yr[f] = bias ? bias[f] : T(0);
      for (size_t i = 0; i < in; ++i) {
        const T xv = xr[i];
        const T* __restrict wr = w + i * out;
        for (size_t f = 0; f < out; ++f) yr[f] += xv * wr[f];
      }
    }
  }
}

template <class T>
void dense_backward_data(const T* dy, size_t batch, size_t in, const T* w,
                         size_t out, T* dx) {
#pragma omp parallel for schedule(static)
  for (size_t b = 0; b < batch; ++b) {
    const T* __restrict dyr = dy + b * out;
    T* __restrict dxr = dx + b * in;
    for (size_t i = 0; i < in; ++i) {
      const T* __restrict wr = w + i * out;
      T acc = T(0);
      for (size_t f = 0; f < out; ++f) acc += wr[f] * dyr[f];
      dxr[i] = acc;
    }
  }
}

template <class T>
void dense_backward_weights(const T* x, const T* dy, size_t batch, size_t in,
                            size_t out, T* dw, T* db) {
  if (db) {
    for (size_t f = 0; f < out; ++f) db[f] = T(0);
    for (size_t b = 0; b < batch; ++b) {
      const T* __restrict dyr = dy + b * out;
      for (size_t f = 0; f < out; ++f) db[f] += dyr[f];
    }
  }

  const bool fast = out % kTileF == 0 && in % kTileI == 0;
  if (!fast) {
#pragma omp parallel for schedule(static)
    for (size_t i = 0; i < in; ++i) {
      T* __restrict dwr = dw + i * out;
      for (size_t f = 0; f < out; ++f) dwr[f] = T(0);
      for (size_t b = 0; b < batch; ++b) {
        const T xv = x[b * in + i];
        const T* __restrict dyr = dy + b * out;
        for (size_t f = 0; f < out; ++f) dwr[f] += xv * dyr[f];
      }
    }
    return;
  }

  // f-tile outer so the dy stripe stays hot while x streams once per stripe.
  const size_t ftiles = out / kTileF;
  const size_t igroups = in / kTileI;
#pragma omp parallel for schedule(static)
  for (size_t ft = 0; ft < ftiles; ++ft) {
    const size_t f0 = ft * kTileF;
    for (size_t g = 0; g < igroups; ++g) {
      const size_t i0 = g * kTileI;
      T acc0[kTileF], acc1[kTileF], acc2[kTileF], acc3[kTileF];
      for (size_t j = 0; j < kTileF; ++j) {
        acc0[j] = T(0);
        acc1[j] = T(0);
        acc2[j] = T(0);
        acc3[j] = T(0);
      }
      for (size_t b = 0; b < batch; ++b) {
        const T* __restrict x4 = x + b * in + i0;
        const T* __restrict dyr = dy + b * out + f0;
        const T a0 = x4[0], a1 = x4[1], a2 = x4[2], a3 = x4[3];
        for (size_t j = 0; j < kTileF; ++j) {
          const T d = dyr[j];
          acc0[j] += a0 * d;
          acc1[j] += a1 * d;
          acc2[j] += a2 * d;
          acc3[j] += a3 * d;
        }
      }
      T* __restrict o = dw + i0 * out + f0;
      for (size_t j = 0; j < kTileF; ++j) {
        o[j] = acc0[j];
        o[out + j] = acc1[j];
        o[2 * out + j] = acc2[j];
        o[3 * out + j] = acc3[j];
      }
    }
  }
}

}  // namespace ser::nn::kern
