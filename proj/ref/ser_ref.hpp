// ref/ser_ref.hpp

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

// Serial reference implementations.  Everything in here is written the
// slow, obvious way -- direct definitions, no FFT, no tiling, no OpenMP --
// and is kept deliberately independent of the optimized kernels in src/.
// The test suites compare the two; the benchmark measures the gap.

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace ser::ref {

// ---- DSP ------------------------------------------------------------------

/// Direct O(n^2) discrete Fourier transform.
std::vector<std::complex<double>> dft(const std::vector<double>& x);

double zcr(const std::vector<double>& frame);
double rmse(const std::vector<double>& frame);

/// Direct triangular filterbank construction (HTK mel scale).
std::vector<std::vector<double>> mel_filterbank(size_t n_mels, size_t n_fft,
                                                double fmin, double fmax,
                                                int sample_rate);

/// MFCC of one frame by the definitions alone: direct DFT, explicit
/// filterbank sums, log, explicit orthonormal DCT-II sum.
std::vector<double> mfcc_frame(const std::vector<double>& frame,
                               const std::vector<double>& window,
                               size_t n_mels, size_t n_mfcc, double fmin,
                               double fmax, int sample_rate, double log_floor);

// ---- Neural-network kernels ------------------------------------------------

/// conv1d with "same" zero padding and stride 1.
/// x: (batch, len, cin)  w: (k, cin, cout)  b: (cout) -> (batch, len, cout)
std::vector<double> conv1d(const std::vector<double>& x, size_t batch,
                           size_t len, size_t cin,
                           const std::vector<double>& w, size_t k, size_t cout,
                           const std::vector<double>& bias);

/// Non-overlapping max pooling with window `pool`, tail truncated.
std::vector<double> maxpool1d(const std::vector<double>& x, size_t batch,
                              size_t len, size_t ch, size_t pool);

/// Train-mode batch normalization over (batch x len) per channel.
std::vector<double> batchnorm1d(const std::vector<double>& x, size_t batch,
                                size_t len, size_t ch,
                                const std::vector<double>& gamma,
                                const std::vector<double>& beta, double eps);

/// Row-wise softmax with max subtraction.
std::vector<double> softmax(const std::vector<double>& x, size_t rows,
                            size_t cols);

// ---- Metrics ----------------------------------------------------------------

/// Corpus BLEU by direct n-gram listing (no hashing): clipped modified
/// precisions for n = 1..4, epsilon smoothing 1/(2*total_n) when a level has
/// zero matches, levels with no hypothesis n-grams excluded, brevity penalty
/// exp(1 - ref/hyp) when hyp is shorter.  Scaled to [0, 100].
double bleu(const std::vector<std::vector<std::string>>& hyps,
            const std::vector<std::vector<std::string>>& refs);

/// Exact word counts via a two-pass, hash-free scan.
std::vector<std::pair<std::string, uint64_t>> word_counts(
    const std::vector<std::vector<std::string>>& sentences);

struct Prf {
  double precision, recall, f1;
  uint64_t support;
};

/// Per-class precision/recall/F1/support from label pairs, 0/0 -> 0.
std::vector<Prf> prf(const std::vector<uint16_t>& truth,
                     const std::vector<uint16_t>& pred, size_t n_classes);

}  // namespace ser::ref
