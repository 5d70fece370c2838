// src/dsp.cpp

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

#include "ser/dsp.hpp"

#include <cmath>

#include "ser/common.hpp"

namespace ser::dsp {

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  require(n > 0 && (n & (n - 1)) == 0, "fft: length ", n,
          " is not a power of two");

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= scale;
  }
}

std::vector<std::complex<double>> fft_real(std::span<const double> x) {
  std::vector<std::complex<double>> a(x.size());
  for (size_t i = 0; i < x.size(); ++i) a[i] = {x[i], 0.0};
  fft(a);
  return a;
}

std::vector<double> hann_window(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

double bessel_i0(double x) {
  // Power series; converges quickly for the |x| <= beta range used here.
  const double half = x / 2.0;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

constexpr int kSincTaps = 64;
constexpr double kKaiserBeta = 8.0;

}  // namespace

std::vector<double> sinc_resample(std::span<const double> x, double step,
                                  size_t out_len) {
  require(step > 0.0, "sinc_resample: step must be positive");
  const double cutoff = step > 1.0 ? 1.0 / step : 1.0;
  const double half_width = kSincTaps / 2.0;
  const double i0_beta = bessel_i0(kKaiserBeta);
  const long n = static_cast<long>(x.size());

  std::vector<double> out(out_len);
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < out_len; ++i) {
    const double center = static_cast<double>(i) * step;
    const long first = static_cast<long>(std::floor(center)) - kSincTaps / 2 + 1;
    double acc = 0.0;
    for (int t = 0; t < kSincTaps; ++t) {
      const long j = first + t;
      if (j < 0 || j >= n) continue;
      const double d = static_cast<double>(j) - center;
      // Kaiser window over the tap span.
      const double u = d / half_width;
      if (u <= -1.0 || u >= 1.0) continue;
      const double win =
          bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) / i0_beta;
      acc += x[static_cast<size_t>(j)] * cutoff * sinc(cutoff * d) * win;
    }
    out[i] = acc;
  }
  return out;
}

PeakBin dominant_frequency(std::span<const double> x, int sample_rate) {
  require(!x.empty(), "dominant_frequency: empty input");
  const size_t n = next_pow2(x.size());
  std::vector<std::complex<double>> a(n);
  for (size_t i = 0; i < x.size(); ++i) a[i] = {x[i], 0.0};
  fft(a);
  size_t best = 0;
  double best_mag = -1.0;
  for (size_t k = 0; k <= n / 2; ++k) {
    const double m = std::norm(a[k]);
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  return {best, static_cast<double>(best) * sample_rate / static_cast<double>(n),
          n};
}

}  // namespace ser::dsp
