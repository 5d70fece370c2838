// include/ser/dsp.hpp

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

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace ser::dsp {

/// In-place iterative radix-2 FFT.  The length must be a power of two.
/// The inverse transform includes the 1/N factor.
void fft(std::vector<std::complex<double>>& a, bool inverse = false);

/// Forward FFT of a real signal; returns all n bins (n a power of two).
std::vector<std::complex<double>> fft_real(std::span<const double> x);

size_t next_pow2(size_t n);

/// Periodic Hann window, w[i] = 0.5 - 0.5 cos(2 pi i / n).
std::vector<double> hann_window(size_t n);

/// Modified Bessel function of the first kind, order zero (series form).
double bessel_i0(double x);

/// Windowed-sinc interpolation.  out[i] is the band-limited evaluation of
/// the input at position i*step (input-sample units), using a 64-tap Kaiser
/// window (beta = 8) and a low-pass cutoff of min(1, 1/step) to suppress
/// aliasing when compressing.  Positions outside the input are treated as
/// zeros.
std::vector<double> sinc_resample(std::span<const double> x, double step,
                                  size_t out_len);

/// Index of the largest-magnitude bin in [0, n/2] of a zero-padded FFT, and
/// the corresponding frequency in Hz.  Test and analysis helper.
struct PeakBin {
  size_t bin;
  double freq_hz;
  size_t fft_len;
};
PeakBin dominant_frequency(std::span<const double> x, int sample_rate);

}  // namespace ser::dsp
