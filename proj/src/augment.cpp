// src/augment.cpp

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

#include "ser/augment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "ser/dsp.hpp"
#include "ser/rng.hpp"

namespace ser::augment {

AudioClip add_noise(const AudioClip& clip, double noise_factor, uint64_t seed) {
  require(noise_factor >= 0.0, "add_noise: noise_factor must be nonnegative");
  AudioClip out = clip;
  if (noise_factor == 0.0) return out;
  Rng rng(seed);
  for (double& s : out.samples) {
    s = std::clamp(s + noise_factor * rng.normal(), -1.0, 1.0);
  }
  return out;
}

AudioClip time_shift(const AudioClip& clip, double shift_fraction) {
  require(shift_fraction >= 0.0 && shift_fraction < 1.0,
          "time_shift: fraction must be in [0, 1), got ", shift_fraction);
  AudioClip out = clip;
  const size_t n = clip.samples.size();
  if (n == 0) return out;
  const size_t k = static_cast<size_t>(
                       std::llround(shift_fraction * static_cast<double>(n))) %
                   n;
  if (k == 0) return out;
  for (size_t i = 0; i < n; ++i) {
    out.samples[(i + k) % n] = clip.samples[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phase vocoder
// ---------------------------------------------------------------------------

namespace {

constexpr size_t kVocFrame = 2048;
constexpr size_t kVocHop = 512;

// Centered STFT: the signal gets kVocFrame/2 reflected samples on each side
// so every original sample sits under full window coverage.
std::vector<std::vector<std::complex<double>>> stft_centered(
    const std::vector<double>& x) {
  const size_t pad = kVocFrame / 2;
  std::vector<double> padded(x.size() + 2 * pad, 0.0);
  for (size_t i = 0; i < pad; ++i) {
    padded[i] = x.empty() ? 0.0 : x[std::min(pad - i, x.size() - 1)];
  }
  std::copy(x.begin(), x.end(), padded.begin() + static_cast<long>(pad));
  for (size_t i = 0; i < pad; ++i) {
    const size_t src = x.size() >= 2 + i ? x.size() - 2 - i : 0;
    padded[pad + x.size() + i] = x.empty() ? 0.0 : x[src];
  }

  const auto window = dsp::hann_window(kVocFrame);
  const size_t n_frames =
      padded.size() >= kVocFrame ? 1 + (padded.size() - kVocFrame) / kVocHop : 0;

  std::vector<std::vector<std::complex<double>>> frames(n_frames);
#pragma omp parallel for schedule(static)
  for (size_t t = 0; t < n_frames; ++t) {
    std::vector<std::complex<double>> buf(kVocFrame);
    const double* src = padded.data() + t * kVocHop;
    for (size_t i = 0; i < kVocFrame; ++i) buf[i] = {src[i] * window[i], 0.0};
    dsp::fft(buf);
    frames[t] = std::move(buf);
  }
  return frames;
}

// Overlap-add synthesis with window-squared normalization; removes the
// center pad and trims/zero-fills to out_len.
std::vector<double> istft_centered(
    const std::vector<std::vector<std::complex<double>>>& frames,
    size_t out_len) {
  const auto window = dsp::hann_window(kVocFrame);
  const size_t n_frames = frames.size();
  const size_t total =
      n_frames > 0 ? (n_frames - 1) * kVocHop + kVocFrame : kVocFrame;
  std::vector<double> acc(total, 0.0), wsum(total, 0.0);

  std::vector<std::complex<double>> buf(kVocFrame);
  for (size_t t = 0; t < n_frames; ++t) {
    buf = frames[t];
    dsp::fft(buf, /*inverse=*/true);
    double* dst = acc.data() + t * kVocHop;
    double* wdst = wsum.data() + t * kVocHop;
    for (size_t i = 0; i < kVocFrame; ++i) {
      dst[i] += buf[i].real() * window[i];
      wdst[i] += window[i] * window[i];
    }
  }

  const size_t pad = kVocFrame / 2;
  std::vector<double> out(out_len, 0.0);
  for (size_t i = 0; i < out_len && pad + i < total; ++i) {
    const double w = wsum[pad + i];
    out[i] = w > 1e-9 ? acc[pad + i] / w : 0.0;
  }
  return out;
}

double wrap_phase(double p) {
  p = std::fmod(p + M_PI, 2.0 * M_PI);
  if (p < 0) p += 2.0 * M_PI;
  return p - M_PI;
}

}  // namespace

AudioClip time_stretch(const AudioClip& clip, double rate) {
  require(rate >= 0.25 && rate <= 4.0,
          "time_stretch: rate must be in [0.25, 4], got ", rate);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  const size_t target = static_cast<size_t>(
      std::llround(static_cast<double>(clip.samples.size()) / rate));
  if (clip.samples.empty() || target == 0) return out;

  auto spectra = stft_centered(clip.samples);
  const size_t n_frames = spectra.size();
  if (n_frames == 0) {
    out.samples.assign(target, 0.0);
    return out;
  }
  // One zero frame of lookahead for magnitude interpolation at the tail.
  spectra.emplace_back(kVocFrame, std::complex<double>(0.0, 0.0));

  const size_t half = kVocFrame / 2;
  std::vector<double> omega(half + 1);
  for (size_t k = 0; k <= half; ++k) {
    omega[k] = 2.0 * M_PI * static_cast<double>(k) *
               static_cast<double>(kVocHop) / static_cast<double>(kVocFrame);
  }

  std::vector<double> phase(half + 1);
  for (size_t k = 0; k <= half; ++k) phase[k] = std::arg(spectra[0][k]);

  std::vector<std::vector<std::complex<double>>> out_frames;
  for (double pos = 0.0; pos < static_cast<double>(n_frames); pos += rate) {
    const size_t t = static_cast<size_t>(pos);
    const double alpha = pos - static_cast<double>(t);
    const auto& cur = spectra[t];
    const auto& nxt = spectra[t + 1];

    std::vector<std::complex<double>> frame(kVocFrame);
    for (size_t k = 0; k <= half; ++k) {
      const double mag =
          (1.0 - alpha) * std::abs(cur[k]) + alpha * std::abs(nxt[k]);
      frame[k] = std::polar(mag, phase[k]);
      // Propagate phase by the true per-hop advance of this bin.
      const double dphi =
          wrap_phase(std::arg(nxt[k]) - std::arg(cur[k]) - omega[k]);
      phase[k] = phase[k] + omega[k] + dphi;
    }
    // Hermitian symmetry for a real synthesis frame.
    for (size_t k = half + 1; k < kVocFrame; ++k) {
      frame[k] = std::conj(frame[kVocFrame - k]);
    }
    out_frames.push_back(std::move(frame));
  }

  out.samples = istft_centered(out_frames, target);
  return out;
}

AudioClip pitch_shift(const AudioClip& clip, double semitones) {
  require(std::abs(semitones) <= 12.0,
          "pitch_shift: semitones must be in [-12, 12], got ", semitones);
  if (clip.samples.empty()) return clip;

  // Stretch so that compressing back to the original length multiplies all
  // frequencies by 2^(semitones/12).
  const double stretch = std::pow(2.0, -semitones / 12.0);
  AudioClip stretched = time_stretch(clip, stretch);

  const size_t out_len = clip.samples.size();
  const double step = static_cast<double>(stretched.samples.size()) /
                      static_cast<double>(out_len);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples = dsp::sinc_resample(stretched.samples, step, out_len);
  return out;
}

void AugmentPolicy::validate() const {
  require(noise_factor >= 0.0, "augment policy: noise_factor must be >= 0");
  require(stretch_rate > 0.0, "augment policy: stretch_rate must be > 0");
  require(shift_fraction >= 0.0 && shift_fraction < 1.0,
          "augment policy: shift_fraction must be in [0, 1)");
  require(std::abs(pitch_semitones) <= 12.0,
          "augment policy: |pitch_semitones| must be <= 12");
  for (const auto& tag : variants) {
    require(tag == "noise" || tag == "pitch" || tag == "stretch" ||
                tag == "shift",
            "augment policy: unknown variant tag '", tag, "'");
  }
}

std::vector<AudioClip> expand(const AudioClip& clip,
                              const AugmentPolicy& policy) {
  policy.validate();
  std::vector<AudioClip> out;
  out.reserve(policy.variants.size() + 1);
  out.push_back(clip);
  for (size_t v = 0; v < policy.variants.size(); ++v) {
    const std::string& tag = policy.variants[v];
    // Per-variant stream: the draw for variant v does not depend on the
    // other tags in the list.
    Rng rng(mix_seed(policy.seed, v));
    if (tag == "noise") {
      out.push_back(add_noise(clip, policy.noise_factor, rng.next_u64()));
    } else if (tag == "pitch") {
      const double sign = rng.below(2) == 0 ? 1.0 : -1.0;
      out.push_back(pitch_shift(clip, sign * policy.pitch_semitones));
    } else if (tag == "stretch") {
      const double r = policy.stretch_rate;
      const double rate = rng.below(2) == 0 ? r : 1.0 / r;
      out.push_back(time_stretch(clip, rate));
    } else {  // shift
      out.push_back(time_shift(clip, rng.uniform() * policy.shift_fraction));
    }
  }
  return out;
}

}  // namespace ser::augment
