// include/ser/features.hpp

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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ser/audio.hpp"

namespace ser::feat {

using audio::AudioClip;

inline constexpr double kLogFloor = 1e-10;
inline constexpr double kDbFloor = -100.0;

struct FrameConfig {
  size_t frame_len = 2048;
  size_t hop = 512;
  enum class Window { hann, rectangular } window = Window::hann;

  void validate() const {
    require(hop > 0 && hop <= frame_len,
            "frame config: need 0 < hop <= frame_len");
  }
};

struct MelConfig {
  size_t n_fft = 2048;
  size_t n_mels = 40;
  size_t n_mfcc = 20;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 means Nyquist

  double fmax_or_nyquist(int sample_rate) const {
    return fmax > 0.0 ? fmax : sample_rate / 2.0;
  }
  void validate(int sample_rate) const {
    require(n_mfcc <= n_mels, "mel config: n_mfcc must be <= n_mels");
    require(fmin < fmax_or_nyquist(sample_rate) &&
                fmax_or_nyquist(sample_rate) <= sample_rate / 2.0 + 1e-9,
            "mel config: need fmin < fmax <= Nyquist");
  }
};

/// Row-major double matrix used for intermediate feature maps.
struct Mat {
  size_t rows = 0, cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& at(size_t r, size_t c) { return v[r * cols + c]; }
  double at(size_t r, size_t c) const { return v[r * cols + c]; }
  std::span<const double> row(size_t r) const {
    return {v.data() + r * cols, cols};
  }
};

// ---------------------------------------------------------------------------
// Frame-level descriptors
// ---------------------------------------------------------------------------

/// Number of full frames: 1 + floor((len - frame_len)/hop); no tail padding.
size_t frame_count(size_t len, const FrameConfig& fc);

/// Materializes the frames (unwindowed).  Errors if the clip is shorter than
/// one frame.
std::vector<std::vector<double>> frame_signal(const AudioClip& clip,
                                              const FrameConfig& fc);

/// Zero-crossing rate: (1/T) * #{t in [1,T) : y[t]*y[t-1] < 0}.
double zcr(std::span<const double> frame);

/// Root-mean-square energy: sqrt(mean(y^2)).
double rmse(std::span<const double> frame);

// ---------------------------------------------------------------------------
// Spectral front end
// ---------------------------------------------------------------------------

/// Frames x (frame_len/2 + 1) matrix of 10*log10(|FFT|^2 + 1e-10), Hann
/// window applied before the transform (frame_len must be a power of two).
Mat log_power_spectrogram(const AudioClip& clip, const FrameConfig& fc);

/// Triangular filters, centers equally spaced on the mel scale
/// mel(f) = 2595 log10(1 + f/700); rows n_mels, columns n_fft/2 + 1.
Mat mel_filterbank(const MelConfig& mel, int sample_rate);

/// Orthonormal DCT-II basis, n_mfcc x n_mels.
Mat dct_matrix(size_t n_mfcc, size_t n_mels);

/// Frames x n_mfcc: power spectrum -> mel energies -> log(.+1e-10) ->
/// orthonormal DCT-II, first n_mfcc coefficients.
Mat mfcc(const AudioClip& clip, const FrameConfig& fc, const MelConfig& mel);

// ---------------------------------------------------------------------------
// Per-clip feature vectors
// ---------------------------------------------------------------------------

/// Extraction front end with the filterbank and DCT cached.  A clip must
/// arrive at the canonical rate/length; extract() rejects anything else so a
/// dataset cannot end up with ragged rows.
class FeatureExtractor {
 public:
  FeatureExtractor(FrameConfig fc, MelConfig mel, int sample_rate,
                   size_t canonical_len);

  /// Per frame [zcr, rmse, mfcc_0..mfcc_{n-1}], flattened frame-major.
  std::vector<double> extract(const AudioClip& clip) const;

  size_t frames() const { return frames_; }
  size_t features_per_frame() const { return 2 + mel_.n_mfcc; }
  size_t feature_len() const { return frames_ * features_per_frame(); }
  int sample_rate() const { return sample_rate_; }
  size_t canonical_len() const { return canonical_len_; }
  const FrameConfig& frame_config() const { return fc_; }
  const MelConfig& mel_config() const { return mel_; }

 private:
  FrameConfig fc_;
  MelConfig mel_;
  int sample_rate_;
  size_t canonical_len_;
  size_t frames_;
  Mat filterbank_;
  Mat dct_;
};

/// Dataset of per-clip rows.  float storage matches the on-disk format and
/// the training precision.
struct FeatureMatrix {
  size_t rows = 0, cols = 0;
  std::vector<float> values;
  std::vector<uint16_t> labels;

  float* row(size_t r) { return values.data() + r * cols; }
  const float* row(size_t r) const { return values.data() + r * cols; }
};

// ---------------------------------------------------------------------------
// Scaling and encoding
// ---------------------------------------------------------------------------

struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> std;  // floored at 1e-8
};

inline constexpr double kScalerStdFloor = 1e-8;

/// Per-column mean and population standard deviation over the given rows.
ScalerParams fit_scaler(const FeatureMatrix& train);

/// (x - mean) / std per column, computed in double, stored back as float.
FeatureMatrix apply_scaler(const FeatureMatrix& m, const ScalerParams& p);

/// Double-precision row transform for inference paths.
std::vector<double> scale_row(std::span<const double> row,
                              const ScalerParams& p);

/// One row per label, one 1.0 in the class column.  Labels must appear in
/// the canonical emotion order (audio::kEmotionNames).
Mat one_hot(std::span<const std::string> labels);
Mat one_hot_indices(std::span<const uint16_t> labels, size_t n_classes);
std::vector<std::string> one_hot_decode(const Mat& m);

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

/// Binary feature file: magic "SERF", u16 version, u32 rows, u32 cols,
/// row-major little-endian f32 values, then rows u16 class indices.
void write_features(const std::string& path, const FeatureMatrix& m);
FeatureMatrix read_features(const std::string& path);

/// CSV export, feature columns f0..fN then a trailing `label` column with
/// the emotion name.
void write_features_csv(const std::string& path, const FeatureMatrix& m);

/// Spectrogram CSV (one row per frame) plus a JSON sidecar at
/// `path + ".json"` with {sample_rate, frame_len, hop, db_floor}.
void write_spectrogram_csv(const std::string& path, const Mat& spec,
                           int sample_rate, const FrameConfig& fc);

}  // namespace ser::feat
