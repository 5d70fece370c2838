// src/features.cpp

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

#include "ser/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "ser/dsp.hpp"
#include "ser/io.hpp"

#include "json.hpp"

namespace ser::feat {

size_t frame_count(size_t len, const FrameConfig& fc) {
  fc.validate();
  require(len >= fc.frame_len, "clip of ", len,
          " samples is shorter than one frame (", fc.frame_len, ")");
  return 1 + (len - fc.frame_len) / fc.hop;
}

std::vector<std::vector<double>> frame_signal(const AudioClip& clip,
                                              const FrameConfig& fc) {
  const size_t n = frame_count(clip.samples.size(), fc);
  std::vector<std::vector<double>> frames(n);
  for (size_t t = 0; t < n; ++t) {
    const double* src = clip.samples.data() + t * fc.hop;
    frames[t].assign(src, src + fc.frame_len);
  }
  return frames;
}

double zcr(std::span<const double> frame) {
  require(frame.size() >= 2, "zcr: frame must have at least 2 samples");
  size_t crossings = 0;
  for (size_t t = 1; t < frame.size(); ++t) {
    if (frame[t] * frame[t - 1] < 0.0) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(frame.size());
}

double rmse(std::span<const double> frame) {
  require(!frame.empty(), "rmse: frame must be non-empty");
  double acc = 0.0;
  for (double x : frame) acc += x * x;
  return std::sqrt(acc / static_cast<double>(frame.size()));
}

namespace {

// Power spectrum |FFT|^2 of one windowed frame, bins 0..n/2.
std::vector<double> power_spectrum(const double* frame, size_t n,
                                   const std::vector<double>& window) {
  std::vector<std::complex<double>> buf(n);
  for (size_t i = 0; i < n; ++i) {
    buf[i] = {frame[i] * (window.empty() ? 1.0 : window[i]), 0.0};
  }
  dsp::fft(buf);
  std::vector<double> power(n / 2 + 1);
  for (size_t k = 0; k <= n / 2; ++k) power[k] = std::norm(buf[k]);
  return power;
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

}  // namespace

Mat log_power_spectrogram(const AudioClip& clip, const FrameConfig& fc) {
  const size_t n_frames = frame_count(clip.samples.size(), fc);
  require((fc.frame_len & (fc.frame_len - 1)) == 0,
          "spectrogram: frame_len must be a power of two");
  const auto window = fc.window == FrameConfig::Window::hann
                          ? dsp::hann_window(fc.frame_len)
                          : std::vector<double>();
  Mat out(n_frames, fc.frame_len / 2 + 1);
#pragma omp parallel for schedule(static)
  for (size_t t = 0; t < n_frames; ++t) {
    const auto power =
        power_spectrum(clip.samples.data() + t * fc.hop, fc.frame_len, window);
    for (size_t k = 0; k < power.size(); ++k) {
      out.at(t, k) = 10.0 * std::log10(power[k] + kLogFloor);
    }
  }
  return out;
}

Mat mel_filterbank(const MelConfig& mel, int sample_rate) {
  mel.validate(sample_rate);
  const size_t n_bins = mel.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(mel.fmin);
  const double mel_hi = hz_to_mel(mel.fmax_or_nyquist(sample_rate));

  // n_mels + 2 equally spaced mel points define the triangle edges.
  std::vector<double> hz(mel.n_mels + 2);
  for (size_t i = 0; i < hz.size(); ++i) {
    const double m =
        mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                     static_cast<double>(mel.n_mels + 1);
    hz[i] = mel_to_hz(m);
  }

  Mat fb(mel.n_mels, n_bins);
  for (size_t m = 0; m < mel.n_mels; ++m) {
    const double left = hz[m], center = hz[m + 1], right = hz[m + 2];
    for (size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate /
                       static_cast<double>(mel.n_fft);
      double w = 0.0;
      if (f > left && f < right) {
        w = f <= center ? (f - left) / (center - left)
                        : (right - f) / (right - center);
      }
      fb.at(m, k) = w;
    }
  }
  return fb;
}

Mat dct_matrix(size_t n_mfcc, size_t n_mels) {
  Mat d(n_mfcc, n_mels);
  const double norm0 = std::sqrt(1.0 / static_cast<double>(n_mels));
  const double norm = std::sqrt(2.0 / static_cast<double>(n_mels));
  for (size_t k = 0; k < n_mfcc; ++k) {
    for (size_t n = 0; n < n_mels; ++n) {
      d.at(k, n) = (k == 0 ? norm0 : norm) *
                   std::cos(M_PI * static_cast<double>(k) *
                            (static_cast<double>(n) + 0.5) /
                            static_cast<double>(n_mels));
    }
  }
  return d;
}

namespace {

void mfcc_frame(const double* frame, size_t frame_len,
                const std::vector<double>& window, const Mat& fb,
                const Mat& dct, double* out) {
  const auto power = power_spectrum(frame, frame_len, window);
  std::vector<double> logmel(fb.rows);
  for (size_t m = 0; m < fb.rows; ++m) {
    double acc = 0.0;
    const double* w = fb.v.data() + m * fb.cols;
    for (size_t k = 0; k < fb.cols; ++k) acc += w[k] * power[k];
    logmel[m] = std::log(acc + kLogFloor);
  }
  for (size_t k = 0; k < dct.rows; ++k) {
    double acc = 0.0;
    const double* row = dct.v.data() + k * dct.cols;
    for (size_t m = 0; m < fb.rows; ++m) acc += row[m] * logmel[m];
    out[k] = acc;
  }
}

}  // namespace

Mat mfcc(const AudioClip& clip, const FrameConfig& fc, const MelConfig& mel) {
  require(fc.frame_len == mel.n_fft,
          "mfcc: frame_len must equal n_fft (got ", fc.frame_len, " vs ",
          mel.n_fft, ")");
  const size_t n_frames = frame_count(clip.samples.size(), fc);
  const auto window = fc.window == FrameConfig::Window::hann
                          ? dsp::hann_window(fc.frame_len)
                          : std::vector<double>();
  const Mat fb = mel_filterbank(mel, clip.sample_rate);
  const Mat dct = dct_matrix(mel.n_mfcc, mel.n_mels);

  Mat out(n_frames, mel.n_mfcc);
#pragma omp parallel for schedule(static)
  for (size_t t = 0; t < n_frames; ++t) {
    mfcc_frame(clip.samples.data() + t * fc.hop, fc.frame_len, window, fb, dct,
               out.v.data() + t * out.cols);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FeatureExtractor
// ---------------------------------------------------------------------------

FeatureExtractor::FeatureExtractor(FrameConfig fc, MelConfig mel,
                                   int sample_rate, size_t canonical_len)
    : fc_(fc),
      mel_(mel),
      sample_rate_(sample_rate),
      canonical_len_(canonical_len),
      frames_(frame_count(canonical_len, fc)),
      filterbank_(mel_filterbank(mel, sample_rate)),
      dct_(dct_matrix(mel.n_mfcc, mel.n_mels)) {
  require(fc.frame_len == mel.n_fft,
          "feature extractor: frame_len must equal n_fft");
}

std::vector<double> FeatureExtractor::extract(const AudioClip& clip) const {
  require(clip.sample_rate == sample_rate_, "extract: clip at ",
          clip.sample_rate, " Hz, expected ", sample_rate_, " Hz");
  require(clip.samples.size() == canonical_len_, "extract: clip has ",
          clip.samples.size(), " samples, expected ", canonical_len_);

  const auto window = fc_.window == FrameConfig::Window::hann
                          ? dsp::hann_window(fc_.frame_len)
                          : std::vector<double>();
  const size_t stride = features_per_frame();
  std::vector<double> out(feature_len());
#pragma omp parallel for schedule(static)
  for (size_t t = 0; t < frames_; ++t) {
    const double* frame = clip.samples.data() + t * fc_.hop;
    double* dst = out.data() + t * stride;
    dst[0] = zcr({frame, fc_.frame_len});
    dst[1] = rmse({frame, fc_.frame_len});
    mfcc_frame(frame, fc_.frame_len, window, filterbank_, dct_, dst + 2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scaler
// ---------------------------------------------------------------------------

ScalerParams fit_scaler(const FeatureMatrix& train) {
  require(train.rows > 0, "fit_scaler: empty training matrix");
  ScalerParams p;
  p.mean.assign(train.cols, 0.0);
  p.std.assign(train.cols, 0.0);
  for (size_t r = 0; r < train.rows; ++r) {
    const float* row = train.row(r);
    for (size_t c = 0; c < train.cols; ++c) p.mean[c] += row[c];
  }
  for (size_t c = 0; c < train.cols; ++c) {
    p.mean[c] /= static_cast<double>(train.rows);
  }
  for (size_t r = 0; r < train.rows; ++r) {
    const float* row = train.row(r);
    for (size_t c = 0; c < train.cols; ++c) {
      const double d = row[c] - p.mean[c];
      p.std[c] += d * d;
    }
  }
  for (size_t c = 0; c < train.cols; ++c) {
    // Population standard deviation, floored so constant columns map to 0.
    p.std[c] = std::max(std::sqrt(p.std[c] / static_cast<double>(train.rows)),
                        kScalerStdFloor);
  }
  return p;
}

FeatureMatrix apply_scaler(const FeatureMatrix& m, const ScalerParams& p) {
  require(m.cols == p.mean.size(), "apply_scaler: column count mismatch");
  FeatureMatrix out = m;
#pragma omp parallel for schedule(static)
  for (size_t r = 0; r < m.rows; ++r) {
    const float* src = m.row(r);
    float* dst = out.row(r);
    for (size_t c = 0; c < m.cols; ++c) {
      dst[c] = static_cast<float>((src[c] - p.mean[c]) / p.std[c]);
    }
  }
  return out;
}

std::vector<double> scale_row(std::span<const double> row,
                              const ScalerParams& p) {
  require(row.size() == p.mean.size(), "scale_row: length mismatch");
  std::vector<double> out(row.size());
  for (size_t c = 0; c < row.size(); ++c) {
    out[c] = (row[c] - p.mean[c]) / p.std[c];
  }
  return out;
}

// ---------------------------------------------------------------------------
// One-hot
// ---------------------------------------------------------------------------

Mat one_hot(std::span<const std::string> labels) {
  std::vector<uint16_t> idx(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    idx[i] =
        static_cast<uint16_t>(audio::emotion_from_name(labels[i]));
  }
  return one_hot_indices(idx, audio::kNumEmotions);
}

Mat one_hot_indices(std::span<const uint16_t> labels, size_t n_classes) {
  Mat m(labels.size(), n_classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] < n_classes, "one_hot: label index ", labels[i],
            " out of range [0,", n_classes, ")");
    m.at(i, labels[i]) = 1.0;
  }
  return m;
}

std::vector<std::string> one_hot_decode(const Mat& m) {
  std::vector<std::string> out(m.rows);
  for (size_t r = 0; r < m.rows; ++r) {
    size_t best = 0;
    for (size_t c = 1; c < m.cols; ++c) {
      if (m.at(r, c) > m.at(r, best)) best = c;
    }
    out[r] = std::string(audio::kEmotionNames[best]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr char kFeatureMagic[4] = {'S', 'E', 'R', 'F'};
constexpr uint16_t kFeatureVersion = 1;

template <class T>
void put_le(std::string& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

template <class T>
T get_le(const std::string& in, size_t& off, const std::string& path) {
  require(off + sizeof(T) <= in.size(), path, ": feature file truncated");
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<uint8_t>(in[off + i])) << (8 * i);
  }
  off += sizeof(T);
  return v;
}

}  // namespace

void write_features(const std::string& path, const FeatureMatrix& m) {
  require(m.labels.size() == m.rows, "write_features: ", m.rows, " rows but ",
          m.labels.size(), " labels");
  std::string out;
  out.reserve(14 + m.values.size() * 4 + m.labels.size() * 2);
  out.append(kFeatureMagic, 4);
  put_le<uint16_t>(out, kFeatureVersion);
  put_le<uint32_t>(out, static_cast<uint32_t>(m.rows));
  put_le<uint32_t>(out, static_cast<uint32_t>(m.cols));
  for (float f : m.values) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_le<uint32_t>(out, bits);
  }
  for (uint16_t l : m.labels) put_le<uint16_t>(out, l);
  io::write_text(path, out);
}

FeatureMatrix read_features(const std::string& path) {
  const std::string in = io::read_text(path);
  require(in.size() >= 14, path, ": feature file truncated");
  require(std::memcmp(in.data(), kFeatureMagic, 4) == 0, path,
          ": not a feature file (bad magic)");
  size_t off = 4;
  const uint16_t version = get_le<uint16_t>(in, off, path);
  require(version == kFeatureVersion, path, ": unsupported feature file version ",
          version);
  FeatureMatrix m;
  m.rows = get_le<uint32_t>(in, off, path);
  m.cols = get_le<uint32_t>(in, off, path);
  m.values.resize(m.rows * m.cols);
  for (float& f : m.values) {
    const uint32_t bits = get_le<uint32_t>(in, off, path);
    std::memcpy(&f, &bits, 4);
  }
  m.labels.resize(m.rows);
  for (uint16_t& l : m.labels) l = get_le<uint16_t>(in, off, path);
  require(off == in.size(), path, ": trailing bytes after label block");
  return m;
}

void write_features_csv(const std::string& path, const FeatureMatrix& m) {
  std::string out;
  for (size_t c = 0; c < m.cols; ++c) {
    out += "f" + std::to_string(c) + ",";
  }
  out += "label\n";
  for (size_t r = 0; r < m.rows; ++r) {
    const float* row = m.row(r);
    for (size_t c = 0; c < m.cols; ++c) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(row[c]));
      out += buf;
      out += ',';
    }
    out += audio::kEmotionNames[m.labels[r] % audio::kNumEmotions];
    out += '\n';
  }
  io::write_text(path, out);
}

void write_spectrogram_csv(const std::string& path, const Mat& spec,
                           int sample_rate, const FrameConfig& fc) {
  std::string out;
  for (size_t r = 0; r < spec.rows; ++r) {
    for (size_t c = 0; c < spec.cols; ++c) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", spec.at(r, c));
      if (c) out += ',';
      out += buf;
    }
    out += '\n';
  }
  io::write_text(path, out);

  nlohmann::json sidecar = {{"sample_rate", sample_rate},
                            {"frame_len", fc.frame_len},
                            {"hop", fc.hop},
                            {"db_floor", kDbFloor}};
  io::write_text(path + ".json", sidecar.dump(2) + "\n");
}

}  // namespace ser::feat
