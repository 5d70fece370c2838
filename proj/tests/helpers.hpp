// tests/helpers.hpp

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

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "ser/audio.hpp"
#include "ser/rng.hpp"

namespace ser::test {

inline audio::AudioClip sine_clip(double freq_hz, double seconds,
                                  int sample_rate, double amplitude = 0.5) {
  audio::AudioClip clip;
  clip.sample_rate = sample_rate;
  const size_t n = static_cast<size_t>(std::llround(seconds * sample_rate));
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    clip.samples[i] =
        amplitude * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) /
                             static_cast<double>(sample_rate));
  }
  return clip;
}

inline audio::AudioClip noise_clip(double amplitude, double seconds,
                                   int sample_rate, uint64_t seed) {
  audio::AudioClip clip;
  clip.sample_rate = sample_rate;
  const size_t n = static_cast<size_t>(std::llround(seconds * sample_rate));
  clip.samples.resize(n);
  Rng rng(seed);
  for (double& s : clip.samples) {
    s = amplitude * (2.0 * rng.uniform() - 1.0);
  }
  return clip;
}

inline double correlation(const std::vector<double>& a,
                          const std::vector<double>& b) {
  const size_t n = std::min(a.size(), b.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0.0, da = 0.0, db = 0.0;
  for (size_t i = 0; i < n; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(da * db + 1e-300);
}

/// Self-deleting temporary directory under the system temp path.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("ser_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
  static inline int counter_ = 0;
};

}  // namespace ser::test
