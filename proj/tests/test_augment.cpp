// tests/test_augment.cpp

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

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ser/augment.hpp"
#include "ser/dsp.hpp"

using namespace ser;
using namespace ser::augment;

namespace {

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size());
}

double peak_hz(const AudioClip& clip) {
  return dsp::dominant_frequency(clip.samples, clip.sample_rate).freq_hz;
}

double bin_hz(const AudioClip& clip) {
  const auto p = dsp::dominant_frequency(clip.samples, clip.sample_rate);
  return static_cast<double>(clip.sample_rate) /
         static_cast<double>(p.fft_len);
}

}  // namespace

TEST_CASE("add_noise: zero factor is the identity") {
  const AudioClip clip = test::sine_clip(440.0, 0.5, 22050);
  const AudioClip out = add_noise(clip, 0.0, 123);
  CHECK(out.samples == clip.samples);
}

TEST_CASE("add_noise: variance of scaled Gaussian on a silent clip") {
  AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(66150, 0.0);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const AudioClip out = add_noise(clip, 0.1, seed);
    const double var = sample_variance(out.samples);
    CHECK(var >= 0.0095);
    CHECK(var <= 0.0105);
  }
}

TEST_CASE("add_noise: deterministic per seed, clamped to [-1,1]") {
  const AudioClip clip = test::sine_clip(300.0, 0.2, 22050, 0.9);
  const AudioClip a = add_noise(clip, 0.5, 42);
  const AudioClip b = add_noise(clip, 0.5, 42);
  CHECK(a.samples == b.samples);
  for (double s : a.samples) {
    CHECK(s <= 1.0);
    CHECK(s >= -1.0);
  }
  const AudioClip c = add_noise(clip, 0.5, 43);
  CHECK(a.samples != c.samples);
}

TEST_CASE("add_noise raises expected energy (20 seeds, 3 standard errors)") {
  const AudioClip clip = test::sine_clip(220.0, 0.4, 22050, 0.3);
  double clean = 0.0;
  for (double x : clip.samples) clean += x * x;
  clean = std::sqrt(clean / static_cast<double>(clip.samples.size()));

  std::vector<double> diffs;
  for (uint64_t seed = 100; seed < 120; ++seed) {
    const AudioClip noisy = add_noise(clip, 0.05, seed);
    double e = 0.0;
    for (double x : noisy.samples) e += x * x;
    e = std::sqrt(e / static_cast<double>(noisy.samples.size()));
    diffs.push_back(e - clean);
  }
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(diffs.size());
  double var = 0.0;
  for (double d : diffs) var += (d - mean) * (d - mean);
  var /= static_cast<double>(diffs.size() - 1);
  const double se = std::sqrt(var / static_cast<double>(diffs.size()));
  CHECK(mean >= -3.0 * se);
}

TEST_CASE("time_shift: circular roll") {
  AudioClip clip;
  clip.sample_rate = 8;
  clip.samples = {1, 2, 3, 4, 5, 6, 7, 8};

  SUBCASE("fraction 0 is the identity") {
    CHECK(time_shift(clip, 0.0).samples == clip.samples);
  }
  SUBCASE("fraction 0.25 rolls right by 2") {
    const std::vector<double> expect = {7, 8, 1, 2, 3, 4, 5, 6};
    CHECK(time_shift(clip, 0.25).samples == expect);
  }
  SUBCASE("complementary shifts compose to the identity") {
    const AudioClip once = time_shift(clip, 0.25);
    const AudioClip twice = time_shift(once, 0.75);
    CHECK(twice.samples == clip.samples);
  }
  SUBCASE("length is always preserved") {
    for (double f : {0.1, 0.37, 0.5, 0.99}) {
      CHECK(time_shift(clip, f).samples.size() == clip.samples.size());
    }
  }
}

TEST_CASE("time_stretch: identity rate") {
  const AudioClip clip = test::sine_clip(440.0, 3.0, 22050);
  const AudioClip out = time_stretch(clip, 1.0);
  CHECK(std::abs(static_cast<long>(out.samples.size()) -
                 static_cast<long>(clip.samples.size())) <= 512);
  CHECK(test::correlation(out.samples, clip.samples) > 0.99);
}

TEST_CASE("time_stretch: length follows len/rate") {
  const AudioClip clip = test::sine_clip(440.0, 3.0, 22050);
  REQUIRE(clip.samples.size() == 66150);
  const AudioClip out = time_stretch(clip, 2.0);
  CHECK(std::abs(static_cast<long>(out.samples.size()) - 33075L) <= 512);
}

TEST_CASE("time_stretch: tone frequency is preserved") {
  const AudioClip clip = test::sine_clip(440.0, 3.0, 22050);
  for (double rate : {0.8, 1.25}) {
    const AudioClip out = time_stretch(clip, rate);
    CHECK(std::abs(peak_hz(out) - 440.0) <= bin_hz(out) + 1e-9);
  }
}

TEST_CASE("time_stretch: rate outside [0.25,4] is rejected") {
  const AudioClip clip = test::sine_clip(440.0, 0.5, 22050);
  CHECK_THROWS_AS(time_stretch(clip, 0.2), Error);
  CHECK_THROWS_AS(time_stretch(clip, 4.5), Error);
}

TEST_CASE("pitch_shift: identity at 0 semitones") {
  const AudioClip clip = test::sine_clip(440.0, 3.0, 22050);
  const AudioClip out = pitch_shift(clip, 0.0);
  CHECK(out.samples.size() == clip.samples.size());
  CHECK(test::correlation(out.samples, clip.samples) > 0.99);
}

TEST_CASE("pitch_shift: +/-12 semitones move 440 Hz to 880/220 Hz") {
  const AudioClip clip = test::sine_clip(440.0, 3.0, 22050);

  const AudioClip up = pitch_shift(clip, 12.0);
  CHECK(std::abs(static_cast<long>(up.samples.size()) -
                 static_cast<long>(clip.samples.size())) <= 1);
  CHECK(std::abs(peak_hz(up) - 880.0) <= bin_hz(up) + 1e-9);

  const AudioClip down = pitch_shift(clip, -12.0);
  CHECK(std::abs(static_cast<long>(down.samples.size()) -
                 static_cast<long>(clip.samples.size())) <= 1);
  CHECK(std::abs(peak_hz(down) - 220.0) <= bin_hz(down) + 1e-9);
}

TEST_CASE("pitch_shift: range check") {
  const AudioClip clip = test::sine_clip(440.0, 0.5, 22050);
  CHECK_THROWS_AS(pitch_shift(clip, 12.5), Error);
  CHECK_THROWS_AS(pitch_shift(clip, -13.0), Error);
}

TEST_CASE("expand: fan-out over the policy variants") {
  const AudioClip clip = test::sine_clip(440.0, 3.0, 22050);
  AugmentPolicy policy;
  policy.seed = 9;

  SUBCASE("no variants returns just the original") {
    policy.variants.clear();
    const auto out = expand(clip, policy);
    REQUIRE(out.size() == 1);
    CHECK(out[0].samples == clip.samples);
  }
  SUBCASE("default four variants give five clips") {
    const auto out = expand(clip, policy);
    REQUIRE(out.size() == 5);
    CHECK(out[0].samples == clip.samples);
    // Noise and shift preserve length exactly; pitch within one sample.
    CHECK(out[1].samples.size() == clip.samples.size());
    CHECK(std::abs(static_cast<long>(out[2].samples.size()) -
                   static_cast<long>(clip.samples.size())) <= 1);
    CHECK(out[4].samples.size() == clip.samples.size());
    // All variants normalize back to canonical length afterward.
    for (const auto& v : out) {
      CHECK(audio::fix_duration(v, 3.0).samples.size() == 66150);
    }
  }
  SUBCASE("same seed twice gives element-wise identical lists") {
    const auto a = expand(clip, policy);
    const auto b = expand(clip, policy);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].samples == b[i].samples);
  }
  SUBCASE("unknown tag is a policy error") {
    policy.variants = {"noise", "reverb"};
    CHECK_THROWS_WITH_AS(expand(clip, policy), doctest::Contains("reverb"),
                         Error);
  }
  SUBCASE("all outputs are finite and in [-1,1] after noise") {
    const auto out = expand(clip, policy);
    for (double s : out[1].samples) {
      CHECK(std::isfinite(s));
      CHECK(std::abs(s) <= 1.0);
    }
  }
}
