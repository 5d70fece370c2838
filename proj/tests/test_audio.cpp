// tests/test_audio.cpp

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

#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "ser/audio.hpp"
#include "ser/dsp.hpp"
#include "ser/rng.hpp"

using namespace ser;
using namespace ser::audio;

namespace {

void push_u32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 24) & 0xff);
}
void push_u16(std::vector<uint8_t>& v, uint16_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
}

// Hand-built WAV container, independent of encode_wav.
std::vector<uint8_t> make_wav(uint16_t format, uint16_t channels,
                              uint32_t rate, uint16_t bits,
                              const std::vector<uint8_t>& payload) {
  std::vector<uint8_t> v = {'R', 'I', 'F', 'F'};
  push_u32(v, 36 + static_cast<uint32_t>(payload.size()));
  for (char c : {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '}) v.push_back(c);
  push_u32(v, 16);
  push_u16(v, format);
  push_u16(v, channels);
  push_u32(v, rate);
  push_u32(v, rate * channels * bits / 8);
  push_u16(v, channels * bits / 8);
  push_u16(v, bits);
  for (char c : {'d', 'a', 't', 'a'}) v.push_back(c);
  push_u32(v, static_cast<uint32_t>(payload.size()));
  v.insert(v.end(), payload.begin(), payload.end());
  return v;
}

std::vector<uint8_t> pcm16_payload(const std::vector<int16_t>& samples) {
  std::vector<uint8_t> p;
  for (int16_t s : samples) push_u16(p, static_cast<uint16_t>(s));
  return p;
}

}  // namespace

TEST_CASE("decode_wav scales 16-bit PCM by 1/32768") {
  const auto wav = make_wav(1, 1, 22050, 16, pcm16_payload({0, 16384, -32768}));
  const AudioClip clip = decode_wav_bytes(wav);
  REQUIRE(clip.samples.size() == 3);
  CHECK(clip.samples[0] == doctest::Approx(0.0));
  CHECK(clip.samples[1] == doctest::Approx(0.5));
  CHECK(clip.samples[2] == doctest::Approx(-1.0));
  CHECK(clip.sample_rate == 22050);
}

TEST_CASE("decode_wav averages stereo to mono") {
  // float32 stereo frame L=1.0, R=0.0
  std::vector<uint8_t> payload(8, 0);
  const float left = 1.0f;
  std::memcpy(payload.data(), &left, 4);
  const auto wav = make_wav(3, 2, 48000, 32, payload);
  const AudioClip clip = decode_wav_bytes(wav);
  REQUIRE(clip.samples.size() == 1);
  CHECK(clip.samples[0] == doctest::Approx(0.5));
}

TEST_CASE("decode_wav rejects malformed input naming the chunk") {
  auto wav = make_wav(1, 1, 22050, 16, pcm16_payload({1, 2, 3, 4}));
  SUBCASE("truncated data chunk") {
    wav.resize(wav.size() - 4);
    CHECK_THROWS_WITH_AS(decode_wav_bytes(wav),
                         doctest::Contains("data chunk"), Error);
  }
  SUBCASE("bad RIFF magic") {
    wav[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_wav_bytes(wav), doctest::Contains("RIFF"),
                         Error);
  }
  SUBCASE("not WAVE") {
    wav[8] = 'X';
    CHECK_THROWS_WITH_AS(decode_wav_bytes(wav), doctest::Contains("WAVE"),
                         Error);
  }
  SUBCASE("unsupported encoding") {
    const auto alaw = make_wav(6, 1, 8000, 8, {0, 0});
    CHECK_THROWS_WITH_AS(decode_wav_bytes(alaw),
                         doctest::Contains("unsupported format"), Error);
  }
  SUBCASE("missing fmt chunk") {
    std::vector<uint8_t> v = {'R', 'I', 'F', 'F', 4, 0, 0, 0,
                              'W', 'A', 'V', 'E'};
    CHECK_THROWS_WITH_AS(decode_wav_bytes(v), doctest::Contains("fmt"), Error);
  }
}

TEST_CASE("wav encode/decode round-trip stays within 1/32768") {
  test::TempDir tmp("wav");
  Rng rng(7);
  AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.resize(5000);
  for (double& s : clip.samples) s = 2.0 * rng.uniform() - 1.0;

  const std::string path = tmp.file("rt.wav");
  encode_wav(clip, path);
  const AudioClip back = decode_wav(path);
  REQUIRE(back.samples.size() == clip.samples.size());
  double max_err = 0.0;
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    max_err = std::max(max_err, std::abs(back.samples[i] - clip.samples[i]));
  }
  CHECK(max_err <= 1.0 / 32768.0 + 1e-12);

  // Second round trip is exact: quantization is idempotent.
  const std::string path2 = tmp.file("rt2.wav");
  encode_wav(back, path2);
  const AudioClip back2 = decode_wav(path2);
  CHECK(back2.samples == back.samples);
}

TEST_CASE("resample identity and length ratio") {
  const AudioClip clip = test::sine_clip(440.0, 1.0, 48000);
  SUBCASE("same rate returns identical samples") {
    const AudioClip out = resample(clip, 48000);
    CHECK(out.samples == clip.samples);
  }
  SUBCASE("48000 samples to 22050") {
    const AudioClip out = resample(clip, 22050);
    CHECK(std::abs(static_cast<long>(out.samples.size()) - 22050L) <= 1);
    CHECK(out.sample_rate == 22050);
  }
}

TEST_CASE("resample preserves a 440 Hz tone") {
  const AudioClip clip = test::sine_clip(440.0, 1.0, 48000);
  const AudioClip out = resample(clip, 22050);
  const auto peak = dsp::dominant_frequency(out.samples, out.sample_rate);
  const double bin_hz =
      static_cast<double>(out.sample_rate) / static_cast<double>(peak.fft_len);
  CHECK(std::abs(peak.freq_hz - 440.0) <= bin_hz + 1e-9);
}

TEST_CASE("fix_duration crops and pads around the center") {
  AudioClip clip;
  clip.sample_rate = 22050;

  SUBCASE("identity") {
    clip.samples.assign(66150, 0.25);
    const AudioClip out = fix_duration(clip, 3.0);
    CHECK(out.samples == clip.samples);
  }
  SUBCASE("center crop 70000 -> 66150 keeps [1925, 68075)") {
    clip.samples.resize(70000);
    for (size_t i = 0; i < clip.samples.size(); ++i) {
      clip.samples[i] = static_cast<double>(i);
    }
    const AudioClip out = fix_duration(clip, 3.0);
    REQUIRE(out.samples.size() == 66150);
    CHECK(out.samples.front() == doctest::Approx(1925.0));
    CHECK(out.samples.back() == doctest::Approx(68074.0));
  }
  SUBCASE("symmetric pad 60000 -> 66150 adds 3075 zeros each side") {
    clip.samples.assign(60000, 1.0);
    const AudioClip out = fix_duration(clip, 3.0);
    REQUIRE(out.samples.size() == 66150);
    for (size_t i = 0; i < 3075; ++i) {
      CHECK(out.samples[i] == 0.0);
      CHECK(out.samples[66150 - 1 - i] == 0.0);
    }
    CHECK(out.samples[3075] == 1.0);
    CHECK(out.samples[66150 - 3076] == 1.0);
  }
}

TEST_CASE("parse_ravdess_name decodes the 7-field grammar") {
  const RavdessMeta meta = parse_ravdess_name("03-01-05-02-01-01-12.wav");
  CHECK(meta.modality == Modality::audio_only);
  CHECK(meta.vocal_channel == VocalChannel::speech);
  CHECK(meta.emotion == Emotion::angry);
  CHECK(meta.intensity == Intensity::strong);
  CHECK(meta.statement == 1);
  CHECK(meta.repetition == 1);
  CHECK(meta.actor == 12);
  CHECK(meta.sex == Sex::female);
}

TEST_CASE("parse_ravdess_name rejects invalid names naming the field") {
  CHECK_THROWS_WITH_AS(parse_ravdess_name("03-01-01-02-01-01-01.wav"),
                       doctest::Contains("neutral"), Error);
  CHECK_THROWS_WITH_AS(parse_ravdess_name("03-01-05-02-01-01.wav"),
                       doctest::Contains("7 fields"), Error);
  CHECK_THROWS_WITH_AS(parse_ravdess_name("03-01-09-02-01-01-01.wav"),
                       doctest::Contains("emotion"), Error);
  CHECK_THROWS_WITH_AS(parse_ravdess_name("03-01-05-02-01-01-25.wav"),
                       doctest::Contains("actor"), Error);
  CHECK_THROWS_WITH_AS(parse_ravdess_name("03-01-05-02-01-01-12.mp3"),
                       doctest::Contains(".wav"), Error);
  CHECK_THROWS(parse_ravdess_name("3-01-05-02-01-01-12.wav"));
  CHECK_THROWS(parse_ravdess_name("03-01-05-02-01-01-12-01.wav"));
}

TEST_CASE("parse_ravdess_name property: accepts exactly the valid grammar") {
  Rng rng(99);
  const int limits[7] = {3, 2, 8, 2, 2, 2, 24};
  int valid_checked = 0, invalid_checked = 0;
  for (int iter = 0; iter < 500; ++iter) {
    int codes[7];
    for (int f = 0; f < 7; ++f) {
      codes[f] = 1 + static_cast<int>(rng.below(limits[f]));
    }
    const bool neutral_strong = codes[2] == 1 && codes[3] == 2;
    const bool corrupt = rng.below(3) == 0;
    int bad_field = -1;
    if (corrupt) {
      bad_field = static_cast<int>(rng.below(7));
      codes[bad_field] = limits[bad_field] + 1 + static_cast<int>(rng.below(50));
    }
    char name[32];
    std::snprintf(name, sizeof name, "%02d-%02d-%02d-%02d-%02d-%02d-%02d.wav",
                  codes[0], codes[1], codes[2], codes[3], codes[4], codes[5],
                  codes[6]);
    const bool expect_ok = !corrupt && !neutral_strong &&
                           codes[6] <= 99;  // two-digit grammar bound
    if (expect_ok) {
      const RavdessMeta meta = parse_ravdess_name(name);
      CHECK(static_cast<int>(meta.emotion) == codes[2] - 1);
      CHECK(meta.sex == (codes[6] % 2 == 1 ? Sex::male : Sex::female));
      ++valid_checked;
    } else if (codes[bad_field < 0 ? 0 : bad_field] <= 99) {
      CHECK_THROWS_AS(parse_ravdess_name(name), Error);
      ++invalid_checked;
    }
  }
  CHECK(valid_checked > 100);
  CHECK(invalid_checked > 50);
}

namespace {

// Synthetic manifest with the RAVDESS speech distribution: 24 actors x
// 2 statements x 2 repetitions x (normal + strong except neutral).
std::vector<ManifestEntry> synthetic_ravdess_manifest() {
  std::vector<ManifestEntry> entries;
  for (int emotion = 1; emotion <= 8; ++emotion) {
    for (int intensity = 1; intensity <= (emotion == 1 ? 1 : 2); ++intensity) {
      for (int statement = 1; statement <= 2; ++statement) {
        for (int repetition = 1; repetition <= 2; ++repetition) {
          for (int actor = 1; actor <= 24; ++actor) {
            char name[64];
            std::snprintf(name, sizeof name,
                          "Actor_%02d/03-01-%02d-%02d-%02d-%02d-%02d.wav",
                          actor, emotion, intensity, statement, repetition,
                          actor);
            ManifestEntry e;
            e.path = name;
            e.meta = parse_ravdess_name(name);
            entries.push_back(std::move(e));
          }
        }
      }
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.path < b.path;
            });
  return entries;
}

std::array<size_t, 3> split_counts(const std::vector<ManifestEntry>& entries) {
  std::array<size_t, 3> c = {0, 0, 0};
  for (const auto& e : entries) {
    if (e.split == Split::train) ++c[0];
    else if (e.split == Split::val) ++c[1];
    else if (e.split == Split::test) ++c[2];
  }
  return c;
}

}  // namespace

TEST_CASE("split_manifest: 1440 entries at 85/7.5/7.5 give 1224/108/108") {
  auto entries = synthetic_ravdess_manifest();
  REQUIRE(entries.size() == 1440);
  split_manifest(entries, {0.85, 0.075, 0.075}, 1234);
  const auto counts = split_counts(entries);
  CHECK(counts[0] == 1224);
  CHECK(counts[1] == 108);
  CHECK(counts[2] == 108);
}

TEST_CASE("split_manifest: per-class proportions within one entry") {
  auto entries = synthetic_ravdess_manifest();
  split_manifest(entries, {0.85, 0.075, 0.075}, 77);
  const std::array<double, 3> ratios = {0.85, 0.075, 0.075};
  for (size_t cls = 0; cls < kNumEmotions; ++cls) {
    size_t n = 0;
    std::array<size_t, 3> c = {0, 0, 0};
    for (const auto& e : entries) {
      if (static_cast<size_t>(e.meta.emotion) != cls) continue;
      ++n;
      if (e.split == Split::train) ++c[0];
      else if (e.split == Split::val) ++c[1];
      else ++c[2];
    }
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(static_cast<double>(c[static_cast<size_t>(k)]) -
                     ratios[static_cast<size_t>(k)] * static_cast<double>(n)) <=
            1.0 + 1e-9);
    }
  }
}

TEST_CASE("split_manifest: union, disjointness, determinism") {
  auto a = synthetic_ravdess_manifest();
  auto b = synthetic_ravdess_manifest();
  split_manifest(a, {0.85, 0.075, 0.075}, 42);
  split_manifest(b, {0.85, 0.075, 0.075}, 42);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].split == b[i].split);
    CHECK(a[i].split != Split::unassigned);
  }
  auto c = synthetic_ravdess_manifest();
  split_manifest(c, {0.85, 0.075, 0.075}, 43);
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].split != c[i].split) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("split_manifest: ratios (1,0,0) assign everything to train") {
  auto entries = synthetic_ravdess_manifest();
  split_manifest(entries, {1.0, 0.0, 0.0}, 5);
  for (const auto& e : entries) CHECK(e.split == Split::train);
}

TEST_CASE("split_manifest: stratum smaller than 3 goes to train with warning") {
  std::vector<ManifestEntry> entries;
  for (int i = 1; i <= 2; ++i) {
    ManifestEntry e;
    e.path = cat("03-01-01-01-01-0", i, "-01.wav");
    e.meta = parse_ravdess_name(e.path);
    entries.push_back(e);
  }
  std::vector<std::string> warnings;
  split_manifest(entries, {0.85, 0.075, 0.075}, 1, &warnings);
  CHECK(entries[0].split == Split::train);
  CHECK(entries[1].split == Split::train);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("neutral") != std::string::npos);
}

TEST_CASE("split_manifest_by_actor keeps actors disjoint") {
  auto entries = synthetic_ravdess_manifest();
  split_manifest_by_actor(entries, {0.85, 0.075, 0.075}, 11);
  std::map<int, std::set<Split>> by_actor;
  for (const auto& e : entries) by_actor[e.meta.actor].insert(e.split);
  for (const auto& [actor, splits] : by_actor) {
    CHECK(splits.size() == 1);
  }
  // 24 actors at 85/7.5/7.5 -> 20/2/2 actors.
  std::set<int> val_actors, test_actors;
  for (const auto& e : entries) {
    if (e.split == Split::val) val_actors.insert(e.meta.actor);
    if (e.split == Split::test) test_actors.insert(e.meta.actor);
  }
  CHECK(val_actors.size() == 2);
  CHECK(test_actors.size() == 2);
}

TEST_CASE("build_manifest scans, sorts, and collects warnings") {
  test::TempDir tmp("manifest");
  const AudioClip clip = test::sine_clip(440.0, 0.05, 22050);

  SUBCASE("empty directory") {
    const Manifest m = build_manifest(tmp.str());
    CHECK(m.entries.empty());
    CHECK(m.warnings.empty());
  }
  SUBCASE("3 valid + 1 malformed") {
    encode_wav(clip, tmp.file("03-01-05-02-01-01-12.wav"));
    encode_wav(clip, tmp.file("03-01-01-01-01-01-01.wav"));
    encode_wav(clip, tmp.file("03-01-02-01-02-02-20.wav"));
    encode_wav(clip, tmp.file("readme-not-ravdess.wav"));
    const Manifest m = build_manifest(tmp.str());
    CHECK(m.entries.size() == 3);
    CHECK(m.warnings.size() == 1);
    CHECK(std::is_sorted(m.entries.begin(), m.entries.end(),
                         [](const ManifestEntry& a, const ManifestEntry& b) {
                           return a.path < b.path;
                         }));
  }
}

TEST_CASE("manifest CSV round-trip is idempotent") {
  test::TempDir tmp("csv");
  auto entries = synthetic_ravdess_manifest();
  entries.resize(50);
  split_manifest(entries, {1.0, 0.0, 0.0}, 3);
  const std::string p1 = tmp.file("m1.csv");
  const std::string p2 = tmp.file("m2.csv");
  write_manifest_csv(p1, entries);
  const auto back = read_manifest_csv(p1);
  write_manifest_csv(p2, back);

  std::ifstream f1(p1), f2(p2);
  const std::string s1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  REQUIRE(back.size() == entries.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].path == entries[i].path);
    CHECK(back[i].meta.emotion == entries[i].meta.emotion);
    CHECK(back[i].split == entries[i].split);
  }
}

TEST_CASE("allocate_counts: largest remainder sums exactly") {
  const auto c = allocate_counts(1440, {0.85, 0.075, 0.075});
  CHECK(c[0] == 1224);
  CHECK(c[1] == 108);
  CHECK(c[2] == 108);
  Rng rng(5);
  for (int iter = 0; iter < 200; ++iter) {
    const size_t n = rng.below(2000);
    double a = rng.uniform(), b = rng.uniform() * (1.0 - a);
    const std::array<double, 3> ratios = {a, b, 1.0 - a - b};
    const auto counts = allocate_counts(n, ratios);
    CHECK(counts[0] + counts[1] + counts[2] == n);
    for (int k = 0; k < 3; ++k) {
      const double exact = ratios[static_cast<size_t>(k)] * static_cast<double>(n);
      CHECK(std::abs(static_cast<double>(counts[static_cast<size_t>(k)]) - exact) <
            1.0 + 1e-9);
    }
  }
}
