// include/ser/audio.hpp

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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ser/common.hpp"

namespace ser::audio {

/// Mono sample buffer.  Samples are real amplitudes in [-1, 1]; every
/// transform in the engine consumes and produces this type.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  size_t size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// ---------------------------------------------------------------------------
// WAV I/O (RIFF/WAVE, PCM 16-bit or IEEE float 32-bit, 1-2 channels)
// ---------------------------------------------------------------------------

/// Decodes a WAV file.  Multichannel input is averaged to mono; 16-bit PCM
/// samples are scaled to [-1, 1] by dividing by 32768.  Malformed input
/// raises ser::Error naming the offending chunk; encodings other than
/// PCM16/float32 raise an "unsupported format" error.
AudioClip decode_wav(const std::string& path);
AudioClip decode_wav_bytes(const std::vector<uint8_t>& bytes,
                           const std::string& name = "<memory>");

/// Writes mono 16-bit PCM.  Samples are clamped to [-1, 1] and quantized by
/// round(x * 32768) clamped to the int16 range, so a decode of the written
/// file reproduces the input within 1/32768.
void encode_wav(const AudioClip& clip, const std::string& path);
std::vector<uint8_t> encode_wav_bytes(const AudioClip& clip);

// ---------------------------------------------------------------------------
// Rate and duration normalization
// ---------------------------------------------------------------------------

/// Band-limited resampling (windowed-sinc interpolation, 64-tap Kaiser
/// window).  Output length = round(len * target/source).  Identical input is
/// returned when target equals the source rate.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Forces a clip to round(seconds * sample_rate) samples: longer clips are
/// center-cropped, shorter ones zero-padded symmetrically (extra sample of
/// padding goes to the tail).
AudioClip fix_duration(const AudioClip& clip, double seconds);

// ---------------------------------------------------------------------------
// RAVDESS metadata
// ---------------------------------------------------------------------------

enum class Modality { full_av, video_only, audio_only };
enum class VocalChannel { speech, song };
enum class Emotion : uint16_t {
  neutral = 0,
  calm,
  happy,
  sad,
  angry,
  fearful,
  disgust,
  surprised
};
enum class Intensity { normal, strong };
enum class Sex { male, female };

inline constexpr size_t kNumEmotions = 8;
inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "neutral", "calm",    "happy",   "sad",
    "angry",   "fearful", "disgust", "surprised"};

std::string_view emotion_name(Emotion e);
Emotion emotion_from_name(std::string_view name);

std::string_view modality_name(Modality m);
std::string_view channel_name(VocalChannel c);
std::string_view intensity_name(Intensity i);
std::string_view sex_name(Sex s);

struct RavdessMeta {
  Modality modality = Modality::audio_only;
  VocalChannel vocal_channel = VocalChannel::speech;
  Emotion emotion = Emotion::neutral;
  Intensity intensity = Intensity::normal;
  int statement = 1;   // 1 or 2
  int repetition = 1;  // 1 or 2
  int actor = 1;       // 1..24; odd = male
  Sex sex = Sex::male;
};

/// Parses a "XX-XX-XX-XX-XX-XX-XX.wav" basename.  The error message names
/// the failing field.  A neutral emotion with strong intensity is rejected.
RavdessMeta parse_ravdess_name(std::string_view filename);

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

enum class Split { unassigned, train, val, test };
std::string_view split_name(Split s);
Split split_from_name(std::string_view name);

struct ManifestEntry {
  std::string path;
  RavdessMeta meta;
  Split split = Split::unassigned;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> warnings;  // unparseable filenames, tiny strata
};

/// Scans root_dir recursively for .wav files with parseable RAVDESS names.
/// Entries come back sorted lexicographically by path; files whose names do
/// not parse are reported in `warnings`, never fatal.
Manifest build_manifest(const std::string& root_dir);

/// Allocates integer counts n*ratios[k] summing exactly to n, floor plus
/// largest-remainder (ties to the lower index).
std::array<size_t, 3> allocate_counts(size_t n,
                                      const std::array<double, 3>& ratios);

/// Assigns train/val/test splits, stratified by emotion.  Within each
/// stratum entries are shuffled with a seed derived from (seed, emotion) and
/// assigned contiguously.  Global counts equal allocate_counts(total) exactly
/// and per-stratum counts stay within one entry of the exact proportion.
/// Strata smaller than 3 entries go entirely to train with a warning.
void split_manifest(std::vector<ManifestEntry>& entries,
                    const std::array<double, 3>& ratios, uint64_t seed,
                    std::vector<std::string>* warnings = nullptr);

/// Actor-disjoint alternative: whole actors are shuffled and assigned to
/// splits by the same ratios, so no speaker straddles a split boundary.
void split_manifest_by_actor(std::vector<ManifestEntry>& entries,
                             const std::array<double, 3>& ratios,
                             uint64_t seed);

/// CSV round-trip.  Header:
/// path,modality,channel,emotion,intensity,statement,repetition,actor,sex,split
void write_manifest_csv(const std::string& path,
                        const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest_csv(const std::string& path);

}  // namespace ser::audio
