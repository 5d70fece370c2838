// include/ser/augment.hpp

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
#include <string>
#include <vector>

#include "ser/audio.hpp"

namespace ser::augment {

using audio::AudioClip;

/// y + noise_factor * n, n i.i.d. standard normal drawn from the seed.
/// The result is clamped to [-1, 1]; length is unchanged.
AudioClip add_noise(const AudioClip& clip, double noise_factor, uint64_t seed);

/// Circular roll right by round(fraction * len) samples, fraction in [0, 1).
AudioClip time_shift(const AudioClip& clip, double shift_fraction);

/// STFT phase vocoder (frame 2048, hop 512, Hann window).  Output length is
/// round(len / rate); a pure tone keeps its frequency.  rate must lie in
/// [0.25, 4].
AudioClip time_stretch(const AudioClip& clip, double rate);

/// Shifts the tone content by 2^(semitones/12): phase-vocoder stretch by
/// 2^(-semitones/12) followed by sinc-resampling back to the original number
/// of samples.  |semitones| <= 12.
AudioClip pitch_shift(const AudioClip& clip, double semitones);

/// Fan-out expansion policy.  Fields are magnitudes/bounds; per-variant
/// draws (pitch direction, stretch direction, shift amount) come from the
/// seed, so one policy value expands every clip the same way given the same
/// seed.
struct AugmentPolicy {
  double noise_factor = 0.035;
  double pitch_semitones = 2.0;  // magnitude; sign drawn from seed
  double stretch_rate = 0.8;     // drawn as rate or 1/rate from seed
  double shift_fraction = 0.2;   // upper bound; drawn uniformly in [0, bound)
  uint64_t seed = 0;
  std::vector<std::string> variants = {"noise", "pitch", "stretch", "shift"};

  void validate() const;
};

/// Returns [original] followed by one transformed clip per tag in
/// policy.variants, each applied to the original (fan-out, not chained).
/// Tags: "noise", "pitch", "stretch", "shift".
std::vector<AudioClip> expand(const AudioClip& clip,
                              const AugmentPolicy& policy);

}  // namespace ser::augment
