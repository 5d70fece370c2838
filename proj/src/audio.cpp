// src/audio.cpp

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

#include "ser/audio.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "ser/dsp.hpp"
#include "ser/io.hpp"
#include "ser/rng.hpp"

namespace ser::audio {

AudioClip resample(const AudioClip& clip, int target_rate) {
  require(target_rate > 0, "resample: target rate must be positive");
  require(clip.sample_rate > 0, "resample: source rate must be positive");
  if (target_rate == clip.sample_rate) return clip;

  const double ratio =
      static_cast<double>(target_rate) / static_cast<double>(clip.sample_rate);
  const size_t out_len = static_cast<size_t>(
      std::llround(static_cast<double>(clip.samples.size()) * ratio));
  AudioClip out;
  out.sample_rate = target_rate;
  out.samples = dsp::sinc_resample(clip.samples, 1.0 / ratio, out_len);
  return out;
}

AudioClip fix_duration(const AudioClip& clip, double seconds) {
  require(seconds > 0.0, "fix_duration: seconds must be positive");
  require(clip.sample_rate > 0, "fix_duration: sample rate must be positive");
  const size_t target = static_cast<size_t>(
      std::llround(seconds * static_cast<double>(clip.sample_rate)));
  const size_t n = clip.samples.size();
  if (n == target) return clip;

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(target, 0.0);
  if (n > target) {
    const size_t start = (n - target) / 2;
    std::copy_n(clip.samples.begin() + static_cast<long>(start), target,
                out.samples.begin());
  } else {
    const size_t lead = (target - n) / 2;
    std::copy(clip.samples.begin(), clip.samples.end(),
              out.samples.begin() + static_cast<long>(lead));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

std::string_view emotion_name(Emotion e) {
  return kEmotionNames[static_cast<size_t>(e)];
}

Emotion emotion_from_name(std::string_view name) {
  for (size_t i = 0; i < kNumEmotions; ++i) {
    if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
  }
  fail("unknown emotion label: ", name);
}

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::full_av: return "full-AV";
    case Modality::video_only: return "video-only";
    case Modality::audio_only: return "audio-only";
  }
  return "";
}

std::string_view channel_name(VocalChannel c) {
  return c == VocalChannel::speech ? "speech" : "song";
}

std::string_view intensity_name(Intensity i) {
  return i == Intensity::normal ? "normal" : "strong";
}

std::string_view sex_name(Sex s) { return s == Sex::male ? "male" : "female"; }

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: return "unassigned";
  }
  return "";
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  if (name == "unassigned") return Split::unassigned;
  fail("unknown split name: ", name);
}

// ---------------------------------------------------------------------------
// RAVDESS filename grammar: seven dash-separated two-digit fields + ".wav"
// ---------------------------------------------------------------------------

RavdessMeta parse_ravdess_name(std::string_view filename) {
  // Strip any directory part.
  const size_t slash = filename.find_last_of("/\\");
  if (slash != std::string_view::npos) filename = filename.substr(slash + 1);

  constexpr std::string_view kSuffix = ".wav";
  require(filename.size() >= kSuffix.size() &&
              filename.substr(filename.size() - kSuffix.size()) == kSuffix,
          "parse error in '", filename, "': missing .wav suffix");
  std::string_view stem = filename.substr(0, filename.size() - kSuffix.size());

  int codes[7];
  size_t field = 0;
  size_t pos = 0;
  while (true) {
    const size_t dash = stem.find('-', pos);
    const std::string_view part =
        dash == std::string_view::npos ? stem.substr(pos)
                                       : stem.substr(pos, dash - pos);
    require(field < 7, "parse error in '", filename,
            "': more than 7 fields");
    require(part.size() == 2 && part[0] >= '0' && part[0] <= '9' &&
                part[1] >= '0' && part[1] <= '9',
            "parse error in '", filename, "': field ", field + 1,
            " is not a two-digit code");
    codes[field++] = (part[0] - '0') * 10 + (part[1] - '0');
    if (dash == std::string_view::npos) break;
    pos = dash + 1;
  }
  require(field == 7, "parse error in '", filename, "': expected 7 fields, got ",
          field);

  auto in_range = [&](int idx, int lo, int hi, const char* name) {
    require(codes[idx] >= lo && codes[idx] <= hi, "parse error in '", filename,
            "': ", name, " code ", codes[idx], " out of range [", lo, ",", hi,
            "]");
  };
  in_range(0, 1, 3, "modality");
  in_range(1, 1, 2, "vocal channel");
  in_range(2, 1, 8, "emotion");
  in_range(3, 1, 2, "intensity");
  in_range(4, 1, 2, "statement");
  in_range(5, 1, 2, "repetition");
  in_range(6, 1, 24, "actor");

  RavdessMeta meta;
  meta.modality = static_cast<Modality>(codes[0] - 1);
  meta.vocal_channel = static_cast<VocalChannel>(codes[1] - 1);
  meta.emotion = static_cast<Emotion>(codes[2] - 1);
  meta.intensity = static_cast<Intensity>(codes[3] - 1);
  meta.statement = codes[4];
  meta.repetition = codes[5];
  meta.actor = codes[6];
  meta.sex = (codes[6] % 2 == 1) ? Sex::male : Sex::female;

  require(!(meta.emotion == Emotion::neutral && meta.intensity == Intensity::strong),
          "parse error in '", filename,
          "': intensity field is strong but neutral has no strong intensity");
  return meta;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

Manifest build_manifest(const std::string& root_dir) {
  namespace fs = std::filesystem;
  require(fs::exists(root_dir), root_dir, ": directory does not exist");
  require(fs::is_directory(root_dir), root_dir, ": not a directory");

  Manifest manifest;
  for (const auto& entry : fs::recursive_directory_iterator(root_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string path = entry.path().string();
    if (entry.path().extension() != ".wav") continue;
    try {
      ManifestEntry e;
      e.path = path;
      e.meta = parse_ravdess_name(entry.path().filename().string());
      manifest.entries.push_back(std::move(e));
    } catch (const Error& err) {
      manifest.warnings.emplace_back(err.what());
    }
  }
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.path < b.path;
            });
  return manifest;
}

std::array<size_t, 3> allocate_counts(size_t n,
                                      const std::array<double, 3>& ratios) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  require(std::abs(sum - 1.0) < 1e-9, "split ratios must sum to 1, got ", sum);
  for (double r : ratios) require(r >= 0.0, "split ratios must be nonnegative");

  std::array<size_t, 3> counts;
  std::array<double, 3> frac;
  size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = ratios[k] * static_cast<double>(n);
    counts[k] = static_cast<size_t>(std::floor(exact + 1e-9));
    frac[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  // Largest remainder; ties go to the lower split index.
  while (assigned < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (frac[k] > frac[best] + 1e-12) best = k;
    }
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  return counts;
}

namespace {

// Per-stratum split quotas.  Floors first, then the leftover entries are
// matched to the leftover per-split capacity, highest fractional part first.
// This keeps every stratum within one entry of its exact proportion while
// the global counts land exactly on allocate_counts(total).
std::vector<std::array<size_t, 3>> stratum_quotas(
    const std::vector<size_t>& sizes, const std::array<double, 3>& ratios) {
  size_t total = 0;
  for (size_t s : sizes) total += s;
  const std::array<size_t, 3> global = allocate_counts(total, ratios);

  std::vector<std::array<size_t, 3>> quota(sizes.size());
  std::vector<size_t> stratum_extra(sizes.size());
  std::array<size_t, 3> split_extra = global;

  struct Cand {
    double frac;
    size_t stratum;
    int split;
  };
  std::vector<Cand> cands;
  for (size_t s = 0; s < sizes.size(); ++s) {
    size_t floor_sum = 0;
    for (int k = 0; k < 3; ++k) {
      const double exact = ratios[k] * static_cast<double>(sizes[s]);
      quota[s][k] = static_cast<size_t>(std::floor(exact + 1e-9));
      floor_sum += quota[s][k];
      split_extra[k] -= std::min(split_extra[k], quota[s][k]);
      cands.push_back({exact - static_cast<double>(quota[s][k]), s, k});
    }
    stratum_extra[s] = sizes[s] - floor_sum;
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.frac != b.frac) return a.frac > b.frac;
    if (a.stratum != b.stratum) return a.stratum < b.stratum;
    return a.split < b.split;
  });
  for (const Cand& c : cands) {
    if (stratum_extra[c.stratum] == 0 || split_extra[c.split] == 0) continue;
    ++quota[c.stratum][c.split];
    --stratum_extra[c.stratum];
    --split_extra[c.split];
  }
  for (size_t s = 0; s < sizes.size(); ++s) {
    require(stratum_extra[s] == 0, "internal: split quota allocation failed");
  }
  return quota;
}

constexpr std::array<Split, 3> kSplitOrder = {Split::train, Split::val,
                                              Split::test};

}  // namespace

void split_manifest(std::vector<ManifestEntry>& entries,
                    const std::array<double, 3>& ratios, uint64_t seed,
                    std::vector<std::string>* warnings) {
  // Group indices by emotion, preserving the (sorted) manifest order.
  std::map<Emotion, std::vector<size_t>> strata;
  for (size_t i = 0; i < entries.size(); ++i) {
    strata[entries[i].meta.emotion].push_back(i);
  }

  std::vector<Emotion> labels;
  std::vector<size_t> sizes;
  for (const auto& [emotion, idx] : strata) {
    if (idx.size() < 3) {
      for (size_t i : idx) entries[i].split = Split::train;
      if (warnings) {
        warnings->push_back(cat("stratum '", emotion_name(emotion), "' has only ",
                                idx.size(),
                                " entries; assigning all of them to train"));
      }
      continue;
    }
    labels.push_back(emotion);
    sizes.push_back(idx.size());
  }

  const auto quotas = stratum_quotas(sizes, ratios);
  for (size_t s = 0; s < labels.size(); ++s) {
    std::vector<size_t>& idx = strata[labels[s]];
    Rng rng(mix_seed(seed, static_cast<uint64_t>(labels[s])));
    rng.shuffle(idx);
    size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      for (size_t c = 0; c < quotas[s][k]; ++c) {
        entries[idx[pos++]].split = kSplitOrder[static_cast<size_t>(k)];
      }
    }
  }
}

void split_manifest_by_actor(std::vector<ManifestEntry>& entries,
                             const std::array<double, 3>& ratios,
                             uint64_t seed) {
  std::vector<int> actors;
  for (const auto& e : entries) {
    if (std::find(actors.begin(), actors.end(), e.meta.actor) == actors.end()) {
      actors.push_back(e.meta.actor);
    }
  }
  std::sort(actors.begin(), actors.end());
  Rng rng(mix_seed(seed, 0x41435431ull));  // "ACT1"
  rng.shuffle(actors);

  const auto counts = allocate_counts(actors.size(), ratios);
  std::map<int, Split> assignment;
  size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    for (size_t c = 0; c < counts[static_cast<size_t>(k)]; ++c) {
      assignment[actors[pos++]] = kSplitOrder[static_cast<size_t>(k)];
    }
  }
  for (auto& e : entries) e.split = assignment[e.meta.actor];
}

// ---------------------------------------------------------------------------
// Manifest CSV
// ---------------------------------------------------------------------------

static constexpr std::string_view kManifestHeader =
    "path,modality,channel,emotion,intensity,statement,repetition,actor,sex,"
    "split";

void write_manifest_csv(const std::string& path,
                        const std::vector<ManifestEntry>& entries) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& e : entries) {
    out += io::csv_field(e.path);
    out += ',';
    out += modality_name(e.meta.modality);
    out += ',';
    out += channel_name(e.meta.vocal_channel);
    out += ',';
    out += emotion_name(e.meta.emotion);
    out += ',';
    out += intensity_name(e.meta.intensity);
    out += ',';
    out += std::to_string(e.meta.statement);
    out += ',';
    out += std::to_string(e.meta.repetition);
    out += ',';
    out += std::to_string(e.meta.actor);
    out += ',';
    out += sex_name(e.meta.sex);
    out += ',';
    out += split_name(e.split);
    out += '\n';
  }
  io::write_text(path, out);
}

std::vector<ManifestEntry> read_manifest_csv(const std::string& path) {
  const auto lines = io::split_lines(io::read_text(path));
  require(!lines.empty(), path, ": empty manifest");
  require(lines[0] == kManifestHeader, path,
          ": unexpected manifest header: ", lines[0]);

  std::vector<ManifestEntry> entries;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = io::parse_csv_line(lines[i]);
    require(f.size() == 10, path, ": line ", i + 1, ": expected 10 fields, got ",
            f.size());
    ManifestEntry e;
    e.path = f[0];
    if (f[1] == "full-AV") e.meta.modality = Modality::full_av;
    else if (f[1] == "video-only") e.meta.modality = Modality::video_only;
    else if (f[1] == "audio-only") e.meta.modality = Modality::audio_only;
    else fail(path, ": line ", i + 1, ": unknown modality ", f[1]);
    if (f[2] == "speech") e.meta.vocal_channel = VocalChannel::speech;
    else if (f[2] == "song") e.meta.vocal_channel = VocalChannel::song;
    else fail(path, ": line ", i + 1, ": unknown channel ", f[2]);
    e.meta.emotion = emotion_from_name(f[3]);
    if (f[4] == "normal") e.meta.intensity = Intensity::normal;
    else if (f[4] == "strong") e.meta.intensity = Intensity::strong;
    else fail(path, ": line ", i + 1, ": unknown intensity ", f[4]);
    e.meta.statement = std::stoi(f[5]);
    e.meta.repetition = std::stoi(f[6]);
    e.meta.actor = std::stoi(f[7]);
    if (f[8] == "male") e.meta.sex = Sex::male;
    else if (f[8] == "female") e.meta.sex = Sex::female;
    else fail(path, ": line ", i + 1, ": unknown sex ", f[8]);
    e.split = split_from_name(f[9]);
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace ser::audio
