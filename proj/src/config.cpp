// src/config.cpp

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

#include "ser/config.hpp"

#include <cmath>

#include "json.hpp"
#include "ser/io.hpp"
#include "ser/nn/model_json.hpp"
#include "ser/rng.hpp"

namespace ser {

using nlohmann::json;

namespace {

// Section seeds derived from the global seed.
constexpr uint64_t kAugmentStream = 1;
constexpr uint64_t kModelStream = 2;

template <class T>
void read_key(const json& section, const std::string& prefix,
              const std::string& key, T& out,
              std::vector<std::string>& errors) {
  if (!section.contains(key)) return;
  try {
    out = section.at(key).get<T>();
  } catch (const json::exception& e) {
    errors.push_back(prefix + "." + key + ": " + e.what());
  }
}

void check_known(const json& section, const std::string& prefix,
                 std::initializer_list<const char*> known,
                 std::vector<std::string>& errors) {
  for (const auto& [key, value] : section.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) errors.push_back(prefix + ": unknown key '" + key + "'");
  }
}

}  // namespace

size_t EngineConfig::canonical_len() const {
  return static_cast<size_t>(
      std::llround(audio.duration_s * static_cast<double>(audio.sample_rate)));
}

feat::FeatureExtractor EngineConfig::extractor() const {
  return feat::FeatureExtractor(frame, mel, audio.sample_rate, canonical_len());
}

void EngineConfig::override_seed(uint64_t s) {
  seed = s;
  augment.seed = mix_seed(s, kAugmentStream);
  model.seed = mix_seed(s, kModelStream);
}

EngineConfig EngineConfig::defaults() {
  EngineConfig cfg;
  cfg.augment.seed = mix_seed(cfg.seed, kAugmentStream);
  cfg.model.seed = mix_seed(cfg.seed, kModelStream);
  return cfg;
}

EngineConfig EngineConfig::load_file(const std::string& path) {
  json root;
  try {
    root = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    fail(path, ": not valid JSON: ", e.what());
  }

  EngineConfig cfg;
  std::vector<std::string> errors;
  check_known(root, "config",
              {"paths", "audio", "augment", "features", "model", "metrics",
               "stages", "seed"},
              errors);

  read_key(root, "config", "seed", cfg.seed, errors);
  bool augment_seed_pinned = false;
  bool model_seed_pinned = false;

  if (root.contains("paths")) {
    const json& s = root["paths"];
    check_known(s, "paths", {"data_root", "work_dir"}, errors);
    read_key(s, "paths", "data_root", cfg.paths.data_root, errors);
    read_key(s, "paths", "work_dir", cfg.paths.work_dir, errors);
  }
  if (root.contains("audio")) {
    const json& s = root["audio"];
    check_known(s, "audio", {"sample_rate", "duration_s"}, errors);
    read_key(s, "audio", "sample_rate", cfg.audio.sample_rate, errors);
    read_key(s, "audio", "duration_s", cfg.audio.duration_s, errors);
  }
  if (root.contains("augment")) {
    const json& s = root["augment"];
    check_known(s, "augment",
                {"noise_factor", "pitch_semitones", "stretch_rate",
                 "shift_fraction", "seed", "variants"},
                errors);
    read_key(s, "augment", "noise_factor", cfg.augment.noise_factor, errors);
    read_key(s, "augment", "pitch_semitones", cfg.augment.pitch_semitones,
             errors);
    read_key(s, "augment", "stretch_rate", cfg.augment.stretch_rate, errors);
    read_key(s, "augment", "shift_fraction", cfg.augment.shift_fraction,
             errors);
    read_key(s, "augment", "variants", cfg.augment.variants, errors);
    if (s.contains("seed")) {
      augment_seed_pinned = true;
      read_key(s, "augment", "seed", cfg.augment.seed, errors);
    }
  }
  if (root.contains("features")) {
    const json& s = root["features"];
    check_known(s, "features",
                {"frame_len", "hop", "window", "n_mels", "n_mfcc", "fmin",
                 "fmax"},
                errors);
    read_key(s, "features", "frame_len", cfg.frame.frame_len, errors);
    read_key(s, "features", "hop", cfg.frame.hop, errors);
    if (s.contains("window")) {
      std::string w;
      read_key(s, "features", "window", w, errors);
      if (w == "hann") cfg.frame.window = feat::FrameConfig::Window::hann;
      else if (w == "rectangular") cfg.frame.window = feat::FrameConfig::Window::rectangular;
      else errors.push_back("features.window: expected hann or rectangular");
    }
    read_key(s, "features", "n_mels", cfg.mel.n_mels, errors);
    read_key(s, "features", "n_mfcc", cfg.mel.n_mfcc, errors);
    read_key(s, "features", "fmin", cfg.mel.fmin, errors);
    read_key(s, "features", "fmax", cfg.mel.fmax, errors);
    cfg.mel.n_fft = cfg.frame.frame_len;
  }
  if (root.contains("model")) {
    nn::model_config_from_json(root["model"], cfg.model, errors);
    model_seed_pinned = root["model"].contains("seed");
  }
  if (root.contains("metrics")) {
    const json& s = root["metrics"];
    check_known(s, "metrics", {"bootstrap_iterations", "alpha"}, errors);
    read_key(s, "metrics", "bootstrap_iterations",
             cfg.metrics.bootstrap_iterations, errors);
    read_key(s, "metrics", "alpha", cfg.metrics.alpha, errors);
  }
  if (root.contains("stages")) {
    const json& s = root["stages"];
    check_known(s, "stages", {"bindings_file", "timeout_s"}, errors);
    read_key(s, "stages", "bindings_file", cfg.stages.bindings_file, errors);
    read_key(s, "stages", "timeout_s", cfg.stages.timeout_s, errors);
  }

  if (!augment_seed_pinned) cfg.augment.seed = mix_seed(cfg.seed, kAugmentStream);
  if (!model_seed_pinned) cfg.model.seed = mix_seed(cfg.seed, kModelStream);

  // Cross-field invariants, collected rather than thrown one at a time.
  if (cfg.audio.sample_rate <= 0) errors.push_back("audio.sample_rate: must be positive");
  if (cfg.audio.duration_s <= 0) errors.push_back("audio.duration_s: must be positive");
  if (cfg.frame.hop == 0 || cfg.frame.hop > cfg.frame.frame_len) {
    errors.push_back("features: need 0 < hop <= frame_len");
  }
  if (cfg.mel.n_mfcc > cfg.mel.n_mels) {
    errors.push_back("features: n_mfcc must be <= n_mels");
  }
  if ((cfg.frame.frame_len & (cfg.frame.frame_len - 1)) != 0) {
    errors.push_back("features.frame_len: must be a power of two");
  }
  try {
    cfg.model.validate();
  } catch (const Error& e) {
    errors.push_back(e.what());
  }
  try {
    cfg.augment.validate();
  } catch (const Error& e) {
    errors.push_back(e.what());
  }

  if (!errors.empty()) {
    std::string all = path + ": invalid config:";
    for (const auto& e : errors) {
      all += "\n  - ";
      all += e;
    }
    fail(all);
  }
  return cfg;
}

std::string EngineConfig::to_json_string() const {
  const char* window_name =
      frame.window == feat::FrameConfig::Window::hann ? "hann" : "rectangular";
  json root = {
      {"paths", {{"data_root", paths.data_root}, {"work_dir", paths.work_dir}}},
      {"audio",
       {{"sample_rate", audio.sample_rate}, {"duration_s", audio.duration_s}}},
      {"augment",
       {{"noise_factor", augment.noise_factor},
        {"pitch_semitones", augment.pitch_semitones},
        {"stretch_rate", augment.stretch_rate},
        {"shift_fraction", augment.shift_fraction},
        {"seed", augment.seed},
        {"variants", augment.variants}}},
      {"features",
       {{"frame_len", frame.frame_len},
        {"hop", frame.hop},
        {"window", window_name},
        {"n_mels", mel.n_mels},
        {"n_mfcc", mel.n_mfcc},
        {"fmin", mel.fmin},
        {"fmax", mel.fmax}}},
      {"model", nn::model_config_to_json(model)},
      {"metrics",
       {{"bootstrap_iterations", metrics.bootstrap_iterations},
        {"alpha", metrics.alpha}}},
      {"stages",
       {{"bindings_file", stages.bindings_file},
        {"timeout_s", stages.timeout_s}}},
      {"seed", seed}};
  return root.dump(2) + "\n";
}

}  // namespace ser
