// include/ser/config.hpp

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

#include <string>

#include "ser/augment.hpp"
#include "ser/features.hpp"
#include "ser/nn/model.hpp"

namespace ser {

/// One flat configuration for every command, stored as JSON with one
/// section per area.  Loading rejects unknown keys and reports every
/// problem at once.  The global seed feeds the split, augmentation, model
/// and bootstrap streams unless a section pins its own seed.
struct EngineConfig {
  struct Paths {
    std::string data_root;
    std::string work_dir = ".";
  };
  struct AudioCfg {
    int sample_rate = 22050;
    double duration_s = 3.0;
  };
  struct MetricsCfg {
    size_t bootstrap_iterations = 1000;
    double alpha = 0.05;
  };
  struct StagesCfg {
    std::string bindings_file;
    double timeout_s = 60.0;
  };

  Paths paths;
  AudioCfg audio;
  augment::AugmentPolicy augment;
  feat::FrameConfig frame;
  feat::MelConfig mel;
  nn::ModelConfig model;
  MetricsCfg metrics;
  StagesCfg stages;
  uint64_t seed = 42;

  size_t canonical_len() const;
  feat::FeatureExtractor extractor() const;

  /// Replaces the global seed and re-derives every section seed, including
  /// ones pinned in the file.
  void override_seed(uint64_t s);

  /// Parses the JSON config file; throws one Error enumerating every
  /// unknown key, type error and invariant violation found.
  static EngineConfig load_file(const std::string& path);
  static EngineConfig defaults();

  std::string to_json_string() const;
};

}  // namespace ser
