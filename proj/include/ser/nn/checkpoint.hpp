// include/ser/nn/checkpoint.hpp

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
#include <vector>

#include "ser/features.hpp"
#include "ser/nn/adam.hpp"
#include "ser/nn/model.hpp"

namespace ser::nn {

/// A trained model with everything needed to run or resume it: config,
/// parameters, batch-norm running statistics, optimizer moments, the feature
/// scaler and the class-name order.
struct Checkpoint {
  Model<float> model;
  AdamState<float> adam;
  feat::ScalerParams scaler;
  std::vector<std::string> class_names;
};

/// File layout: magic "SERM", u16 version, u32 JSON header length, JSON
/// header (config, scaler, class names, block table, adam step), then raw
/// little-endian f32 blocks in the order declared by the header.
void save_checkpoint(const std::string& path, Model<float>& model,
                     const AdamState<float>& adam,
                     const feat::ScalerParams& scaler,
                     const std::vector<std::string>& class_names);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace ser::nn
