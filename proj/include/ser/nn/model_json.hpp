// include/ser/nn/model_json.hpp

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

#include "json.hpp"
#include "ser/nn/model.hpp"

namespace ser::nn {

nlohmann::json model_config_to_json(const ModelConfig& cfg);

/// Applies the keys present in `j` onto `cfg`; unknown keys collect an
/// error string per key into `errors`.
void model_config_from_json(const nlohmann::json& j, ModelConfig& cfg,
                            std::vector<std::string>& errors);

}  // namespace ser::nn
