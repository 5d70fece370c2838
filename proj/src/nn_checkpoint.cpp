// src/nn_checkpoint.cpp

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

#include "ser/io.hpp"
#include "ser/nn/checkpoint.hpp"
#include "ser/nn/model_json.hpp"

namespace ser::nn {

using nlohmann::json;

json model_config_to_json(const ModelConfig& cfg) {
  return json{{"conv_filters", cfg.conv_filters},
              {"kernel_size", cfg.kernel_size},
              {"pool_size", cfg.pool_size},
              {"conv_dropout", cfg.conv_dropout},
              {"dense_dropout", cfg.dense_dropout},
              {"dense_units", cfg.dense_units},
              {"n_classes", cfg.n_classes},
              {"input_len", cfg.input_len},
              {"learning_rate", cfg.learning_rate},
              {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"adam_beta1", cfg.adam_beta1},
              {"adam_beta2", cfg.adam_beta2},
              {"adam_eps", cfg.adam_eps},
              {"bn_momentum", cfg.bn_momentum},
              {"bn_eps", cfg.bn_eps},
              {"seed", cfg.seed},
              {"stop_at_train_loss", cfg.stop_at_train_loss}};
}

void model_config_from_json(const json& j, ModelConfig& cfg,
                            std::vector<std::string>& errors) {
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "conv_filters") cfg.conv_filters = value.get<std::vector<size_t>>();
      else if (key == "kernel_size") cfg.kernel_size = value.get<size_t>();
      else if (key == "pool_size") cfg.pool_size = value.get<size_t>();
      else if (key == "conv_dropout") cfg.conv_dropout = value.get<double>();
      else if (key == "dense_dropout") cfg.dense_dropout = value.get<double>();
      else if (key == "dense_units") cfg.dense_units = value.get<size_t>();
      else if (key == "n_classes") cfg.n_classes = value.get<size_t>();
      else if (key == "input_len") cfg.input_len = value.get<size_t>();
      else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
      else if (key == "epochs") cfg.epochs = value.get<size_t>();
      else if (key == "batch_size") cfg.batch_size = value.get<size_t>();
      else if (key == "adam_beta1") cfg.adam_beta1 = value.get<double>();
      else if (key == "adam_beta2") cfg.adam_beta2 = value.get<double>();
      else if (key == "adam_eps") cfg.adam_eps = value.get<double>();
      else if (key == "bn_momentum") cfg.bn_momentum = value.get<double>();
      else if (key == "bn_eps") cfg.bn_eps = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<uint64_t>();
      else if (key == "stop_at_train_loss") cfg.stop_at_train_loss = value.get<double>();
      else errors.push_back("model: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      errors.push_back("model." + key + ": " + e.what());
    }
  }
}

namespace {

constexpr char kMagic[4] = {'S', 'E', 'R', 'M'};
constexpr uint16_t kVersion = 1;

template <class F>
void for_each_block(Model<float>& model, AdamState<float>& adam, F&& fn) {
  auto params = model.params();
  for (auto& p : params) fn(p.name, *p.w);
  for (auto& p : model.running_stats()) fn(p.name, *p.w);
  for (size_t i = 0; i < params.size(); ++i) {
    fn(params[i].name + ".adam_m", adam.m[i]);
    fn(params[i].name + ".adam_v", adam.v[i]);
  }
}

}  // namespace

void save_checkpoint(const std::string& path, Model<float>& model,
                     const AdamState<float>& adam,
                     const feat::ScalerParams& scaler,
                     const std::vector<std::string>& class_names) {
  AdamState<float>& adam_mut = const_cast<AdamState<float>&>(adam);
  json blocks = json::array();
  size_t total = 0;
  for_each_block(model, adam_mut, [&](const std::string& name,
                                      std::vector<float>& data) {
    blocks.push_back({{"name", name}, {"count", data.size()}});
    total += data.size();
  });

  json header = {{"config", model_config_to_json(model.config)},
                 {"scaler", {{"mean", scaler.mean}, {"std", scaler.std}}},
                 {"class_names", class_names},
                 {"adam_step", adam.step},
                 {"blocks", blocks}};
  const std::string header_str = header.dump();

  std::string out;
  out.reserve(10 + header_str.size() + total * 4);
  out.append(kMagic, 4);
  const uint16_t ver = kVersion;
  out.push_back(static_cast<char>(ver & 0xff));
  out.push_back(static_cast<char>(ver >> 8));
  const uint32_t hlen = static_cast<uint32_t>(header_str.size());
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((hlen >> (8 * i)) & 0xff));
  }
  out += header_str;
  for_each_block(model, adam_mut, [&](const std::string&,
                                      std::vector<float>& data) {
    const size_t off = out.size();
    out.resize(off + data.size() * 4);
    std::memcpy(out.data() + off, data.data(), data.size() * 4);
  });
  io::write_text(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string in = io::read_text(path);
  require(in.size() >= 10, path, ": checkpoint truncated");
  require(std::memcmp(in.data(), kMagic, 4) == 0, path,
          ": not a checkpoint (bad magic)");
  const uint16_t version = static_cast<uint16_t>(
      static_cast<uint8_t>(in[4]) | static_cast<uint8_t>(in[5]) << 8);
  require(version == kVersion, path, ": unsupported checkpoint version ",
          version);
  uint32_t hlen = 0;
  for (int i = 0; i < 4; ++i) {
    hlen |= static_cast<uint32_t>(static_cast<uint8_t>(in[6 + i])) << (8 * i);
  }
  require(10 + static_cast<size_t>(hlen) <= in.size(), path,
          ": checkpoint truncated in header");

  json header;
  try {
    header = json::parse(in.substr(10, hlen));
  } catch (const json::exception& e) {
    fail(path, ": corrupt checkpoint header: ", e.what());
  }

  Checkpoint ck;
  std::vector<std::string> errors;
  model_config_from_json(header.at("config"), ck.model.config, errors);
  require(errors.empty(), path, ": bad checkpoint config: ",
          errors.empty() ? "" : errors.front());
  ck.model = Model<float>::build(ck.model.config);
  auto params = ck.model.params();
  ck.adam = AdamState<float>::for_params(params);
  ck.adam.step = header.at("adam_step").get<int64_t>();
  ck.scaler.mean = header.at("scaler").at("mean").get<std::vector<double>>();
  ck.scaler.std = header.at("scaler").at("std").get<std::vector<double>>();
  ck.class_names = header.at("class_names").get<std::vector<std::string>>();

  size_t off = 10 + hlen;
  const auto& blocks = header.at("blocks");
  size_t block_idx = 0;
  for_each_block(ck.model, ck.adam, [&](const std::string& name,
                                        std::vector<float>& data) {
    require(block_idx < blocks.size(), path, ": checkpoint missing block ",
            name);
    const auto& blk = blocks[block_idx++];
    require(blk.at("name").get<std::string>() == name, path,
            ": checkpoint block order mismatch at ", name);
    const size_t count = blk.at("count").get<size_t>();
    require(count == data.size(), path, ": block ", name, " has ", count,
            " values, expected ", data.size());
    require(off + count * 4 <= in.size(), path,
            ": checkpoint truncated in block ", name);
    std::memcpy(data.data(), in.data() + off, count * 4);
    off += count * 4;
  });
  require(off == in.size(), path, ": trailing bytes after parameter blocks");
  return ck;
}

}  // namespace ser::nn
