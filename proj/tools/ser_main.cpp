// tools/ser_main.cpp

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

#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <span>

#include "CLI11.hpp"
#include "json.hpp"
#include "ser/augment.hpp"
#include "ser/config.hpp"
#include "ser/io.hpp"
#include "ser/metrics.hpp"
#include "ser/nn/checkpoint.hpp"
#include "ser/nn/train.hpp"
#include "ser/pipeline.hpp"
#include "ser/textprep.hpp"

using namespace ser;
using nlohmann::json;

namespace {

// --------------------------------------------------------------------------
// Shared plumbing
// --------------------------------------------------------------------------

struct GlobalOpts {
  std::string config_path;
  int64_t seed = -1;  // -1: not given
  int jobs = 0;
};

EngineConfig resolve_config(const GlobalOpts& opts) {
  EngineConfig cfg = opts.config_path.empty()
                         ? EngineConfig::defaults()
                         : EngineConfig::load_file(opts.config_path);

  bool file_has_seed = false;
  if (!opts.config_path.empty()) {
    const json j = json::parse(io::read_text(opts.config_path));
    file_has_seed = j.contains("seed");
  }
  if (const char* env = std::getenv("SER_ENGINE_SEED");
      env && !file_has_seed && opts.seed < 0) {
    try {
      cfg.override_seed(std::stoull(env));
    } catch (...) {
      fail("SER_ENGINE_SEED is not an integer: ", env);
    }
  }
  if (opts.seed >= 0) cfg.override_seed(static_cast<uint64_t>(opts.seed));
  if (opts.jobs > 0) omp_set_num_threads(opts.jobs);
  return cfg;
}

std::array<double, 3> parse_ratios(const std::string& text) {
  std::array<double, 3> ratios;
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = text.find(',', start);
    fields.push_back(text.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  require(fields.size() == 3, "--ratios expects three comma-separated values");
  for (int i = 0; i < 3; ++i) ratios[static_cast<size_t>(i)] = std::stod(fields[static_cast<size_t>(i)]);
  return ratios;
}

std::string with_split_suffix(const std::string& path, const char* split) {
  const std::filesystem::path p(path);
  const std::string ext = p.extension().string();
  const std::string stem = (p.parent_path() / p.stem()).string();
  return stem + "." + split + ext;
}

std::string detected_emotion_name(size_t index) {
  return index < audio::kNumEmotions
             ? std::string(audio::kEmotionNames[index])
             : "class" + std::to_string(index);
}

// Canonicalizes one file to the engine rate and duration.
audio::AudioClip load_canonical(const std::string& path,
                                const EngineConfig& cfg) {
  return audio::fix_duration(
      audio::resample(audio::decode_wav(path), cfg.audio.sample_rate),
      cfg.audio.duration_s);
}

std::vector<double> features_of_wav(const std::string& path,
                                    const EngineConfig& cfg,
                                    const feat::FeatureExtractor& fx) {
  return fx.extract(load_canonical(path, cfg));
}

// --------------------------------------------------------------------------
// prepare
// --------------------------------------------------------------------------

int cmd_prepare(const GlobalOpts& g, const std::string& data,
                const std::string& out, bool actor_disjoint,
                const std::string& ratios_text) {
  const EngineConfig cfg = resolve_config(g);
  const auto ratios = parse_ratios(ratios_text);

  audio::Manifest manifest = audio::build_manifest(data);
  if (actor_disjoint) {
    audio::split_manifest_by_actor(manifest.entries, ratios,
                                   mix_seed(cfg.seed, 3));
  } else {
    audio::split_manifest(manifest.entries, ratios, mix_seed(cfg.seed, 3),
                          &manifest.warnings);
  }
  audio::write_manifest_csv(out, manifest.entries);

  size_t train = 0, val = 0, test = 0;
  for (const auto& e : manifest.entries) {
    if (e.split == audio::Split::train) ++train;
    else if (e.split == audio::Split::val) ++val;
    else if (e.split == audio::Split::test) ++test;
  }
  for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << json{{"manifest", out},
                    {"entries", manifest.entries.size()},
                    {"train", train},
                    {"val", val},
                    {"test", test},
                    {"warnings", manifest.warnings.size()}}
                   .dump(2)
            << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// featurize
// --------------------------------------------------------------------------

int cmd_featurize(const GlobalOpts& g, const std::string& manifest_path,
                  const std::string& out, bool augment_train,
                  const std::string& csv_path) {
  const EngineConfig cfg = resolve_config(g);
  const auto entries = audio::read_manifest_csv(manifest_path);
  require(!entries.empty(), manifest_path, ": manifest has no entries");
  const feat::FeatureExtractor fx = cfg.extractor();

  // Row layout: entry order, each train entry contributing 1 + variants
  // rows when augmenting.  Fixed up front so the parallel fill is ordered.
  const size_t variants = cfg.augment.variants.size();
  std::vector<size_t> row_of(entries.size() + 1, 0);
  for (size_t i = 0; i < entries.size(); ++i) {
    const bool expand = augment_train && entries[i].split == audio::Split::train;
    row_of[i + 1] = row_of[i] + (expand ? 1 + variants : 1);
  }
  const size_t total_rows = row_of.back();

  feat::FeatureMatrix all;
  all.rows = total_rows;
  all.cols = fx.feature_len();
  all.values.resize(all.rows * all.cols);
  all.labels.resize(all.rows);
  std::vector<audio::Split> row_split(total_rows);

#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < entries.size(); ++i) {
    const auto& entry = entries[i];
    const audio::AudioClip canonical = load_canonical(entry.path, cfg);
    std::vector<audio::AudioClip> clips;
    if (augment_train && entry.split == audio::Split::train) {
      augment::AugmentPolicy policy = cfg.augment;
      policy.seed = mix_seed(cfg.augment.seed, i);
      clips = augment::expand(canonical, policy);
      for (auto& c : clips) c = audio::fix_duration(c, cfg.audio.duration_s);
    } else {
      clips.push_back(canonical);
    }
    for (size_t v = 0; v < clips.size(); ++v) {
      const std::vector<double> row = fx.extract(clips[v]);
      float* dst = all.row(row_of[i] + v);
      for (size_t c = 0; c < row.size(); ++c) dst[c] = static_cast<float>(row[c]);
      all.labels[row_of[i] + v] =
          static_cast<uint16_t>(entry.meta.emotion);
      row_split[row_of[i] + v] = entry.split;
    }
  }

  json summary = {{"rows", total_rows}, {"cols", all.cols}};
  for (const auto& [split, name] :
       {std::pair{audio::Split::train, "train"},
        std::pair{audio::Split::val, "val"},
        std::pair{audio::Split::test, "test"}}) {
    feat::FeatureMatrix part;
    part.cols = all.cols;
    for (size_t r = 0; r < total_rows; ++r) {
      if (row_split[r] != split) continue;
      ++part.rows;
      part.values.insert(part.values.end(), all.row(r), all.row(r) + all.cols);
      part.labels.push_back(all.labels[r]);
    }
    const std::string path = with_split_suffix(out, name);
    feat::write_features(path, part);
    summary[name] = {{"path", path}, {"rows", part.rows}};
  }
  if (!csv_path.empty()) {
    feat::write_features_csv(csv_path, all);
    summary["csv"] = csv_path;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// train
// --------------------------------------------------------------------------

json history_json(const nn::TrainHistory& history) {
  json epochs = json::array();
  for (size_t e = 0; e < history.epochs.size(); ++e) {
    const auto& s = history.epochs[e];
    epochs.push_back({{"epoch", e + 1},
                      {"train_loss", s.train_loss},
                      {"train_acc", s.train_acc},
                      {"val_loss", s.val_loss},
                      {"val_acc", s.val_acc}});
  }
  return json{{"best_epoch", history.best_epoch}, {"epochs", epochs}};
}

int cmd_train(const GlobalOpts& g, const std::string& features_base,
              const std::string& out) {
  EngineConfig cfg = resolve_config(g);
  const std::string train_path = with_split_suffix(features_base, "train");
  const std::string val_path = with_split_suffix(features_base, "val");
  const feat::FeatureMatrix train_raw = feat::read_features(train_path);
  const feat::FeatureMatrix val_raw =
      std::filesystem::exists(val_path) ? feat::read_features(val_path)
                                        : feat::FeatureMatrix{};
  require(train_raw.rows > 0, train_path, ": no training rows");
  require(cfg.model.input_len == train_raw.cols,
          "model.input_len is ", cfg.model.input_len, " but the feature file has ",
          train_raw.cols, " columns; set model.input_len accordingly");

  const feat::ScalerParams scaler = feat::fit_scaler(train_raw);
  const feat::FeatureMatrix train_scaled = feat::apply_scaler(train_raw, scaler);
  const feat::FeatureMatrix val_scaled =
      val_raw.rows > 0 ? feat::apply_scaler(val_raw, scaler)
                       : feat::FeatureMatrix{};

  auto model = nn::Model<float>::build(cfg.model);
  const nn::TrainHistory history = nn::train(model, train_scaled, val_scaled);

  auto params = model.params();
  nn::AdamState<float> adam = nn::AdamState<float>::for_params(params);
  std::vector<std::string> class_names;
  for (size_t c = 0; c < cfg.model.n_classes; ++c) {
    class_names.push_back(detected_emotion_name(c));
  }
  nn::save_checkpoint(out, model, adam, scaler, class_names);
  io::write_text(out + ".history.json", history_json(history).dump(2) + "\n");

  const auto& last = history.epochs.back();
  std::cout << json{{"checkpoint", out},
                    {"history", out + ".history.json"},
                    {"epochs_run", history.epochs.size()},
                    {"best_epoch", history.best_epoch},
                    {"final_train_loss", last.train_loss},
                    {"final_train_acc", last.train_acc},
                    {"best_val_acc",
                     history.best_epoch > 0
                         ? history.epochs[history.best_epoch - 1].val_acc
                         : 0.0}}
                   .dump(2)
            << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// evaluate
// --------------------------------------------------------------------------

json classification_json(const metrics::PrfReport& report,
                         std::span<const std::string> class_names) {
  json classes = json::array();
  for (size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    classes.push_back({{"emotion", class_names[c]},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support}});
  }
  return json{{"classes", classes},
              {"macro",
               {{"precision", report.macro_precision},
                {"recall", report.macro_recall},
                {"f1", report.macro_f1}}},
              {"accuracy", report.accuracy}};
}

std::vector<uint16_t> batched_predictions(nn::Model<float>& model,
                                          const feat::FeatureMatrix& scaled) {
  std::vector<uint16_t> pred(scaled.rows);
  const size_t batch = model.config.batch_size;
  for (size_t first = 0; first < scaled.rows; first += batch) {
    const size_t count = std::min(batch, scaled.rows - first);
    nn::Tensor<float> x(count, scaled.cols, 1);
    for (size_t r = 0; r < count; ++r) {
      const float* src = scaled.row(first + r);
      std::copy(src, src + scaled.cols, x.v.begin() + r * scaled.cols);
    }
    const auto probs = model.forward(x, nn::Mode::infer);
    for (size_t r = 0; r < count; ++r) {
      size_t best = 0;
      for (size_t c = 1; c < model.config.n_classes; ++c) {
        if (probs.at(r, 0, c) > probs.at(r, 0, best)) best = c;
      }
      pred[first + r] = static_cast<uint16_t>(best);
    }
  }
  return pred;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& features,
                 const std::string& checkpoint, const std::string& out) {
  resolve_config(g);
  const std::string path = std::filesystem::exists(features)
                               ? features
                               : with_split_suffix(features, "test");
  const feat::FeatureMatrix raw = feat::read_features(path);
  require(raw.rows > 0, path, ": no rows to evaluate");

  nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
  require(ck.model.config.input_len == raw.cols, "checkpoint expects ",
          ck.model.config.input_len, " features, file has ", raw.cols);
  const feat::FeatureMatrix scaled = feat::apply_scaler(raw, ck.scaler);
  const auto pred = batched_predictions(ck.model, scaled);

  const auto matrix =
      metrics::confusion(raw.labels, pred, ck.model.config.n_classes);
  const auto report = metrics::prf_report(matrix);

  const json doc = {{"classification", classification_json(report, ck.class_names)},
                    {"translation", nullptr},
                    {"evaluated", path}};
  io::write_text(out, doc.dump(2) + "\n");
  std::cout << doc.dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// predict / spectrogram
// --------------------------------------------------------------------------

int cmd_predict(const GlobalOpts& g, const std::string& wav,
                const std::string& checkpoint) {
  const EngineConfig cfg = resolve_config(g);
  nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
  const feat::FeatureExtractor fx = cfg.extractor();
  require(fx.feature_len() == ck.model.config.input_len,
          "feature config produces ", fx.feature_len(),
          " values but the checkpoint expects ", ck.model.config.input_len);

  const std::vector<double> features = features_of_wav(wav, cfg, fx);
  const std::vector<double> scaled = feat::scale_row(features, ck.scaler);
  std::vector<float> row(scaled.begin(), scaled.end());
  const nn::Prediction pred = nn::predict(ck.model, row);

  json probabilities;
  for (size_t c = 0; c < pred.probabilities.size(); ++c) {
    const std::string name =
        c < ck.class_names.size() ? ck.class_names[c] : detected_emotion_name(c);
    probabilities[name] = pred.probabilities[c];
  }
  std::cout << json{{"wav", wav},
                    {"emotion", pred.class_index < ck.class_names.size()
                                    ? ck.class_names[pred.class_index]
                                    : pred.label},
                    {"confidence", pred.probabilities[pred.class_index]},
                    {"probabilities", probabilities}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_spectrogram(const GlobalOpts& g, const std::string& wav,
                    const std::string& out) {
  const EngineConfig cfg = resolve_config(g);
  const audio::AudioClip clip =
      audio::resample(audio::decode_wav(wav), cfg.audio.sample_rate);
  const feat::Mat spec = feat::log_power_spectrogram(clip, cfg.frame);
  feat::write_spectrogram_csv(out, spec, clip.sample_rate, cfg.frame);
  std::cout << json{{"wav", wav},
                    {"out", out},
                    {"sidecar", out + ".json"},
                    {"frames", spec.rows},
                    {"bins", spec.cols}}
                   .dump(2)
            << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// bleu / textprep / corpus-stats
// --------------------------------------------------------------------------

int cmd_bleu(const GlobalOpts& g, const std::string& tsv,
             const std::string& out, size_t bootstrap) {
  const EngineConfig cfg = resolve_config(g);
  const auto lines = io::split_lines(io::read_text(tsv));
  std::vector<std::string> refs, hyps;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = io::split_tsv_line(lines[i]);
    require(fields.size() == 3, tsv, ": line ", i + 1,
            ": expected source<TAB>reference<TAB>hypothesis");
    refs.push_back(fields[1]);
    hyps.push_back(fields[2]);
  }
  metrics::BleuReport report = metrics::corpus_bleu(hyps, refs);
  if (bootstrap > 0 && hyps.size() >= 2) {
    const auto [lo, hi] = metrics::bootstrap_ci(
        hyps, refs, bootstrap, cfg.metrics.alpha, mix_seed(cfg.seed, 4));
    report.has_ci = true;
    report.ci_low = lo;
    report.ci_high = hi;
  }

  json translation = {{"bleu", report.bleu},
                      {"ci", report.has_ci
                                 ? json::array({report.ci_low, report.ci_high})
                                 : json(nullptr)},
                      {"ngram_precisions", report.ngram_precisions},
                      {"brevity_penalty", report.brevity_penalty},
                      {"bootstrap_iterations", bootstrap},
                      {"pairs", hyps.size()},
                      // Reserved fields: embedding-based scoring and human
                      // evaluation happen outside this engine.
                      {"bertscore_f1", nullptr},
                      {"human_score", nullptr}};
  const json doc = {{"classification", nullptr}, {"translation", translation}};
  if (!out.empty()) io::write_text(out, doc.dump(2) + "\n");
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_textprep(const GlobalOpts& g, const std::string& in,
                 const std::string& out, const std::string& lang_name,
                 size_t max_tokens, const std::string& split_dir,
                 const std::string& ratios_text) {
  const EngineConfig cfg = resolve_config(g);
  const text::Lang lang = text::lang_from_name(lang_name);
  auto records = text::read_parallel_tsv(in);
  for (auto& r : records) {
    std::string& column =
        lang == text::Lang::english ? r.source_en : r.target_ar;
    column = text::truncate_tokens(
        text::filter_script(text::normalize_english(column), lang), max_tokens);
  }
  text::write_parallel_tsv(out, records);

  json summary = {{"in", in}, {"out", out}, {"records", records.size()}};
  if (!split_dir.empty()) {
    std::filesystem::create_directories(split_dir);
    const auto ratios = parse_ratios(ratios_text);
    const auto splits =
        text::split_rows(records.size(), ratios, mix_seed(cfg.seed, 3));
    for (const auto& [split, name] :
         {std::pair{audio::Split::train, "train"},
          std::pair{audio::Split::val, "val"},
          std::pair{audio::Split::test, "test"}}) {
      std::vector<text::TextRecord> part;
      for (size_t i = 0; i < records.size(); ++i) {
        if (splits[i] == split) part.push_back(records[i]);
      }
      const std::string path =
          (std::filesystem::path(split_dir) / (std::string(name) + ".tsv"))
              .string();
      text::write_parallel_tsv(path, part);
      summary[name] = {{"path", path}, {"records", part.size()}};
    }
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_corpus_stats(const GlobalOpts& g, const std::string& in, size_t k) {
  resolve_config(g);
  const auto records = text::read_parallel_tsv(in);
  std::vector<std::string> english, arabic;
  for (const auto& r : records) {
    english.push_back(r.source_en);
    arabic.push_back(r.target_ar);
  }
  const auto to_json = [&](const metrics::CorpusStats& stats) {
    json words = json::array();
    for (const auto& [word, count] : stats.top_words) {
      words.push_back(json::array({word, count}));
    }
    return json{{"top_words", words},
                {"avg_sentence_length", stats.avg_sentence_length}};
  };
  std::cout << json{{"english", to_json(metrics::corpus_stats(english, k))},
                    {"arabic", to_json(metrics::corpus_stats(arabic, k))},
                    {"records", records.size()}}
                   .dump(2)
            << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// pipeline
// --------------------------------------------------------------------------

int cmd_pipeline(const GlobalOpts& g, const std::string& wav,
                 const std::string& checkpoint, const std::string& stages_path,
                 const std::string& out) {
  const EngineConfig cfg = resolve_config(g);
  nn::Checkpoint ck = nn::load_checkpoint(checkpoint);

  pipe::StageSet stages;
  pipe::StageSet* stages_ptr = nullptr;
  std::string bindings = stages_path;
  if (bindings.empty()) bindings = cfg.stages.bindings_file;
  if (!bindings.empty()) {
    stages = pipe::StageSet::from_bindings_file(bindings, cfg.stages.timeout_s);
    stages_ptr = &stages;
  }

  const pipe::SessionRecord record =
      pipe::run_pipeline(wav, ck, cfg, stages_ptr);
  const std::string text = record.to_json_string();
  if (!out.empty()) io::write_text(out, text);
  const std::string log_path =
      (std::filesystem::path(cfg.paths.work_dir) / "sessions.jsonl").string();
  io::append_text(log_path, json::parse(text).dump() + "\n");
  std::cout << text;
  return record.failed() ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech-emotion engine: dataset preparation, feature "
               "extraction, training, evaluation, translation metrics and "
               "the four-stage session pipeline"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "Engine config file (JSON)");
  app.add_option("--seed", g.seed, "Override every seed in the config");
  app.add_option("--jobs", g.jobs, "Worker threads (default: all cores)");

  // prepare
  std::string data, out, ratios = "0.85,0.075,0.075";
  bool actor_disjoint = false;
  auto* prepare = app.add_subcommand("prepare", "Scan a RAVDESS tree into a split manifest CSV");
  prepare->add_option("--data", data, "Dataset root directory")->required();
  prepare->add_option("--out", out, "Manifest CSV path")->required();
  prepare->add_flag("--actor-disjoint", actor_disjoint,
                    "Split whole actors instead of stratifying by emotion");
  prepare->add_option("--ratios", ratios, "train,val,test ratios");

  // featurize
  std::string manifest, feat_out, feat_csv;
  bool augment_flag = false;
  auto* featurize = app.add_subcommand("featurize", "Extract per-clip feature rows into SERF files");
  featurize->add_option("--manifest", manifest, "Manifest CSV")->required();
  featurize->add_option("--out", feat_out, "Output base path (writes .train/.val/.test files)")->required();
  featurize->add_flag("--augment", augment_flag, "Expand training rows with the augmentation policy");
  featurize->add_option("--csv", feat_csv, "Also export a features CSV");

  // train
  std::string train_features, train_out;
  auto* train_cmd = app.add_subcommand("train", "Train the classifier from SERF feature files");
  train_cmd->add_option("--features", train_features, "Feature base path from featurize")->required();
  train_cmd->add_option("--out", train_out, "Checkpoint output path")->required();

  // evaluate
  std::string eval_features, eval_ck, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a feature file");
  evaluate->add_option("--features", eval_features, "Feature file or base path (uses .test)")->required();
  evaluate->add_option("--checkpoint", eval_ck, "Checkpoint path")->required();
  evaluate->add_option("--out", eval_out, "Report JSON path")->required();

  // predict
  std::string pred_wav, pred_ck;
  auto* predict = app.add_subcommand("predict", "Classify one WAV file");
  predict->add_option("--wav", pred_wav, "Input WAV")->required();
  predict->add_option("--checkpoint", pred_ck, "Checkpoint path")->required();

  // spectrogram
  std::string spec_wav, spec_out;
  auto* spectrogram = app.add_subcommand("spectrogram", "Export a log-power spectrogram CSV");
  spectrogram->add_option("--wav", spec_wav, "Input WAV")->required();
  spectrogram->add_option("--out", spec_out, "Output CSV path")->required();

  // bleu
  std::string bleu_tsv, bleu_out;
  size_t bootstrap = 1000;
  auto* bleu = app.add_subcommand("bleu", "Corpus BLEU with a bootstrap confidence interval");
  bleu->add_option("--tsv", bleu_tsv, "TSV: source<TAB>reference<TAB>hypothesis")->required();
  bleu->add_option("--out", bleu_out, "Report JSON path");
  bleu->add_option("--bootstrap", bootstrap, "Bootstrap iterations (0 disables the CI)");

  // textprep
  std::string tp_in, tp_out, tp_lang, tp_split_dir, tp_ratios = "0.8,0.1,0.1";
  size_t tp_max_tokens = 128;
  auto* textprep = app.add_subcommand("textprep", "Normalize, script-filter and truncate a parallel TSV");
  textprep->add_option("--in", tp_in, "Input TSV (en<TAB>ar)")->required();
  textprep->add_option("--out", tp_out, "Output TSV")->required();
  textprep->add_option("--lang", tp_lang, "Column to process: en or ar")->required();
  textprep->add_option("--max-tokens", tp_max_tokens, "Token truncation limit");
  textprep->add_option("--split", tp_split_dir, "Also write train/val/test TSVs into this directory");
  textprep->add_option("--ratios", tp_ratios, "Split ratios for --split");

  // corpus-stats
  std::string cs_in;
  size_t cs_k = 5;
  auto* corpus_stats = app.add_subcommand("corpus-stats", "Top-k words and average sentence length");
  corpus_stats->add_option("--in", cs_in, "Input TSV (en<TAB>ar)")->required();
  corpus_stats->add_option("--k", cs_k, "How many words to report");

  // pipeline
  std::string pl_wav, pl_ck, pl_stages, pl_out;
  auto* pipeline = app.add_subcommand("pipeline", "Run emotion -> asr -> mt -> tts for one clip");
  pipeline->add_option("--wav", pl_wav, "Input WAV")->required();
  pipeline->add_option("--checkpoint", pl_ck, "Emotion checkpoint")->required();
  pipeline->add_option("--stages", pl_stages, "Stage bindings JSON (omit for emotion-only)");
  pipeline->add_option("--out", pl_out, "Session record JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed()) return cmd_prepare(g, data, out, actor_disjoint, ratios);
    if (featurize->parsed()) return cmd_featurize(g, manifest, feat_out, augment_flag, feat_csv);
    if (train_cmd->parsed()) return cmd_train(g, train_features, train_out);
    if (evaluate->parsed()) return cmd_evaluate(g, eval_features, eval_ck, eval_out);
    if (predict->parsed()) return cmd_predict(g, pred_wav, pred_ck);
    if (spectrogram->parsed()) return cmd_spectrogram(g, spec_wav, spec_out);
    if (bleu->parsed()) return cmd_bleu(g, bleu_tsv, bleu_out, bootstrap);
    if (textprep->parsed()) {
      return cmd_textprep(g, tp_in, tp_out, tp_lang, tp_max_tokens, tp_split_dir,
                          tp_ratios);
    }
    if (corpus_stats->parsed()) return cmd_corpus_stats(g, cs_in, cs_k);
    if (pipeline->parsed()) return cmd_pipeline(g, pl_wav, pl_ck, pl_stages, pl_out);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
