// include/ser/metrics.hpp

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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ser/common.hpp"

namespace ser::metrics {

// ---------------------------------------------------------------------------
// Classification metrics
// ---------------------------------------------------------------------------

struct ConfusionMatrix {
  size_t n_classes = 0;
  std::vector<uint64_t> counts;  // counts[true * n + pred]

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(size_t n) : n_classes(n), counts(n * n, 0) {}
  uint64_t& at(size_t t, size_t p) { return counts[t * n_classes + p]; }
  uint64_t at(size_t t, size_t p) const { return counts[t * n_classes + p]; }
  uint64_t total() const;
};

ConfusionMatrix confusion(std::span<const uint16_t> truth,
                          std::span<const uint16_t> predicted,
                          size_t n_classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  uint64_t support = 0;
};

struct PrfReport {
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
};

/// precision = TP/(TP+FP), recall = TP/(TP+FN), F1 = 2PR/(P+R); 0/0 is
/// defined as 0.  Macro averages are unweighted class means; support is the
/// true-label count.
PrfReport prf_report(const ConfusionMatrix& matrix);

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

struct BleuReport {
  double bleu = 0.0;  // [0, 100]
  bool has_ci = false;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::array<double, 4> ngram_precisions = {0, 0, 0, 0};
  double brevity_penalty = 1.0;
};

/// Corpus BLEU with one reference per hypothesis.  Tokens come from
/// whitespace splitting after NFC normalization.  Clipped modified n-gram
/// precisions for n = 1..4 with uniform weights; a level with zero matches
/// is smoothed to 1/(2 * hypothesis n-gram count) and a level with no
/// hypothesis n-grams at all is dropped from the geometric mean.  Brevity
/// penalty exp(1 - ref_len/hyp_len) applies when the hypothesis corpus is
/// shorter.  Scaled to [0, 100].
BleuReport corpus_bleu(std::span<const std::string> hypotheses,
                       std::span<const std::string> references);

/// Percentile bootstrap over sentence pairs: `iterations` resamples with
/// replacement, each scored with corpus_bleu; returns the (alpha/2,
/// 1-alpha/2) percentiles.  Deterministic per seed; iterations run with
/// per-iteration derived seeds so the schedule cannot change results.
std::pair<double, double> bootstrap_ci(std::span<const std::string> hypotheses,
                                       std::span<const std::string> references,
                                       size_t iterations, double alpha,
                                       uint64_t seed);

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

struct CorpusStats {
  std::vector<std::pair<std::string, uint64_t>> top_words;  // count desc
  double avg_sentence_length = 0.0;
};

/// Exact top-k word counts (ties broken lexicographically) and the mean
/// token count per sentence.
CorpusStats corpus_stats(std::span<const std::string> sentences, size_t k);

}  // namespace ser::metrics
