// src/metrics.cpp

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

#include "ser/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ser/rng.hpp"
#include "ser/textprep.hpp"

namespace ser::metrics {

uint64_t ConfusionMatrix::total() const {
  uint64_t t = 0;
  for (uint64_t c : counts) t += c;
  return t;
}

ConfusionMatrix confusion(std::span<const uint16_t> truth,
                          std::span<const uint16_t> predicted,
                          size_t n_classes) {
  require(truth.size() == predicted.size(),
          "confusion: label sequences differ in length (", truth.size(), " vs ",
          predicted.size(), ")");
  ConfusionMatrix m(n_classes);
  for (size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] < n_classes && predicted[i] < n_classes,
            "confusion: label out of range at index ", i);
    ++m.at(truth[i], predicted[i]);
  }
  return m;
}

PrfReport prf_report(const ConfusionMatrix& matrix) {
  require(matrix.total() > 0, "prf_report: empty confusion matrix");
  const size_t n = matrix.n_classes;
  PrfReport report;
  report.per_class.resize(n);

  uint64_t correct = 0;
  for (size_t c = 0; c < n; ++c) {
    uint64_t tp = matrix.at(c, c);
    uint64_t row = 0, col = 0;
    for (size_t k = 0; k < n; ++k) {
      row += matrix.at(c, k);
      col += matrix.at(k, c);
    }
    correct += tp;
    ClassMetrics& cm = report.per_class[c];
    cm.support = row;
    cm.precision = col == 0 ? 0.0
                            : static_cast<double>(tp) / static_cast<double>(col);
    cm.recall =
        row == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(row);
    cm.f1 = cm.precision + cm.recall == 0.0
                ? 0.0
                : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    report.macro_precision += cm.precision;
    report.macro_recall += cm.recall;
    report.macro_f1 += cm.f1;
  }
  report.macro_precision /= static_cast<double>(n);
  report.macro_recall /= static_cast<double>(n);
  report.macro_f1 /= static_cast<double>(n);
  report.accuracy =
      static_cast<double>(correct) / static_cast<double>(matrix.total());
  return report;
}

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

namespace {

constexpr size_t kMaxN = 4;

// Per-sentence-pair sufficient statistics; corpus BLEU and every bootstrap
// resample reduce to integer sums of these.
struct PairStats {
  std::array<uint32_t, kMaxN> match = {0, 0, 0, 0};
  std::array<uint32_t, kMaxN> total = {0, 0, 0, 0};
  uint32_t hyp_len = 0;
  uint32_t ref_len = 0;
};

std::map<std::string, uint32_t> ngram_counts(
    const std::vector<std::string>& tokens, size_t n) {
  std::map<std::string, uint32_t> counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (size_t j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

PairStats pair_stats(const std::string& hyp, const std::string& ref) {
  const auto hyp_tokens = text::tokenize(hyp);
  const auto ref_tokens = text::tokenize(ref);
  PairStats s;
  s.hyp_len = static_cast<uint32_t>(hyp_tokens.size());
  s.ref_len = static_cast<uint32_t>(ref_tokens.size());
  for (size_t n = 1; n <= kMaxN; ++n) {
    const auto hyp_grams = ngram_counts(hyp_tokens, n);
    const auto ref_grams = ngram_counts(ref_tokens, n);
    uint32_t total = 0, match = 0;
    for (const auto& [gram, count] : hyp_grams) {
      total += count;
      const auto it = ref_grams.find(gram);
      if (it != ref_grams.end()) match += std::min(count, it->second);
    }
    s.total[n - 1] = total;
    s.match[n - 1] = match;
  }
  return s;
}

BleuReport bleu_from_sums(const std::array<uint64_t, kMaxN>& match,
                          const std::array<uint64_t, kMaxN>& total,
                          uint64_t hyp_len, uint64_t ref_len) {
  BleuReport r;
  if (hyp_len == 0) return r;

  double log_sum = 0.0;
  size_t levels = 0;
  for (size_t n = 0; n < kMaxN; ++n) {
    if (total[n] == 0) continue;
    const double p =
        match[n] == 0
            ? 1.0 / (2.0 * static_cast<double>(total[n]))
            : static_cast<double>(match[n]) / static_cast<double>(total[n]);
    r.ngram_precisions[n] = p;
    log_sum += std::log(p);
    ++levels;
  }
  if (levels == 0) return r;

  r.brevity_penalty =
      hyp_len < ref_len
          ? std::exp(1.0 - static_cast<double>(ref_len) /
                               static_cast<double>(hyp_len))
          : 1.0;
  r.bleu = 100.0 * r.brevity_penalty *
           std::exp(log_sum / static_cast<double>(levels));
  return r;
}

std::vector<PairStats> corpus_pair_stats(
    std::span<const std::string> hypotheses,
    std::span<const std::string> references) {
  require(hypotheses.size() == references.size(),
          "bleu: hypothesis and reference counts differ (", hypotheses.size(),
          " vs ", references.size(), ")");
  require(!hypotheses.empty(), "bleu: empty corpus");
  std::vector<PairStats> stats(hypotheses.size());
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    stats[i] = pair_stats(hypotheses[i], references[i]);
  }
  return stats;
}

BleuReport bleu_of_sample(const std::vector<PairStats>& stats,
                          std::span<const size_t> indices) {
  std::array<uint64_t, kMaxN> match = {0, 0, 0, 0};
  std::array<uint64_t, kMaxN> total = {0, 0, 0, 0};
  uint64_t hyp_len = 0, ref_len = 0;
  for (size_t idx : indices) {
    const PairStats& s = stats[idx];
    for (size_t n = 0; n < kMaxN; ++n) {
      match[n] += s.match[n];
      total[n] += s.total[n];
    }
    hyp_len += s.hyp_len;
    ref_len += s.ref_len;
  }
  return bleu_from_sums(match, total, hyp_len, ref_len);
}

}  // namespace

BleuReport corpus_bleu(std::span<const std::string> hypotheses,
                       std::span<const std::string> references) {
  const auto stats = corpus_pair_stats(hypotheses, references);
  std::vector<size_t> all(stats.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  return bleu_of_sample(stats, all);
}

std::pair<double, double> bootstrap_ci(std::span<const std::string> hypotheses,
                                       std::span<const std::string> references,
                                       size_t iterations, double alpha,
                                       uint64_t seed) {
  require(hypotheses.size() >= 2, "bootstrap_ci: corpus must have >= 2 pairs");
  require(iterations >= 2, "bootstrap_ci: need at least 2 iterations");
  require(alpha > 0.0 && alpha < 1.0, "bootstrap_ci: alpha must be in (0,1)");
  const auto stats = corpus_pair_stats(hypotheses, references);
  const size_t n = stats.size();

  std::vector<double> scores(iterations);
#pragma omp parallel for schedule(static)
  for (size_t it = 0; it < iterations; ++it) {
    Rng rng(mix_seed(seed, it));
    std::vector<size_t> sample(n);
    for (size_t i = 0; i < n; ++i) sample[i] = rng.below(n);
    scores[it] = bleu_of_sample(stats, sample).bleu;
  }
  std::sort(scores.begin(), scores.end());

  const auto percentile = [&](double q) {
    const double pos = q * static_cast<double>(iterations - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, iterations - 1);
    const double frac = pos - static_cast<double>(lo);
    return scores[lo] * (1.0 - frac) + scores[hi] * frac;
  };
  return {percentile(alpha / 2.0), percentile(1.0 - alpha / 2.0)};
}

CorpusStats corpus_stats(std::span<const std::string> sentences, size_t k) {
  CorpusStats out;
  std::map<std::string, uint64_t> counts;
  uint64_t total_tokens = 0;
  for (const auto& s : sentences) {
    const auto tokens = text::tokenize(s);
    total_tokens += tokens.size();
    for (const auto& t : tokens) ++counts[t];
  }
  out.avg_sentence_length =
      sentences.empty() ? 0.0
                        : static_cast<double>(total_tokens) /
                              static_cast<double>(sentences.size());

  std::vector<std::pair<std::string, uint64_t>> all(counts.begin(),
                                                    counts.end());
  // Count descending; the map already yields lexicographic order for ties.
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  if (all.size() > k) all.resize(k);
  out.top_words = std::move(all);
  return out;
}

}  // namespace ser::metrics
