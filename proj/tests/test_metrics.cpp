// tests/test_metrics.cpp

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

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ser/metrics.hpp"
#include "ser/textprep.hpp"
#include "ser_ref.hpp"

using namespace ser;
using namespace ser::metrics;

TEST_CASE("confusion: diagonal, anti-diagonal, total") {
  const std::vector<uint16_t> truth = {0, 1, 2, 1};
  SUBCASE("all correct is diagonal") {
    const auto m = confusion(truth, truth, 3);
    CHECK(m.at(0, 0) == 1);
    CHECK(m.at(1, 1) == 2);
    CHECK(m.at(2, 2) == 1);
    CHECK(m.total() == 4);
  }
  SUBCASE("swapped labels land off-diagonal") {
    const std::vector<uint16_t> t = {0, 1}, p = {1, 0};
    const auto m = confusion(t, p, 2);
    CHECK(m.at(0, 1) == 1);
    CHECK(m.at(1, 0) == 1);
    CHECK(m.at(0, 0) == 0);
    CHECK(m.total() == t.size());
  }
  SUBCASE("length mismatch is an error") {
    const std::vector<uint16_t> p = {0};
    CHECK_THROWS_AS(confusion(truth, p, 3), Error);
  }
}

TEST_CASE("prf_report: hand arithmetic") {
  SUBCASE("perfect diagonal gives all ones") {
    ConfusionMatrix m(3);
    m.at(0, 0) = 5;
    m.at(1, 1) = 2;
    m.at(2, 2) = 7;
    const auto r = prf_report(m);
    for (const auto& c : r.per_class) {
      CHECK(c.precision == 1.0);
      CHECK(c.recall == 1.0);
      CHECK(c.f1 == 1.0);
    }
    CHECK(r.macro_f1 == 1.0);
    CHECK(r.accuracy == 1.0);
  }
  SUBCASE("TP=1, FP=1, FN=1 gives 0.5 everywhere") {
    // truth [0,0,1], pred [0,1,0]
    const std::vector<uint16_t> t = {0, 0, 1}, p = {0, 1, 0};
    const auto r = prf_report(confusion(t, p, 2));
    CHECK(r.per_class[0].precision == 0.5);
    CHECK(r.per_class[0].recall == 0.5);
    CHECK(r.per_class[0].f1 == 0.5);
    CHECK(r.per_class[0].support == 2);
  }
  SUBCASE("class absent from truth and prediction scores zero") {
    const std::vector<uint16_t> t = {0, 0}, p = {0, 0};
    const auto r = prf_report(confusion(t, p, 3));
    CHECK(r.per_class[2].precision == 0.0);
    CHECK(r.per_class[2].recall == 0.0);
    CHECK(r.per_class[2].f1 == 0.0);
    CHECK(r.per_class[2].support == 0);
  }
  SUBCASE("macro F1 is exactly the mean of per-class F1") {
    Rng rng(3);
    for (int iter = 0; iter < 50; ++iter) {
      const size_t n = 20 + rng.below(50);
      std::vector<uint16_t> t(n), p(n);
      for (size_t i = 0; i < n; ++i) {
        t[i] = static_cast<uint16_t>(rng.below(4));
        p[i] = static_cast<uint16_t>(rng.below(4));
      }
      const auto r = prf_report(confusion(t, p, 4));
      double mean = 0.0;
      for (const auto& c : r.per_class) {
        mean += c.f1;
        CHECK(c.f1 >= 0.0);
        CHECK(c.f1 <= 1.0);
      }
      mean /= 4.0;
      CHECK(r.macro_f1 == mean);
    }
  }
}

TEST_CASE("prf_report matches the label-pair oracle on random cases") {
  Rng rng(4);
  for (int iter = 0; iter < 100; ++iter) {
    const size_t classes = 2 + rng.below(6);
    const size_t n = 5 + rng.below(60);
    std::vector<uint16_t> t(n), p(n);
    for (size_t i = 0; i < n; ++i) {
      t[i] = static_cast<uint16_t>(rng.below(classes));
      p[i] = static_cast<uint16_t>(rng.below(classes));
    }
    const auto mine = prf_report(confusion(t, p, classes));
    const auto oracle = ref::prf(t, p, classes);
    for (size_t c = 0; c < classes; ++c) {
      CHECK(std::abs(mine.per_class[c].precision - oracle[c].precision) < 1e-9);
      CHECK(std::abs(mine.per_class[c].recall - oracle[c].recall) < 1e-9);
      CHECK(std::abs(mine.per_class[c].f1 - oracle[c].f1) < 1e-9);
      CHECK(mine.per_class[c].support == oracle[c].support);
    }
  }
}

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> tokenized(
    const std::vector<std::string>& sentences) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : sentences) out.push_back(text::tokenize(s));
  return out;
}

std::vector<std::string> random_corpus(Rng& rng, size_t sentences,
                                       size_t max_len) {
  static const char* vocab[] = {"a", "b", "c", "d", "e", "f", "g", "the"};
  std::vector<std::string> out;
  for (size_t s = 0; s < sentences; ++s) {
    const size_t len = 1 + rng.below(max_len);
    std::string sent;
    for (size_t i = 0; i < len; ++i) {
      if (i) sent += ' ';
      sent += vocab[rng.below(8)];
    }
    out.push_back(sent);
  }
  return out;
}

}  // namespace

TEST_CASE("corpus_bleu: identical corpus scores exactly 100") {
  const std::vector<std::string> refs = {"the cat sat", "dogs bark loudly",
                                         "one two three four five"};
  const auto r = corpus_bleu(refs, refs);
  CHECK(r.bleu == 100.0);
  CHECK(r.brevity_penalty == 1.0);
}

TEST_CASE("corpus_bleu: clipped repeated unigram, hand-derived") {
  const std::vector<std::string> hyp = {"the the the the"};
  const std::vector<std::string> ref = {"the cat sat down"};
  const auto r = corpus_bleu(hyp, ref);
  // 1-gram: 1/4 clipped; 2/3/4-gram: zero matches smoothed to
  // 1/(2*3), 1/(2*2), 1/(2*1); BP = 1.
  const double expect =
      100.0 * std::pow((1.0 / 4.0) * (1.0 / 6.0) * (1.0 / 4.0) * (1.0 / 2.0),
                       0.25);
  CHECK(r.bleu == doctest::Approx(expect).epsilon(1e-9));
  CHECK(r.ngram_precisions[0] == doctest::Approx(0.25));
  const double oracle = ref::bleu(tokenized(hyp), tokenized(ref));
  CHECK(r.bleu == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("corpus_bleu: brevity penalty for short hypotheses") {
  const std::vector<std::string> hyp = {"the cat"};
  const std::vector<std::string> ref = {"the cat sat down"};
  const auto r = corpus_bleu(hyp, ref);
  CHECK(r.brevity_penalty == doctest::Approx(std::exp(1.0 - 4.0 / 2.0)));
  const double oracle = ref::bleu(tokenized(hyp), tokenized(ref));
  CHECK(r.bleu == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("corpus_bleu matches the n-gram oracle on 100 random corpora") {
  Rng rng(9);
  for (int iter = 0; iter < 100; ++iter) {
    const size_t n = 2 + rng.below(7);
    const auto refs = random_corpus(rng, n, 12);
    auto hyps = random_corpus(rng, n, 12);
    if (rng.below(3) == 0) hyps[0] = refs[0];  // some exact matches
    const auto mine = corpus_bleu(hyps, refs);
    const double oracle = ref::bleu(tokenized(hyps), tokenized(refs));
    CHECK(mine.bleu == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("corpus_bleu is invariant under pair reordering") {
  Rng rng(10);
  const auto refs = random_corpus(rng, 8, 10);
  const auto hyps = random_corpus(rng, 8, 10);
  const double base = corpus_bleu(hyps, refs).bleu;

  std::vector<size_t> order(refs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<std::string> r2, h2;
  for (size_t i : order) {
    r2.push_back(refs[i]);
    h2.push_back(hyps[i]);
  }
  CHECK(corpus_bleu(h2, r2).bleu == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("corpus_bleu rejects an empty corpus") {
  const std::vector<std::string> none;
  CHECK_THROWS_AS(corpus_bleu(none, none), Error);
}

TEST_CASE("bootstrap_ci: degenerate, deterministic, concentrating") {
  SUBCASE("identical perfect pairs give (100, 100)") {
    const std::vector<std::string> refs = {"a b c", "a b c", "a b c"};
    const auto [lo, hi] = bootstrap_ci(refs, refs, 200, 0.05, 1);
    CHECK(lo == 100.0);
    CHECK(hi == 100.0);
  }
  SUBCASE("same seed gives the same interval") {
    Rng rng(11);
    const auto refs = random_corpus(rng, 10, 10);
    const auto hyps = random_corpus(rng, 10, 10);
    const auto a = bootstrap_ci(hyps, refs, 300, 0.05, 42);
    const auto b = bootstrap_ci(hyps, refs, 300, 0.05, 42);
    CHECK(a == b);
    const auto c = bootstrap_ci(hyps, refs, 300, 0.05, 43);
    CHECK(a != c);
  }
  SUBCASE("duplicating the corpus 10x narrows the interval") {
    Rng rng(12);
    const auto refs = random_corpus(rng, 12, 10);
    auto hyps = random_corpus(rng, 12, 10);
    hyps[0] = refs[0];
    hyps[1] = refs[1];
    std::vector<std::string> refs10, hyps10;
    for (int d = 0; d < 10; ++d) {
      refs10.insert(refs10.end(), refs.begin(), refs.end());
      hyps10.insert(hyps10.end(), hyps.begin(), hyps.end());
    }
    for (uint64_t seed = 0; seed < 5; ++seed) {
      const auto [lo1, hi1] = bootstrap_ci(hyps, refs, 400, 0.05, seed);
      const auto [lo10, hi10] = bootstrap_ci(hyps10, refs10, 400, 0.05, seed);
      CHECK(hi10 - lo10 < hi1 - lo1);
    }
  }
  SUBCASE("point estimate lies inside (or on) the interval") {
    Rng rng(13);
    const auto refs = random_corpus(rng, 15, 10);
    auto hyps = random_corpus(rng, 15, 10);
    hyps[2] = refs[2];
    const double point = corpus_bleu(hyps, refs).bleu;
    const auto [lo, hi] = bootstrap_ci(hyps, refs, 1000, 0.05, 3);
    CHECK(lo <= hi);
    CHECK(point >= lo - 1.0);
    CHECK(point <= hi + 1.0);
  }
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

TEST_CASE("corpus_stats: averages, top-k, ties, oracle") {
  SUBCASE("average sentence length") {
    const std::vector<std::string> s = {"a b", "c d e"};
    CHECK(corpus_stats(s, 3).avg_sentence_length == doctest::Approx(2.5));
  }
  SUBCASE("top-1 word") {
    const std::vector<std::string> s = {"the cat", "the dog"};
    const auto stats = corpus_stats(s, 1);
    REQUIRE(stats.top_words.size() == 1);
    CHECK(stats.top_words[0].first == "the");
    CHECK(stats.top_words[0].second == 2);
  }
  SUBCASE("ties break lexicographically") {
    const std::vector<std::string> s = {"b a", "a b", "c"};
    const auto stats = corpus_stats(s, 3);
    REQUIRE(stats.top_words.size() == 3);
    CHECK(stats.top_words[0].first == "a");
    CHECK(stats.top_words[1].first == "b");
    CHECK(stats.top_words[2].first == "c");
  }
  SUBCASE("counts match the hash-free two-pass oracle") {
    Rng rng(14);
    for (int iter = 0; iter < 30; ++iter) {
      const auto corpus = random_corpus(rng, 6, 10);
      const auto stats = corpus_stats(corpus, 100);
      const auto oracle = ref::word_counts(tokenized(corpus));
      REQUIRE(stats.top_words.size() == oracle.size());
      for (const auto& [word, count] : stats.top_words) {
        bool found = false;
        for (const auto& [ow, oc] : oracle) {
          if (ow == word) {
            CHECK(oc == count);
            found = true;
          }
        }
        CHECK(found);
      }
    }
  }
}
