// tests/test_textprep.cpp

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

#include "doctest.h"
#include "helpers.hpp"
#include "ser/textprep.hpp"

using namespace ser;
using namespace ser::text;

namespace {

void encode_cp(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

std::string random_unicode(Rng& rng, size_t length) {
  // ASCII, Latin-1 letters, combining marks, Arabic, CJK, punctuation.
  static const std::pair<uint32_t, uint32_t> ranges[] = {
      {0x20, 0x7e},     {0xc0, 0xff},     {0x300, 0x36f},
      {0x600, 0x6ff},   {0x4e00, 0x4e80}, {0x2000, 0x206f},
  };
  std::string out;
  for (size_t i = 0; i < length; ++i) {
    const auto& [lo, hi] = ranges[rng.below(6)];
    encode_cp(out, lo + static_cast<uint32_t>(rng.below(hi - lo + 1)));
  }
  return out;
}

}  // namespace

TEST_CASE("nfc composes canonical sequences") {
  // e + combining acute -> e-acute
  CHECK(nfc("e\xcc\x81") == "\xc3\xa9");
  // Arabic alef + madda above -> alef with madda
  CHECK(nfc("\xd8\xa7\xd9\x93") == "\xd8\xa2");
  // Already-composed text is untouched.
  CHECK(nfc("\xc3\xa9t\xc3\xa9") == "\xc3\xa9t\xc3\xa9");
  CHECK(nfc("plain ascii") == "plain ascii");
}

TEST_CASE("normalize_english: case, digits, punctuation, whitespace") {
  CHECK(normalize_english("Hello, World! 123") == "hello world");
  CHECK(normalize_english("") == "");
  CHECK(normalize_english("  a   b  ") == "a b");
  CHECK(normalize_english("Don't stop") == "dont stop");
  CHECK(normalize_english("١٢٣ test") == "test");  // Arabic-Indic digits
  CHECK(normalize_english("tab\tand\nnewline") == "tab and newline");
}

TEST_CASE("filter_script keeps one script plus spaces") {
  CHECK(filter_script("\xd9\x85\xd8\xb1\xd8\xad\xd8\xa8\xd8\xa7 hello",
                      Lang::arabic) == "\xd9\x85\xd8\xb1\xd8\xad\xd8\xa8\xd8\xa7");
  CHECK(filter_script("bank123", Lang::english) == "bank");
  const std::string pure_arabic = "\xd9\x85\xd8\xb1\xd8\xad\xd8\xa8\xd8\xa7";
  CHECK(filter_script(pure_arabic, Lang::arabic) == pure_arabic);
  // Arabic supplement block survives the arabic filter.
  const std::string supplement = "\xdd\x90";  // U+0750
  CHECK(filter_script(supplement, Lang::arabic) == supplement);
  CHECK(filter_script("MiXeD Case", Lang::english) == "ie ase");
}

TEST_CASE("truncate_tokens keeps the first max tokens") {
  CHECK(truncate_tokens("one two three four five", 128) ==
        "one two three four five");
  std::string long_text;
  for (int i = 0; i < 200; ++i) {
    if (i) long_text += ' ';
    long_text += "w" + std::to_string(i);
  }
  const std::string cut = truncate_tokens(long_text, 128);
  CHECK(tokenize(cut).size() == 128);
  CHECK(cut.substr(0, 5) == "w0 w1");
  CHECK(truncate_tokens("a b c", 0) == "");
}

TEST_CASE("preprocessing operations are idempotent on random unicode") {
  Rng rng(77);
  for (int iter = 0; iter < 300; ++iter) {
    const std::string s = random_unicode(rng, rng.below(40));
    const std::string n1 = normalize_english(s);
    CHECK(normalize_english(n1) == n1);
    const std::string fa = filter_script(s, Lang::arabic);
    CHECK(filter_script(fa, Lang::arabic) == fa);
    const std::string fe = filter_script(s, Lang::english);
    CHECK(filter_script(fe, Lang::english) == fe);
    const std::string t = truncate_tokens(s, 8);
    CHECK(truncate_tokens(t, 8) == t);
  }
}

TEST_CASE("filter_script(english) output stays in (a-z| )*") {
  Rng rng(78);
  for (int iter = 0; iter < 200; ++iter) {
    const std::string s = random_unicode(rng, rng.below(60));
    const std::string out = filter_script(normalize_english(s), Lang::english);
    for (char c : out) {
      const bool ok = (c >= 'a' && c <= 'z') || c == ' ';
      CHECK(ok);
    }
    CHECK(out.find("  ") == std::string::npos);
    if (!out.empty()) {
      CHECK(out.front() != ' ');
      CHECK(out.back() != ' ');
    }
  }
}

TEST_CASE("parallel TSV round trip") {
  test::TempDir tmp("tsv");
  std::vector<TextRecord> records = {
      {"i want to open an account", "\xd8\xa3\xd8\xb1\xd9\x8a\xd8\xaf"},
      {"hello world", "\xd9\x85\xd8\xb1\xd8\xad\xd8\xa8\xd8\xa7"},
  };
  const std::string path = tmp.file("corpus.tsv");
  write_parallel_tsv(path, records);
  const auto back = read_parallel_tsv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].source_en == records[0].source_en);
  CHECK(back[1].target_ar == records[1].target_ar);
}

TEST_CASE("split_rows: 80/10/10, deterministic, exact counts") {
  const auto splits = split_rows(1000, {0.8, 0.1, 0.1}, 5);
  size_t train = 0, val = 0, test = 0;
  for (auto s : splits) {
    if (s == audio::Split::train) ++train;
    else if (s == audio::Split::val) ++val;
    else ++test;
  }
  CHECK(train == 800);
  CHECK(val == 100);
  CHECK(test == 100);
  CHECK(split_rows(1000, {0.8, 0.1, 0.1}, 5) == splits);
  CHECK(split_rows(1000, {0.8, 0.1, 0.1}, 6) != splits);
}
