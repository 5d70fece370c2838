// include/ser/textprep.hpp

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
#include <string>
#include <string_view>
#include <vector>

#include "ser/audio.hpp"  // Split

namespace ser::text {

/// Unicode NFC normalization (ICU).  Invalid UTF-8 bytes become U+FFFD.
std::string nfc(std::string_view utf8);

/// Lowercases ASCII letters, removes Unicode decimal digits (Nd) and
/// punctuation (P*), collapses whitespace runs to single spaces and trims.
/// The result is NFC-normalized.  Idempotent.
std::string normalize_english(std::string_view text);

enum class Lang { english, arabic };
Lang lang_from_name(std::string_view name);

/// Keeps only the target script plus spaces (whitespace re-collapsed):
/// arabic keeps U+0600-U+06FF and U+0750-U+077F; english keeps a-z (run it
/// after normalize_english).  Idempotent.
std::string filter_script(std::string_view text, Lang lang);

/// Keeps the first `max_tokens` whitespace tokens, single-space joined.
std::string truncate_tokens(std::string_view text, size_t max_tokens = 128);

/// Whitespace tokenization after NFC normalization; the shared tokenizer
/// for the translation metrics.
std::vector<std::string> tokenize(std::string_view text);

struct TextRecord {
  std::string source_en;
  std::string target_ar;
};

/// Two-column TSV, en<TAB>ar.
std::vector<TextRecord> read_parallel_tsv(const std::string& path);
void write_parallel_tsv(const std::string& path,
                        const std::vector<TextRecord>& records);

/// Unstratified seeded split: shuffled indices assigned contiguously by the
/// largest-remainder counts.  Same seed, same assignment.
std::vector<audio::Split> split_rows(size_t n,
                                     const std::array<double, 3>& ratios,
                                     uint64_t seed);

}  // namespace ser::text
