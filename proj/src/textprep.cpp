// src/textprep.cpp

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

#include "ser/textprep.hpp"

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include "ser/io.hpp"
#include "ser/rng.hpp"

namespace ser::text {

namespace {

// Minimal UTF-8 cursor; malformed sequences decode to U+FFFD and advance
// one byte.
uint32_t next_codepoint(std::string_view s, size_t& i) {
  const auto byte = [&](size_t k) -> uint32_t {
    return static_cast<uint8_t>(s[k]);
  };
  const uint32_t b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  size_t need = 0;
  uint32_t cp = 0;
  if ((b0 & 0xe0) == 0xc0) {
    need = 1;
    cp = b0 & 0x1f;
  } else if ((b0 & 0xf0) == 0xe0) {
    need = 2;
    cp = b0 & 0x0f;
  } else if ((b0 & 0xf8) == 0xf0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  for (size_t k = 1; k <= need; ++k) {
    if (i + k >= s.size() || (byte(i + k) & 0xc0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (byte(i + k) & 0x3f);
  }
  i += need + 1;
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0xFFFD;
  return cp;
}

void append_utf8(std::string& out, uint32_t cp) {
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

bool is_space_cp(uint32_t cp) {
  if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
      cp == '\v') {
    return true;
  }
  const int8_t t = u_charType(static_cast<UChar32>(cp));
  return t == U_SPACE_SEPARATOR || t == U_LINE_SEPARATOR ||
         t == U_PARAGRAPH_SEPARATOR;
}

bool is_punct_cp(uint32_t cp) {
  const int8_t t = u_charType(static_cast<UChar32>(cp));
  return t == U_DASH_PUNCTUATION || t == U_START_PUNCTUATION ||
         t == U_END_PUNCTUATION || t == U_CONNECTOR_PUNCTUATION ||
         t == U_OTHER_PUNCTUATION || t == U_INITIAL_PUNCTUATION ||
         t == U_FINAL_PUNCTUATION;
}

bool is_decimal_digit_cp(uint32_t cp) {
  return u_charType(static_cast<UChar32>(cp)) == U_DECIMAL_DIGIT_NUMBER;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  size_t i = 0;
  while (i < s.size()) {
    const uint32_t cp = next_codepoint(s, i);
    if (is_space_cp(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, cp);
  }
  return out;
}

}  // namespace

std::string nfc(std::string_view utf8) {
  if (utf8.empty()) return {};
  UErrorCode ec = U_ZERO_ERROR;
  const UNormalizer2* norm = unorm2_getNFCInstance(&ec);
  require(U_SUCCESS(ec), "ICU NFC instance unavailable: ", u_errorName(ec));

  // UTF-8 -> UTF-16, substituting U+FFFD for invalid sequences.
  std::vector<UChar> u16(utf8.size() + 1);
  int32_t u16_len = 0;
  ec = U_ZERO_ERROR;
  u_strFromUTF8WithSub(u16.data(), static_cast<int32_t>(u16.size()), &u16_len,
                       utf8.data(), static_cast<int32_t>(utf8.size()), 0xFFFD,
                       nullptr, &ec);
  require(U_SUCCESS(ec), "UTF-8 conversion failed: ", u_errorName(ec));

  std::vector<UChar> out16(static_cast<size_t>(u16_len) * 3 + 16);
  ec = U_ZERO_ERROR;
  const int32_t out_len =
      unorm2_normalize(norm, u16.data(), u16_len, out16.data(),
                       static_cast<int32_t>(out16.size()), &ec);
  require(U_SUCCESS(ec), "NFC normalization failed: ", u_errorName(ec));

  std::string out(static_cast<size_t>(out_len) * 4 + 4, '\0');
  int32_t out8_len = 0;
  ec = U_ZERO_ERROR;
  u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &out8_len,
              out16.data(), out_len, &ec);
  require(U_SUCCESS(ec), "UTF-16 conversion failed: ", u_errorName(ec));
  out.resize(static_cast<size_t>(out8_len));
  return out;
}

std::string normalize_english(std::string_view raw) {
  const std::string composed = nfc(raw);
  std::string kept;
  kept.reserve(composed.size());
  size_t i = 0;
  while (i < composed.size()) {
    uint32_t cp = next_codepoint(composed, i);
    if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
    if (is_decimal_digit_cp(cp) || is_punct_cp(cp)) continue;
    append_utf8(kept, cp);
  }
  // Removals can make a base and a combining mark adjacent; re-normalize so
  // the result is fully composed.
  return nfc(collapse_spaces(kept));
}

Lang lang_from_name(std::string_view name) {
  if (name == "en" || name == "english") return Lang::english;
  if (name == "ar" || name == "arabic") return Lang::arabic;
  fail("unknown language '", name, "' (expected en or ar)");
}

std::string filter_script(std::string_view raw, Lang lang) {
  const std::string composed = nfc(raw);
  std::string kept;
  kept.reserve(composed.size());
  size_t i = 0;
  while (i < composed.size()) {
    const uint32_t cp = next_codepoint(composed, i);
    if (is_space_cp(cp)) {
      kept.push_back(' ');
      continue;
    }
    const bool keep =
        lang == Lang::arabic
            ? (cp >= 0x0600 && cp <= 0x06FF) || (cp >= 0x0750 && cp <= 0x077F)
            : cp >= 'a' && cp <= 'z';
    if (keep) append_utf8(kept, cp);
  }
  return nfc(collapse_spaces(kept));
}

std::string truncate_tokens(std::string_view text, size_t max_tokens) {
  std::string out;
  size_t tokens = 0;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n && tokens < max_tokens) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= n) break;
    const size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (!out.empty()) out.push_back(' ');
    out.append(text.substr(start, i - start));
    ++tokens;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view raw) {
  const std::string composed = nfc(raw);
  std::vector<std::string> tokens;
  size_t i = 0;
  const size_t n = composed.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(composed[i]))) ++i;
    if (i >= n) break;
    const size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(composed[i]))) ++i;
    tokens.emplace_back(composed.substr(start, i - start));
  }
  return tokens;
}

std::vector<TextRecord> read_parallel_tsv(const std::string& path) {
  const auto lines = io::split_lines(io::read_text(path));
  std::vector<TextRecord> records;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = io::split_tsv_line(lines[i]);
    require(fields.size() == 2, path, ": line ", i + 1,
            ": expected 2 tab-separated columns, got ", fields.size());
    records.push_back({fields[0], fields[1]});
  }
  return records;
}

void write_parallel_tsv(const std::string& path,
                        const std::vector<TextRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += io::join_tsv({r.source_en, r.target_ar});
    out += '\n';
  }
  io::write_text(path, out);
}

std::vector<audio::Split> split_rows(size_t n,
                                     const std::array<double, 3>& ratios,
                                     uint64_t seed) {
  const auto counts = audio::allocate_counts(n, ratios);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x74657874ull));  // "text"
  rng.shuffle(order);

  std::vector<audio::Split> out(n, audio::Split::train);
  size_t pos = 0;
  const std::array<audio::Split, 3> splits = {
      audio::Split::train, audio::Split::val, audio::Split::test};
  for (int k = 0; k < 3; ++k) {
    for (size_t c = 0; c < counts[static_cast<size_t>(k)]; ++c) {
      out[order[pos++]] = splits[static_cast<size_t>(k)];
    }
  }
  return out;
}

}  // namespace ser::text
