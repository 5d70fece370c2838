// include/ser/io.hpp

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
#include <string_view>
#include <vector>

namespace ser::io {

std::string read_text(const std::string& path);
void write_text(const std::string& path, std::string_view content);
void append_text(const std::string& path, std::string_view content);

/// Splits on LF, tolerating a trailing CR per line and a missing final
/// newline.
std::vector<std::string> split_lines(std::string_view text);

/// Minimal CSV quoting: fields containing a comma, quote or newline are
/// wrapped in double quotes with embedded quotes doubled.
std::string csv_field(std::string_view raw);
std::vector<std::string> parse_csv_line(std::string_view line);

/// TSV is used plain (no quoting); a tab inside a field is rejected on
/// write.
std::vector<std::string> split_tsv_line(std::string_view line);
std::string join_tsv(const std::vector<std::string>& fields);

}  // namespace ser::io
