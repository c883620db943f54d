// Copyright 2026 The fincad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fincad {

// Writes to a sibling temp file then renames over the target, so readers never
// see a half-written file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Splits on '\n', dropping a trailing '\r' from each line and a final empty line.
std::vector<std::string> split_lines(std::string_view text);

// Plain comma split; fields are trimmed of surrounding whitespace. Quoting is
// not supported because none of our CSV schemas carry commas in fields.
std::vector<std::string> split_csv_row(std::string_view line);

std::string_view trim(std::string_view s);

// Shortest round-trip formatting for doubles in CSV/JSON-adjacent output.
std::string format_double(double v);

}  // namespace fincad
