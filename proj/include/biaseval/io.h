// Copyright 2026 The biaseval Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BIASEVAL_IO_H_
#define BIASEVAL_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace biaseval {

std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a partially written file.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

// 64-bit FNV-1a. Stable across platforms; used for cache line integrity and
// the reference backend.
std::uint64_t Fnv1a64(std::string_view data,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string Hex64(std::uint64_t value);

// One JSON value per non-empty line. Throws ParseError with the 1-based line
// number on malformed input.
std::vector<nlohmann::json> ParseJsonLines(std::string_view text);

// Canonical serialization used for every file the harness writes: sorted keys
// (nlohmann::json objects are ordered maps), no insignificant whitespace.
std::string CanonicalDump(const nlohmann::json& value);

// Lexicographic order except that runs of digits compare by numeric value,
// so "2" < "10" and "Age-9" < "Age-10".
bool NaturalLess(std::string_view a, std::string_view b);

}  // namespace biaseval

#endif  // BIASEVAL_IO_H_
