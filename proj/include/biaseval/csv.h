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

#ifndef BIASEVAL_CSV_H_
#define BIASEVAL_CSV_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biaseval {

// RFC 4180 delimited text: quoted fields may contain the delimiter, doubled
// quotes and line breaks.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> Column(std::string_view name) const;
};

// Throws ParseError naming the 1-based data row on an unterminated quote or a
// row whose arity differs from the header.
CsvTable ParseCsv(std::string_view text, char delimiter = ',');

std::string FormatCsvRow(const std::vector<std::string>& fields,
                         char delimiter = ',');

}  // namespace biaseval

#endif  // BIASEVAL_CSV_H_
