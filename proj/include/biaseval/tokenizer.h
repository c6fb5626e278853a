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

#ifndef BIASEVAL_TOKENIZER_H_
#define BIASEVAL_TOKENIZER_H_

#include <cstddef>
#include <string_view>
#include <vector>

namespace biaseval {

// Half-open byte range [begin, end) into a text.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool Intersects(CharSpan other) const {
    return begin < other.end && other.begin < end;
  }
  bool operator==(const CharSpan&) const = default;
};

// Tokenization used by the reference backend: a token is a run of leading
// whitespace followed by either a run of word bytes (ASCII alphanumerics,
// '_' and every non-ASCII byte) or a single other character. Trailing
// whitespace forms its own token. Tokens tile the text exactly.
std::vector<CharSpan> ReferenceTokenize(std::string_view text);

}  // namespace biaseval

#endif  // BIASEVAL_TOKENIZER_H_
