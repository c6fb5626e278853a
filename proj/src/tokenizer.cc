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

#include "biaseval/tokenizer.h"

namespace biaseval {
namespace {

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

}  // namespace

std::vector<CharSpan> ReferenceTokenize(std::string_view text) {
  std::vector<CharSpan> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    while (i < text.size() && IsSpace(text[i])) ++i;
    if (i == text.size()) {
      tokens.push_back({start, i});
      break;
    }
    if (IsWordByte(text[i])) {
      while (i < text.size() && IsWordByte(text[i])) ++i;
    } else {
      ++i;
    }
    tokens.push_back({start, i});
  }
  return tokens;
}

}  // namespace biaseval
