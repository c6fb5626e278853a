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

#ifndef BIASEVAL_ERROR_H_
#define BIASEVAL_ERROR_H_

#include <stdexcept>
#include <string>

namespace biaseval {

// Error hierarchy. Each family maps onto one CLI exit code:
// UsageError -> 1, ValidationError (and ParseError, AlignmentError) -> 2,
// TransportError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 2; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 1; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// A malformed input record. `row` is 1-based (data rows, header excluded for
// delimited files; physical lines for line-oriented files).
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t row, std::string field, const std::string& what)
      : ValidationError("row " + std::to_string(row) + ", field '" + field +
                        "': " + what),
        row_(row),
        field_(std::move(field)) {}

  std::size_t row() const { return row_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t row_;
  std::string field_;
};

// Token spans returned by a backend do not line up with the requested text,
// or a sentence pair cannot be aligned.
class AlignmentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TransportError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

}  // namespace biaseval

#endif  // BIASEVAL_ERROR_H_
