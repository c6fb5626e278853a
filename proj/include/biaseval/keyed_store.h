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

#ifndef BIASEVAL_KEYED_STORE_H_
#define BIASEVAL_KEYED_STORE_H_

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"

namespace biaseval {

// Append-only key/value file. Each line is
//
//   <16 hex digits FNV-1a of payload> TAB <payload JSON {"k": key, "v": value}>
//
// and later lines override earlier ones for the same key. A file with any
// damaged line (bad checksum, torn write, malformed JSON) is moved aside to
// "<path>.corrupt" and the store starts empty, with a warning; it never serves
// data it cannot verify. Readers share a lock, writers are exclusive.
class KeyedStore {
 public:
  explicit KeyedStore(std::filesystem::path path);

  KeyedStore(const KeyedStore&) = delete;
  KeyedStore& operator=(const KeyedStore&) = delete;

  std::optional<nlohmann::json> Get(const std::string& key) const;
  void Put(const std::string& key, const nlohmann::json& value);

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }
  std::vector<std::string> warnings() const;

 private:
  void Load();

  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::map<std::string, nlohmann::json> entries_;
  std::ofstream out_;
  std::vector<std::string> warnings_;
};

}  // namespace biaseval

#endif  // BIASEVAL_KEYED_STORE_H_
