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

#include "biaseval/keyed_store.h"

#include <iostream>
#include <mutex>

#include "biaseval/error.h"
#include "biaseval/io.h"

namespace biaseval {

using nlohmann::json;

KeyedStore::KeyedStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  Load();
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw ValidationError("cannot open store " + path_.string());
}

void KeyedStore::Load() {
  if (!std::filesystem::exists(path_)) return;
  const std::string text = ReadFile(path_);
  std::map<std::string, json> loaded;
  std::string problem;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size() && problem.empty()) {
    const std::size_t end = text.find('\n', pos);
    ++line_no;
    if (end == std::string::npos) {
      problem = "truncated final line";
      break;
    }
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    const std::size_t tab = line.find('\t');
    if (tab != 16) {
      problem = "malformed line " + std::to_string(line_no);
      break;
    }
    const std::string_view payload = line.substr(17);
    if (Hex64(Fnv1a64(payload)) != line.substr(0, 16)) {
      problem = "checksum mismatch on line " + std::to_string(line_no);
      break;
    }
    try {
      json record = json::parse(payload);
      loaded[record.at("k").get<std::string>()] = std::move(record.at("v"));
    } catch (const json::exception&) {
      problem = "unparseable line " + std::to_string(line_no);
    }
  }
  if (problem.empty()) {
    entries_ = std::move(loaded);
    return;
  }
  std::filesystem::path aside = path_;
  aside += ".corrupt";
  std::filesystem::rename(path_, aside);
  const std::string warning = "store " + path_.string() + " is corrupted (" +
                              problem + "); starting cold, old file kept at " +
                              aside.string();
  warnings_.push_back(warning);
  std::cerr << "warning: " << warning << "\n";
}

std::optional<json> KeyedStore::Get(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void KeyedStore::Put(const std::string& key, const json& value) {
  const std::string payload = CanonicalDump(json{{"k", key}, {"v", value}});
  const std::string line = Hex64(Fnv1a64(payload)) + "\t" + payload + "\n";
  std::unique_lock lock(mu_);
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw ValidationError("write failed on store " + path_.string());
  entries_[key] = value;
}

std::size_t KeyedStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<std::string> KeyedStore::warnings() const {
  std::shared_lock lock(mu_);
  return warnings_;
}

}  // namespace biaseval
