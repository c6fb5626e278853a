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


#include "biaseval/remote_backend.h"
#include "biaseval/translate.h"
#include "httplib.h"

namespace biaseval {

using nlohmann::json;

HttpProvider::HttpProvider(std::string id, std::string endpoint,
                           std::string api_key, int timeout_ms)
    : id_(std::move(id)),
      endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      timeout_ms_(timeout_ms) {
  if (id_.empty()) throw UsageError("translation provider needs an id");
  if (timeout_ms_ <= 0) throw UsageError("provider timeout must be positive");
  SplitEndpoint(endpoint_);
}

std::vector<std::string> HttpProvider::Translate(
    std::string_view source_language, std::string_view target_language,
    std::span<const std::string> texts) const {
  const auto [host, path] = SplitEndpoint(endpoint_);
  const json request{{"source_lang", source_language},
                     {"target_lang", target_language},
                     {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  httplib::Client client(host);
  const time_t sec = timeout_ms_ / 1000;
  const time_t usec = (timeout_ms_ % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }
  auto res = client.Post(path, headers, request.dump(), "application/json");
  if (!res) {
    throw TransportError("translation provider " + id_ + ": " +
                         httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("translation provider " + id_ + ": HTTP " +
                         std::to_string(res->status) + ": " + res->body);
  }
  try {
    auto out = json::parse(res->body).at("translations")
                   .get<std::vector<std::string>>();
    if (out.size() != texts.size()) {
      throw TransportError("translation provider " + id_ + " returned " +
                           std::to_string(out.size()) + " translations for " +
                           std::to_string(texts.size()) + " texts");
    }
    return out;
  } catch (const json::exception& e) {
    throw TransportError("translation provider " + id_ +
                         ": malformed response: " + e.what());
  }
}

}  // namespace biaseval
