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

#include <cmath>
#include <thread>

#include "biaseval/error.h"
#include "httplib.h"

namespace biaseval {

using nlohmann::json;

std::pair<std::string, std::string> SplitEndpoint(const std::string& endpoint) {
  const std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw UsageError("endpoint '" + endpoint + "' lacks a scheme");
  }
  const std::size_t path = endpoint.find('/', scheme + 3);
  if (path == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path), endpoint.substr(path)};
}

RemoteBackend::RemoteBackend(BackendConfig config)
    : config_(std::move(config)), in_flight_(config_.max_in_flight) {
  config_.Validate();
  std::tie(scheme_host_port_, path_) = SplitEndpoint(config_.endpoint);
}

RemoteBackend::~RemoteBackend() = default;

std::string RemoteBackend::Post(const std::string& body) const {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - seconds);
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(25 * attempt));
    }
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    auto res = client.Post(path_, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
    if (res->status < 500) break;
  }
  throw TransportError("logprob backend " + config_.endpoint + ": " +
                       last_error);
}

ContinuationScore RemoteBackend::ScoreContinuation(
    std::string_view prefix, std::string_view continuation) const {
  if (continuation.empty()) {
    throw ValidationError("score_continuation: continuation must be non-empty");
  }
  const json request{{"model_id", config_.model_id},
                     {"prefix", prefix},
                     {"continuation", continuation}};
  const std::string body = Post(request.dump());

  json response;
  try {
    response = json::parse(body);
  } catch (const json::parse_error& e) {
    throw TransportError(std::string("logprob backend: malformed response: ") +
                         e.what());
  }
  ContinuationScore out;
  out.prefix = std::string(prefix);
  out.continuation = std::string(continuation);
  try {
    out.tokens = response.at("tokens").get<std::vector<std::string>>();
    out.token_logprobs = response.at("logprobs").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("logprob backend: malformed response: ") +
                         e.what());
  }
  if (out.tokens.size() != out.token_logprobs.size()) {
    throw AlignmentError("logprob backend returned " +
                         std::to_string(out.tokens.size()) + " tokens but " +
                         std::to_string(out.token_logprobs.size()) +
                         " logprobs");
  }
  CheckTokenAlignment(prefix, continuation, out.tokens);
  for (std::size_t i = 0; i < out.token_logprobs.size(); ++i) {
    const double lp = out.token_logprobs[i];
    if (!std::isfinite(lp)) {
      throw ValidationError("logprob backend returned a non-finite logprob");
    }
    if (lp > 0.0) {
      out.warnings.push_back("token " + std::to_string(i) +
                             " has positive logprob " + std::to_string(lp));
    }
    out.total += lp;
  }
  return out;
}

json RemoteBackend::Identity() const {
  return json{{"kind", "remote"},
              {"model_id", config_.model_id},
              {"endpoint", config_.endpoint}};
}

}  // namespace biaseval
