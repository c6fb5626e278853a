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

#ifndef BIASEVAL_REMOTE_BACKEND_H_
#define BIASEVAL_REMOTE_BACKEND_H_

#include <memory>
#include <semaphore>
#include <string>

#include "biaseval/backend.h"

namespace biaseval {

// Client for the HTTP log-probability protocol (docs/protocol.md):
//
//   POST <endpoint>  {"model_id": s, "prefix": s, "continuation": s}
//   200              {"tokens": [s...], "logprobs": [x...]}
//
// Connection failures and 5xx responses are retried up to max_retries times;
// exhausting them, or any 4xx, raises TransportError. Token lists that do not
// line up with the continuation raise AlignmentError.
class RemoteBackend : public LogprobBackend {
 public:
  explicit RemoteBackend(BackendConfig config);
  ~RemoteBackend() override;

  const std::string& model_id() const override { return config_.model_id; }
  ContinuationScore ScoreContinuation(std::string_view prefix,
                                      std::string_view continuation) const override;
  int max_in_flight() const override { return config_.max_in_flight; }
  nlohmann::json Identity() const override;

 private:
  std::string Post(const std::string& body) const;

  BackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  mutable std::counting_semaphore<1024> in_flight_;
};

// Splits "http://host:port/path" into ("http://host:port", "/path").
std::pair<std::string, std::string> SplitEndpoint(const std::string& endpoint);

}  // namespace biaseval

#endif  // BIASEVAL_REMOTE_BACKEND_H_
