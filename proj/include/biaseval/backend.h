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

#ifndef BIASEVAL_BACKEND_H_
#define BIASEVAL_BACKEND_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biaseval/tokenizer.h"
#include "json.hpp"

namespace biaseval {

// Log-probabilities are natural-log throughout.
struct ContinuationScore {
  std::string prefix;
  std::string continuation;
  // Tokens that cover the continuation. The first may start inside the prefix
  // when the tokenizer merges across the boundary.
  std::vector<std::string> tokens;
  std::vector<double> token_logprobs;
  double total = 0.0;
  // Contract violations that are tolerated from remote backends, e.g. a
  // positive log-probability.
  std::vector<std::string> warnings;

  bool operator==(const ContinuationScore&) const = default;
};

nlohmann::json ToJson(const ContinuationScore& score);
ContinuationScore ContinuationScoreFromJson(const nlohmann::json& json);

enum class BackendKind { kRemote, kReference };

struct BackendConfig {
  BackendKind kind = BackendKind::kReference;
  std::string endpoint;  // remote only, e.g. http://127.0.0.1:8080/v1/logprobs
  std::string model_id;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  std::optional<std::uint64_t> seed;  // reference only
  int max_in_flight = 4;

  // Throws UsageError: remote requires endpoint, reference requires seed.
  void Validate() const;
};

nlohmann::json ToJson(const BackendConfig& config);
BackendConfig BackendConfigFromJson(const nlohmann::json& json);

// Source of token log-probabilities for one model. Implementations must be
// safe to call from several threads at once.
class LogprobBackend {
 public:
  virtual ~LogprobBackend() = default;

  virtual const std::string& model_id() const = 0;

  // Scores exactly the tokens covering `continuation` given `prefix`; prefix
  // tokens are never scored. `continuation` must be non-empty.
  virtual ContinuationScore ScoreContinuation(
      std::string_view prefix, std::string_view continuation) const = 0;

  // Masked-conditional scoring: log P(sentence[span] | rest of sentence) for
  // each target span. Only some backends can provide it.
  virtual bool SupportsMaskedScoring() const { return false; }
  virtual std::vector<double> MaskedLogprobs(
      std::string_view sentence, std::span<const CharSpan> targets) const;

  // Upper bound on concurrent requests worth issuing.
  virtual int max_in_flight() const { return 1; }

  // Recorded in run manifests.
  virtual nlohmann::json Identity() const = 0;
};

// Deterministic stand-in for a language model. Each token's log-probability is
// a function of (seed, left context, token text) hashed with FNV-1a and mapped
// onto [-8, -0.05]. Tokenization is ReferenceTokenize over prefix+continuation.
class ReferenceBackend : public LogprobBackend {
 public:
  static constexpr double kMinLogprob = -8.0;
  static constexpr double kMaxLogprob = -0.05;

  ReferenceBackend(std::string model_id, std::uint64_t seed);

  const std::string& model_id() const override { return model_id_; }
  ContinuationScore ScoreContinuation(std::string_view prefix,
                                      std::string_view continuation) const override;
  bool SupportsMaskedScoring() const override { return true; }
  std::vector<double> MaskedLogprobs(
      std::string_view sentence,
      std::span<const CharSpan> targets) const override;
  int max_in_flight() const override { return 8; }
  nlohmann::json Identity() const override;

  // Log-probability of text[token] given text[0, token.begin).
  double TokenLogprob(std::string_view text, CharSpan token) const;

 private:
  std::string model_id_;
  std::uint64_t seed_;
};

std::unique_ptr<LogprobBackend> MakeBackend(const BackendConfig& config);

// One-shot convenience over MakeBackend.
ContinuationScore ScoreContinuation(const BackendConfig& config,
                                    std::string_view prefix,
                                    std::string_view continuation);

struct ScoreRequest {
  std::string prefix;
  std::string continuation;
};

struct BatchItemResult {
  std::optional<ContinuationScore> score;
  std::string error;
  int exit_code = 0;  // error family, see error.h

  bool ok() const { return score.has_value(); }
};

// Results are positionally aligned with `requests`; a failing item yields an
// error entry and never removes the item. At most backend.max_in_flight()
// requests run concurrently.
std::vector<BatchItemResult> ScoreBatch(const LogprobBackend& backend,
                                        std::span<const ScoreRequest> requests);

// Checks a backend's token list against the requested text. The joined tokens
// must end with `continuation` and be a suffix of prefix + continuation.
// Throws AlignmentError otherwise.
void CheckTokenAlignment(std::string_view prefix, std::string_view continuation,
                         std::span<const std::string> tokens);

}  // namespace biaseval

#endif  // BIASEVAL_BACKEND_H_
