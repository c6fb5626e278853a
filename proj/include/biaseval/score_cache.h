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

#ifndef BIASEVAL_SCORE_CACHE_H_
#define BIASEVAL_SCORE_CACHE_H_

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "biaseval/backend.h"
#include "biaseval/keyed_store.h"

namespace biaseval {

struct ScoreCacheKey {
  std::string model_id;
  std::string prefix_hash;        // SHA-256 hex
  std::string continuation_hash;  // SHA-256 hex

  static ScoreCacheKey For(std::string_view model_id, std::string_view prefix,
                           std::string_view continuation);
  std::string ToString() const;
};

// Persistent continuation-score cache keyed by model identity, so two models
// never share entries.
class ScoreCache {
 public:
  explicit ScoreCache(std::filesystem::path path) : store_(std::move(path)) {}

  std::optional<ContinuationScore> Get(const ScoreCacheKey& key) const;
  void Put(const ScoreCacheKey& key, const ContinuationScore& score);

  std::size_t size() const { return store_.size(); }
  std::vector<std::string> warnings() const { return store_.warnings(); }

 private:
  KeyedStore store_;
};

// Consults the cache before the wrapped backend and records every miss.
// Results are identical to the uncached backend.
class CachedBackend : public LogprobBackend {
 public:
  CachedBackend(std::shared_ptr<const LogprobBackend> inner,
                std::shared_ptr<ScoreCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  const std::string& model_id() const override { return inner_->model_id(); }
  ContinuationScore ScoreContinuation(std::string_view prefix,
                                      std::string_view continuation) const override;
  bool SupportsMaskedScoring() const override {
    return inner_->SupportsMaskedScoring();
  }
  std::vector<double> MaskedLogprobs(
      std::string_view sentence,
      std::span<const CharSpan> targets) const override {
    return inner_->MaskedLogprobs(sentence, targets);
  }
  int max_in_flight() const override { return inner_->max_in_flight(); }
  nlohmann::json Identity() const override { return inner_->Identity(); }

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }

 private:
  std::shared_ptr<const LogprobBackend> inner_;
  std::shared_ptr<ScoreCache> cache_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

}  // namespace biaseval

#endif  // BIASEVAL_SCORE_CACHE_H_
