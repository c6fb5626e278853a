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

#include "biaseval/score_cache.h"

#include "biaseval/io.h"

namespace biaseval {

ScoreCacheKey ScoreCacheKey::For(std::string_view model_id,
                                 std::string_view prefix,
                                 std::string_view continuation) {
  return {std::string(model_id), Sha256Hex(prefix), Sha256Hex(continuation)};
}

std::string ScoreCacheKey::ToString() const {
  return model_id + "\x1f" + prefix_hash + "\x1f" + continuation_hash;
}

std::optional<ContinuationScore> ScoreCache::Get(const ScoreCacheKey& key) const {
  auto value = store_.Get(key.ToString());
  if (!value) return std::nullopt;
  try {
    return ContinuationScoreFromJson(*value);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

void ScoreCache::Put(const ScoreCacheKey& key, const ContinuationScore& score) {
  store_.Put(key.ToString(), ToJson(score));
}

ContinuationScore CachedBackend::ScoreContinuation(
    std::string_view prefix, std::string_view continuation) const {
  const ScoreCacheKey key =
      ScoreCacheKey::For(inner_->model_id(), prefix, continuation);
  if (auto hit = cache_->Get(key);
      hit && hit->prefix == prefix && hit->continuation == continuation) {
    ++hits_;
    return *std::move(hit);
  }
  ++misses_;
  ContinuationScore score = inner_->ScoreContinuation(prefix, continuation);
  cache_->Put(key, score);
  return score;
}

}  // namespace biaseval
