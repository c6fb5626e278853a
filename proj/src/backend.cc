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

#include "biaseval/backend.h"

#include <atomic>
#include <cmath>
#include <cstring>
#include <thread>

#include "biaseval/error.h"
#include "biaseval/io.h"
#include "biaseval/remote_backend.h"

namespace biaseval {

using nlohmann::json;

json ToJson(const ContinuationScore& s) {
  json j{{"prefix", s.prefix},
         {"continuation", s.continuation},
         {"tokens", s.tokens},
         {"token_logprobs", s.token_logprobs},
         {"total", s.total}};
  if (!s.warnings.empty()) j["warnings"] = s.warnings;
  return j;
}

ContinuationScore ContinuationScoreFromJson(const json& j) {
  ContinuationScore s;
  s.prefix = j.at("prefix").get<std::string>();
  s.continuation = j.at("continuation").get<std::string>();
  s.tokens = j.at("tokens").get<std::vector<std::string>>();
  s.token_logprobs = j.at("token_logprobs").get<std::vector<double>>();
  s.total = j.at("total").get<double>();
  s.warnings = j.value("warnings", std::vector<std::string>{});
  return s;
}

void BackendConfig::Validate() const {
  if (model_id.empty()) throw UsageError("backend: model_id is required");
  if (kind == BackendKind::kRemote && endpoint.empty()) {
    throw UsageError("backend: remote backend requires an endpoint");
  }
  if (kind == BackendKind::kReference && !seed) {
    throw UsageError("backend: reference backend requires a seed");
  }
  if (max_retries < 0) throw UsageError("backend: max_retries must be >= 0");
  if (max_in_flight < 1 || max_in_flight > 1024) {
    throw UsageError("backend: max_in_flight must be in 1..1024");
  }
}

json ToJson(const BackendConfig& c) {
  json j{{"kind", c.kind == BackendKind::kRemote ? "remote" : "reference"},
         {"model_id", c.model_id},
         {"timeout_ms", c.timeout.count()},
         {"max_retries", c.max_retries},
         {"max_in_flight", c.max_in_flight}};
  if (!c.endpoint.empty()) j["endpoint"] = c.endpoint;
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

BackendConfig BackendConfigFromJson(const json& j) {
  BackendConfig c;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "remote") {
      c.kind = BackendKind::kRemote;
    } else if (kind == "reference") {
      c.kind = BackendKind::kReference;
    } else {
      throw UsageError("backend: unknown kind '" + kind + "'");
    }
    c.model_id = j.at("model_id").get<std::string>();
    c.endpoint = j.value("endpoint", std::string());
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
    c.max_retries = j.value("max_retries", 2);
    c.max_in_flight = j.value("max_in_flight", 4);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("backend config: ") + e.what());
  }
  return c;
}

std::vector<double> LogprobBackend::MaskedLogprobs(
    std::string_view, std::span<const CharSpan>) const {
  throw UsageError("backend '" + model_id() +
                   "' does not support masked-conditional scoring");
}

// ---- Reference backend ------------------------------------------------------

namespace {

std::uint64_t SeedBasis(std::uint64_t seed, char domain) {
  unsigned char bytes[9];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
  bytes[8] = static_cast<unsigned char>(domain);
  return Fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes), 9));
}

double HashToLogprob(std::uint64_t hash) {
  // Top 53 bits as a uniform fraction in [0, 1).
  const double unit = static_cast<double>(hash >> 11) * 0x1p-53;
  return ReferenceBackend::kMaxLogprob -
         unit * (ReferenceBackend::kMaxLogprob - ReferenceBackend::kMinLogprob);
}

constexpr char kFieldSeparator = '\x1f';

}  // namespace

ReferenceBackend::ReferenceBackend(std::string model_id, std::uint64_t seed)
    : model_id_(std::move(model_id)), seed_(seed) {}

double ReferenceBackend::TokenLogprob(std::string_view text,
                                      CharSpan token) const {
  std::uint64_t h = SeedBasis(seed_, 'C');
  h = Fnv1a64(text.substr(0, token.begin), h);
  h = Fnv1a64(std::string_view(&kFieldSeparator, 1), h);
  h = Fnv1a64(text.substr(token.begin, token.size()), h);
  return HashToLogprob(h);
}

ContinuationScore ReferenceBackend::ScoreContinuation(
    std::string_view prefix, std::string_view continuation) const {
  if (continuation.empty()) {
    throw ValidationError("score_continuation: continuation must be non-empty");
  }
  std::string text;
  text.reserve(prefix.size() + continuation.size());
  text.append(prefix).append(continuation);
  const CharSpan scored{prefix.size(), text.size()};

  ContinuationScore out;
  out.prefix = std::string(prefix);
  out.continuation = std::string(continuation);
  for (const CharSpan& token : ReferenceTokenize(text)) {
    if (!token.Intersects(scored)) continue;
    const double lp = TokenLogprob(text, token);
    out.tokens.emplace_back(text.substr(token.begin, token.size()));
    out.token_logprobs.push_back(lp);
    out.total += lp;
  }
  return out;
}

std::vector<double> ReferenceBackend::MaskedLogprobs(
    std::string_view sentence, std::span<const CharSpan> targets) const {
  static constexpr char kMask = '\x1e';
  std::vector<double> out;
  out.reserve(targets.size());
  for (const CharSpan& t : targets) {
    if (t.end > sentence.size() || t.begin >= t.end) {
      throw AlignmentError("masked target span out of range");
    }
    std::uint64_t h = SeedBasis(seed_, 'M');
    h = Fnv1a64(sentence.substr(0, t.begin), h);
    h = Fnv1a64(std::string_view(&kMask, 1), h);
    h = Fnv1a64(sentence.substr(t.end), h);
    h = Fnv1a64(std::string_view(&kFieldSeparator, 1), h);
    h = Fnv1a64(sentence.substr(t.begin, t.size()), h);
    out.push_back(HashToLogprob(h));
  }
  return out;
}

json ReferenceBackend::Identity() const {
  return json{{"kind", "reference"},
              {"model_id", model_id_},
              {"seed", seed_},
              {"tokenizer", "reference-v1"}};
}

std::unique_ptr<LogprobBackend> MakeBackend(const BackendConfig& config) {
  config.Validate();
  if (config.kind == BackendKind::kReference) {
    return std::make_unique<ReferenceBackend>(config.model_id, *config.seed);
  }
  return std::make_unique<RemoteBackend>(config);
}

ContinuationScore ScoreContinuation(const BackendConfig& config,
                                    std::string_view prefix,
                                    std::string_view continuation) {
  return MakeBackend(config)->ScoreContinuation(prefix, continuation);
}

std::vector<BatchItemResult> ScoreBatch(const LogprobBackend& backend,
                                        std::span<const ScoreRequest> requests) {
  std::vector<BatchItemResult> results(requests.size());
  if (requests.empty()) return results;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        results[i].score = backend.ScoreContinuation(requests[i].prefix,
                                                     requests[i].continuation);
      } catch (const Error& e) {
        results[i].error = e.what();
        results[i].exit_code = e.exit_code();
      } catch (const std::exception& e) {
        results[i].error = e.what();
        results[i].exit_code = 2;
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(
      std::max(1, backend.max_in_flight()), requests.size());
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return results;
}

void CheckTokenAlignment(std::string_view prefix, std::string_view continuation,
                         std::span<const std::string> tokens) {
  std::string joined;
  for (const std::string& t : tokens) joined += t;
  std::string full;
  full.append(prefix).append(continuation);
  const bool covers = joined.size() >= continuation.size() &&
                      joined.compare(joined.size() - continuation.size(),
                                     continuation.size(), continuation) == 0;
  const bool inside = joined.size() <= full.size() &&
                      full.compare(full.size() - joined.size(), joined.size(),
                                   joined) == 0;
  // The first token may straddle the boundary, but must reach into the
  // continuation; otherwise prefix tokens were scored.
  bool no_prefix_only_token = true;
  if (!tokens.empty() && joined.size() > continuation.size()) {
    no_prefix_only_token =
        joined.size() - continuation.size() < tokens.front().size();
  }
  if (tokens.empty() || !covers || !inside || !no_prefix_only_token) {
    throw AlignmentError("backend tokens do not align with the continuation '" +
                         std::string(continuation) + "' (joined tokens: '" +
                         joined + "')");
  }
}

}  // namespace biaseval
