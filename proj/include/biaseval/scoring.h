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

#ifndef BIASEVAL_SCORING_H_
#define BIASEVAL_SCORING_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biaseval/backend.h"
#include "biaseval/corpus.h"
#include "biaseval/error.h"
#include "json.hpp"

namespace biaseval {

inline constexpr double kDefaultTieTolerance = 1e-9;

// How the model input is assembled: prompt = context + context_question +
// question, and each option is scored as the continuation
// before_option + option. Recorded verbatim in run manifests.
struct JoinConfig {
  std::string context_question = " ";
  std::string before_option = " ";

  bool operator==(const JoinConfig&) const = default;
};

// A scoring failure tagged with the example it belongs to. Keeps the exit-code
// family of the underlying error.
class ScoringError : public Error {
 public:
  ScoringError(std::string example_id, const Error& cause)
      : Error("example " + example_id + ": " + cause.what()),
        example_id_(std::move(example_id)),
        exit_code_(cause.exit_code()) {}

  const std::string& example_id() const { return example_id_; }
  int exit_code() const override { return exit_code_; }

 private:
  std::string example_id_;
  int exit_code_;
};

struct MultipleChoiceItem {
  std::string id;
  std::string context;
  std::string question;
  std::vector<std::string> options;
};

MultipleChoiceItem AsMultipleChoice(const BbqExample& example);
MultipleChoiceItem AsMultipleChoice(const BelebeleExample& example);

struct ChoiceScore {
  std::string example_id;
  int option_index = 0;
  double loglik = 0.0;  // sum of per_token
  std::vector<double> per_token;

  bool operator==(const ChoiceScore&) const = default;
};

struct PredictionRecord {
  std::string example_id;
  int chosen_index = 0;
  std::vector<ChoiceScore> scores;
  // True when another option lies within the tie tolerance of the chosen one.
  bool tie = false;

  bool operator==(const PredictionRecord&) const = default;
};

std::string BuildPrompt(const MultipleChoiceItem& item, const JoinConfig& join);

// Scores every option as a continuation of the prompt and picks the option
// with the highest summed log-likelihood. Options within `tie_tolerance` of
// the maximum are tied; the lowest index among them wins and `tie` is set.
PredictionRecord ScoreMultipleChoice(const LogprobBackend& backend,
                                     const MultipleChoiceItem& item,
                                     const JoinConfig& join = {},
                                     double tie_tolerance = kDefaultTieTolerance);

// Chooses the option index from precomputed log-likelihoods.
std::pair<int, bool> SelectOption(std::span<const double> logliks,
                                  double tie_tolerance);

// Scores items concurrently on up to `threads` workers. The result is in input
// order regardless of scheduling.
std::vector<PredictionRecord> ScoreMultipleChoiceAll(
    const LogprobBackend& backend, std::span<const MultipleChoiceItem> items,
    const JoinConfig& join, double tie_tolerance, int threads);

// Word-level split of one sentence of a CrowS-Pairs pair into spans shared
// with the other sentence (unmodified) and spans unique to it (modified).
struct TokenAlignment {
  std::string sentence;
  std::vector<CharSpan> unmodified;
  std::vector<CharSpan> modified;

  std::vector<std::string> UnmodifiedWords() const;
  std::vector<std::string> ModifiedWords() const;
};

// Matching key for a whitespace-delimited word: surrounding ASCII punctuation
// stripped, case preserved. A word made only of punctuation keeps itself.
std::string_view MatchKey(std::string_view word);

// Unmodified words are a longest common subsequence of the two sentences'
// word keys. Among several LCSs the lexicographically smallest key sequence
// is chosen, embedded at the leftmost positions in each sentence, so the
// shared sequence does not depend on argument order. Throws AlignmentError for
// identical or empty sentences.
std::pair<TokenAlignment, TokenAlignment> AlignPair(std::string_view sent_more,
                                                    std::string_view sent_less);

enum class PllMode {
  // Sum over unmodified tokens of log p(token | everything to its left).
  kCausal,
  // Sum over unmodified words of log p(word | rest of the sentence); needs a
  // backend with masked scoring.
  kMasked,
};

std::string_view PllModeName(PllMode mode);
PllMode ParsePllMode(std::string_view name);

double ScorePll(const LogprobBackend& backend, std::string_view sentence,
                const TokenAlignment& alignment, PllMode mode = PllMode::kCausal);

struct PairScore {
  std::string example_id;
  double score_more = 0.0;
  double score_less = 0.0;
  bool prefers_stereotype = false;  // score_more > score_less, strictly
  double diff = 0.0;                // score_more - score_less

  bool operator==(const PairScore&) const = default;
};

PairScore MakePairScore(std::string example_id, double score_more,
                        double score_less);

PairScore ScorePair(const LogprobBackend& backend,
                    const CrowsPairsExample& example,
                    PllMode mode = PllMode::kCausal);

std::vector<PairScore> ScorePairsAll(const LogprobBackend& backend,
                                     std::span<const CrowsPairsExample> examples,
                                     PllMode mode, int threads);

// ---- Predictions file -------------------------------------------------------
// One JSON record per line; every record carries the run id so it can be
// traced to its run manifest.

nlohmann::json ToJson(const PredictionRecord& record);
PredictionRecord PredictionRecordFromJson(const nlohmann::json& json);
nlohmann::json ToJson(const PairScore& score);
PairScore PairScoreFromJson(const nlohmann::json& json);

void WritePredictions(const std::filesystem::path& path,
                      std::string_view run_id,
                      std::span<const PredictionRecord> records);
void WritePredictions(const std::filesystem::path& path,
                      std::string_view run_id,
                      std::span<const PairScore> records);
std::vector<PredictionRecord> ReadMultipleChoicePredictions(
    const std::filesystem::path& path);
std::vector<PairScore> ReadPairPredictions(const std::filesystem::path& path);

}  // namespace biaseval

#endif  // BIASEVAL_SCORING_H_
