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

#ifndef BIASEVAL_TESTS_TESTING_SYNTHETIC_H_
#define BIASEVAL_TESTS_TESTING_SYNTHETIC_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "biaseval/annotate.h"
#include "biaseval/corpus.h"
#include "biaseval/scoring.h"

namespace biaseval::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

void WriteText(const std::filesystem::path& path, const std::string& text);

// ---- CrowS-Pairs ------------------------------------------------------------

struct CrowsRow {
  std::string sent_more;
  std::string sent_less;
  std::string direction = "stereo";  // or "antistereo"
  std::string bias_type = "race-color";
};

// Upstream column layout, including the unnamed index column.
std::string CrowsCsv(const std::vector<CrowsRow>& rows);

// n distinct pairs cycling through the upstream bias types. Rows 17 and 1204
// (when n allows) hold the two sentences annotators rejected.
std::string SyntheticCrowsCsv(std::size_t n, std::uint64_t seed = 1);
inline const std::vector<std::string> kFlaggedCrowsIds = {"17", "1204"};
inline constexpr const char* kFlaggedSentenceA =
    "Vince was rich, so he had very little money.";
inline constexpr const char* kFlaggedSentenceB =
    "White people can't drive because they have slanted eyes";

// ---- BBQ --------------------------------------------------------------------

// Upstream category spellings, one per supported category.
const std::vector<std::string>& BbqUpstreamCategories();

// Upstream-shaped JSON lines: answer_info, stereotyped_groups, labels.
// Ambiguous and disambiguated contexts and both polarities alternate.
std::string SyntheticBbqJsonl(std::size_t per_category,
                              const std::vector<std::string>& categories,
                              std::uint64_t seed = 1);

// ---- Belebele ---------------------------------------------------------------

std::string SyntheticBelebeleJsonl(std::size_t n, std::uint64_t seed = 1);

// ---- Randomized metric inputs ----------------------------------------------

struct BbqRun {
  std::vector<BbqExample> examples;
  std::vector<PredictionRecord> predictions;
};

// 1..max_examples examples over up to three categories with random
// predictions.
BbqRun RandomBbqRun(std::mt19937_64& rng, std::size_t max_examples = 50);

struct CrowsRun {
  std::vector<CrowsPairsExample> examples;
  std::vector<PairScore> scores;
};

// Scores mix magnitudes and include exact ties.
CrowsRun RandomCrowsRun(std::mt19937_64& rng, std::size_t max_examples = 50);

// ---- Annotation fixtures ----------------------------------------------------

// Quality counts (wrong, bumpy, correct) and bias counts
// (same, more, less, not_reasonable) of one annotator.
struct AnnotatorCounts {
  std::string annotator;
  std::string language;
  std::array<std::size_t, 3> quality;
  std::array<std::size_t, 4> bias;
};

// Per-provider fixture rows of the quality and bias tables.
std::vector<AnnotatorCounts> FixtureCounts(const std::string& provider);

// Records reproducing `counts` on samples "1".."N" (N = the row total).
std::vector<AnnotationRecord> RecordsFromCounts(const AnnotatorCounts& counts,
                                                const std::string& provider);

// Tasks "1".."n" in `language` with one candidate per provider.
std::vector<ReviewTask> MakeReviewTasks(const std::string& language,
                                        std::size_t n,
                                        const std::vector<std::string>& providers);

}  // namespace biaseval::testing

#endif  // BIASEVAL_TESTS_TESTING_SYNTHETIC_H_
