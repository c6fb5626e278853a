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

#ifndef BIASEVAL_CORPUS_H_
#define BIASEVAL_CORPUS_H_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace biaseval {

// The nine social-bias categories shared by CrowS-Pairs and BBQ.
enum class BiasCategory {
  kRace,
  kGender,
  kSexualOrientation,
  kReligion,
  kAge,
  kNationality,
  kDisability,
  kPhysicalAppearance,
  kSocioeconomic,
};

inline constexpr std::array<BiasCategory, 9> kAllCategories = {
    BiasCategory::kRace,          BiasCategory::kGender,
    BiasCategory::kSexualOrientation, BiasCategory::kReligion,
    BiasCategory::kAge,           BiasCategory::kNationality,
    BiasCategory::kDisability,    BiasCategory::kPhysicalAppearance,
    BiasCategory::kSocioeconomic,
};

std::string_view CategoryName(BiasCategory category);

// Accepts canonical names ("race", "physical-appearance", ...) as well as the
// upstream CrowS-Pairs ("race-color") and BBQ ("Race_ethnicity", "SES", ...)
// spellings. Intersectional BBQ categories are not among the nine.
std::optional<BiasCategory> ParseCategory(std::string_view name);

enum class StereoDirection { kStereo, kAntiStereo };
enum class ContextCondition { kAmbiguous, kDisambiguated };
enum class Polarity { kNegative, kNonNegative };
enum class DatasetKind { kCrowsPairs, kBbq, kBelebele };

std::string_view DatasetKindName(DatasetKind kind);
// Throws UsageError for anything but "crows_pairs", "bbq" or "belebele".
DatasetKind ParseDatasetKind(std::string_view name);

using IdSet = std::set<std::string>;

struct CrowsPairsExample {
  std::string id;
  std::string sent_more;  // the stereotyping sentence
  std::string sent_less;
  BiasCategory category = BiasCategory::kRace;
  StereoDirection direction = StereoDirection::kStereo;
  std::string language;

  bool operator==(const CrowsPairsExample&) const = default;
};

struct BbqExample {
  std::string id;
  BiasCategory category = BiasCategory::kRace;
  std::string context;
  std::string question;
  std::array<std::string, 3> options;
  int gold_label = 0;
  ContextCondition condition = ContextCondition::kAmbiguous;
  Polarity polarity = Polarity::kNegative;
  int unknown_index = 0;
  int bias_target_index = 0;
  std::string language;

  bool operator==(const BbqExample&) const = default;
};

struct BelebeleExample {
  std::string id;
  std::string passage;
  std::string question;
  std::array<std::string, 4> options;
  int gold_label = 0;
  std::string language;

  bool operator==(const BelebeleExample&) const = default;
};

// CrowS-Pairs: delimited text with a header holding at least sent_more,
// sent_less, stereo_antistereo and bias_type. Without an "id" column the id is
// the 1-based data-row number of the source file, so ids survive exclusions
// and line up across translated splits.
std::vector<CrowsPairsExample> ParseCrowsPairs(std::string_view text,
                                               std::string_view language,
                                               const IdSet& exclusions = {});
std::vector<CrowsPairsExample> LoadCrowsPairs(const std::filesystem::path& path,
                                              std::string_view language,
                                              const IdSet& exclusions = {});

// BBQ: one JSON record per line in the upstream layout (ans0..ans2, label,
// context_condition, question_polarity, answer_info,
// additional_metadata.stereotyped_groups). Explicit "unknown_index" and
// "bias_target_index" (or upstream "target_loc") fields take precedence over
// derivation from answer metadata.
std::vector<BbqExample> ParseBbq(std::string_view text,
                                 std::string_view language,
                                 const IdSet& exclusions = {});
std::vector<BbqExample> LoadBbq(const std::filesystem::path& path,
                                std::string_view language,
                                const IdSet& exclusions = {});

// Belebele: one JSON record per line in the upstream layout (flores_passage,
// question, mc_answer1..mc_answer4, 1-based correct_answer_num).
std::vector<BelebeleExample> ParseBelebele(std::string_view text,
                                           std::string_view language,
                                           const IdSet& exclusions = {});
std::vector<BelebeleExample> LoadBelebele(const std::filesystem::path& path,
                                          std::string_view language,
                                          const IdSet& exclusions = {});

// Ids of a dataset file of any kind, after exclusions.
std::vector<std::string> LoadIds(DatasetKind kind,
                                 const std::filesystem::path& path,
                                 std::string_view language,
                                 const IdSet& exclusions = {});

struct DatasetManifest {
  DatasetKind kind = DatasetKind::kCrowsPairs;
  std::string language;
  std::string source_uri;  // local path of the dataset file
  std::string checksum;    // SHA-256 hex of the raw file
  std::size_t example_count = 0;  // after exclusions
  IdSet excluded_ids;
  // Which slice of the benchmark the file holds, e.g. "full" or
  // "test-1000-per-category" for BBQ.
  std::string split = "full";

  bool operator==(const DatasetManifest&) const = default;
};

nlohmann::json ToJson(const DatasetManifest& manifest);
DatasetManifest ManifestFromJson(const nlohmann::json& json);
DatasetManifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest);

// Loads the file once to fill checksum and example_count.
DatasetManifest BuildManifest(DatasetKind kind,
                              const std::filesystem::path& path,
                              std::string_view language,
                              const IdSet& exclusions,
                              std::string split = "full");

// Throws ValidationError when the file on disk no longer matches the
// manifest's checksum or example count.
void VerifyManifest(const DatasetManifest& manifest);

// Exclusion-set file: {"dataset_kind": ..., "excluded_ids": [...]}.
IdSet ReadExclusions(const std::filesystem::path& path);
void WriteExclusions(const std::filesystem::path& path, DatasetKind kind,
                     const IdSet& ids);

struct SplitIds {
  DatasetManifest manifest;
  std::vector<std::string> ids;
};

struct ParallelSplitReport {
  bool passed = true;
  // language -> ids present in some other split but absent here.
  std::map<std::string, IdSet> missing_ids;
  // language -> excluded ids that differ from the union of all exclusions.
  std::map<std::string, IdSet> exclusion_mismatch;
  std::vector<std::string> messages;
};

// Requires at least two splits of the same dataset kind (UsageError
// otherwise). Failures are reported in the returned object.
ParallelSplitReport ValidateParallelSplits(std::span<const SplitIds> splits);
// Loads every split from its manifest's source_uri.
ParallelSplitReport ValidateParallelSplits(
    std::span<const DatasetManifest> manifests);

nlohmann::json ToJson(const ParallelSplitReport& report);

}  // namespace biaseval

#endif  // BIASEVAL_CORPUS_H_
