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

#ifndef BIASEVAL_ANNOTATE_H_
#define BIASEVAL_ANNOTATE_H_

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biaseval/corpus.h"
#include "biaseval/error.h"
#include "biaseval/metrics.h"
#include "biaseval/review.h"
#include "biaseval/translate.h"
#include "json.hpp"

struct sqlite3;

namespace biaseval {

enum class Quality { kWrong = 0, kBumpy = 1, kCorrect = 2 };
inline constexpr int kNumQualityLevels = 3;

enum class BiasJudgment { kSame, kMore, kLess, kNone, kNotReasonable };
inline constexpr int kNumBiasJudgments = 5;

std::string_view QualityName(Quality q);
std::optional<Quality> ParseQuality(std::string_view name);
std::string_view BiasJudgmentName(BiasJudgment b);
std::optional<BiasJudgment> ParseBiasJudgment(std::string_view name);

// Rejection of one named field of a submitted record.
class FieldError : public ValidationError {
 public:
  FieldError(std::string field, const std::string& what)
      : ValidationError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class NotFoundError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct AnnotationRecord {
  std::string sample_id;
  std::string annotator_id;
  std::string language;
  std::string provider_id;
  Quality quality = Quality::kCorrect;
  BiasJudgment bias_judgment = BiasJudgment::kSame;
  std::string comment;
  std::string timestamp;

  bool operator==(const AnnotationRecord&) const = default;
};

nlohmann::json ToJson(const AnnotationRecord& record);
// Throws FieldError naming the offending field. quality accepts the level
// name or its number.
AnnotationRecord AnnotationRecordFromJson(const nlohmann::json& json);

struct Annotator {
  std::string id;
  std::string token;
  std::vector<std::string> languages;  // empty: any language
};

// Config: [{"id": "A1", "token": "..."} | {"id": "A2", "token_env": "VAR"},
// optional "languages": [...]].
std::vector<Annotator> AnnotatorsFromJson(const nlohmann::json& json);

struct Acknowledgment {
  bool stored = false;
  bool overwritten = false;
  bool flagged_for_exclusion = false;
  int version = 0;
};

nlohmann::json ToJson(const Acknowledgment& ack);

struct Histogram {
  std::array<std::size_t, kNumQualityLevels> quality{};
  std::array<std::size_t, kNumBiasJudgments> bias{};

  bool operator==(const Histogram&) const = default;
};

struct AnnotationSummary {
  std::string language;
  std::string provider_id;
  std::map<std::string, Histogram> per_annotator;
  // Mean count per level over the annotators listed above; zero when none.
  std::array<double, kNumQualityLevels> average_quality{};
  std::array<double, kNumBiasJudgments> average_bias{};
};

nlohmann::json ToJson(const AnnotationSummary& summary);

struct PairAgreement {
  std::string annotator_a;
  std::string annotator_b;
  std::size_t n_shared = 0;
  std::optional<AgreementResult> result;
  std::string status;
};

struct AgreementReport {
  std::string language;
  std::string provider_id;
  KappaWeighting weighting = KappaWeighting::kNone;
  std::string status;  // "ok" or "insufficient annotators"
  std::vector<PairAgreement> pairs;
};

nlohmann::json ToJson(const AgreementReport& report);

struct AuditEntry {
  std::int64_t seq = 0;
  std::string action;  // "insert" or "overwrite"
  AnnotationRecord record;
};

// Pure functions over records; the store delegates to these.
IdSet DeriveExclusions(std::span<const AnnotationRecord> records);
AnnotationSummary SummarizeAnnotations(std::span<const AnnotationRecord> records,
                                       std::string_view language,
                                       std::string_view provider_id);
// Pairwise kappa over the quality ratings of items both annotators rated.
AgreementReport AgreementFor(std::span<const AnnotationRecord> records,
                             std::string_view language,
                             std::string_view provider_id,
                             KappaWeighting weighting = KappaWeighting::kNone);

// Annotation state in a single SQLite file. All methods are thread-safe;
// writes are serialized.
class AnnotationStore {
 public:
  static constexpr int kSchemaVersion = 1;

  // ":memory:" opens a private in-memory store.
  explicit AnnotationStore(const std::filesystem::path& path,
                           Clock clock = UtcNow);
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  int schema_version() const;

  // Upserts annotators. Tokens are stored as SHA-256 digests.
  void ProvisionAnnotators(std::span<const Annotator> annotators);
  std::optional<std::string> Authenticate(std::string_view token) const;
  bool HasAnnotator(std::string_view annotator_id) const;

  // Upserts tasks and their candidates; returns how many tasks were new.
  std::size_t ImportTasks(std::span<const ReviewTask> tasks);
  std::vector<ReviewTask> Tasks(std::optional<std::string> language = {}) const;

  // First task in natural sample_id order that this annotator has not yet
  // rated for every candidate provider. Throws NotFoundError for an unknown
  // annotator.
  std::optional<ReviewTask> ServeNextTask(std::string_view annotator_id,
                                          std::string_view language) const;

  // Fills an empty timestamp from the clock. Overwrites keep an audit entry.
  Acknowledgment Submit(AnnotationRecord record);

  std::vector<AnnotationRecord> Records(
      std::optional<std::string> language = {},
      std::optional<std::string> provider_id = {}) const;
  std::vector<AuditEntry> Audit() const;

  AnnotationSummary Summarize(std::string_view language,
                              std::string_view provider_id) const;
  AgreementReport Agreement(std::string_view language,
                            std::string_view provider_id,
                            KappaWeighting weighting = KappaWeighting::kNone) const;
  IdSet Exclusions() const;

 private:
  void Migrate();

  sqlite3* db_ = nullptr;
  Clock clock_;
  mutable std::mutex mu_;
};

}  // namespace biaseval

#endif  // BIASEVAL_ANNOTATE_H_
