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

#ifndef BIASEVAL_TRANSLATE_H_
#define BIASEVAL_TRANSLATE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biaseval/corpus.h"
#include "biaseval/error.h"
#include "biaseval/keyed_store.h"
#include "biaseval/review.h"
#include "json.hpp"

namespace biaseval {

// ---- Providers --------------------------------------------------------------

// Machine translation service. Translate returns one output per input text, in
// order. Implementations must be safe to call concurrently.
class TranslationProvider {
 public:
  virtual ~TranslationProvider() = default;
  virtual const std::string& id() const = 0;
  virtual std::vector<std::string> Translate(
      std::string_view source_language, std::string_view target_language,
      std::span<const std::string> texts) const = 0;
};

// Offline provider: prefixes every whitespace-delimited word with
// "<target>:" so "old friend" becomes "de:old de:friend". Reverse() undoes it.
class MockProvider : public TranslationProvider {
 public:
  explicit MockProvider(std::string id = "mock") : id_(std::move(id)) {}

  const std::string& id() const override { return id_; }
  std::vector<std::string> Translate(
      std::string_view source_language, std::string_view target_language,
      std::span<const std::string> texts) const override;

  static std::string Apply(std::string_view text, std::string_view language);
  static std::string Reverse(std::string_view text, std::string_view language);

 private:
  std::string id_;
};

// Client for the HTTP translation protocol (docs/protocol.md):
//
//   POST <endpoint>  {"source_lang": s, "target_lang": s, "texts": [s...]}
//   200              {"translations": [s...]}
//
// One attempt per call; TranslateDataset owns retries.
class HttpProvider : public TranslationProvider {
 public:
  HttpProvider(std::string id, std::string endpoint, std::string api_key = {},
               int timeout_ms = 60000);

  const std::string& id() const override { return id_; }
  std::vector<std::string> Translate(
      std::string_view source_language, std::string_view target_language,
      std::span<const std::string> texts) const override;

 private:
  std::string id_;
  std::string endpoint_;
  std::string api_key_;
  int timeout_ms_;
};

// ---- Jobs -------------------------------------------------------------------

enum class FieldPolicy { kTranslate, kCopy };

// Text fields a dataset kind allows to be translated. Everything else
// (labels, indices, categories, answer metadata) is always copied.
const std::vector<std::string>& TranslatableFields(DatasetKind kind);

struct TranslationJob {
  DatasetKind kind = DatasetKind::kCrowsPairs;
  std::string source_language = "en";
  std::string target_language;
  std::string provider_id;
  // Fields not listed are copied.
  std::map<std::string, FieldPolicy> field_policy;
  std::string cache_uri;       // empty: in-memory only
  std::string checkpoint_uri;  // empty: no checkpoint
  std::size_t batch_size = 50;
  int max_concurrency = 2;
  int max_retries = 2;

  // Translates every translatable field of `kind`.
  static TranslationJob ForDataset(DatasetKind kind, std::string source_language,
                                   std::string target_language,
                                   std::string provider_id);

  // Throws ValidationError if a non-translatable field is set to translate,
  // UsageError on bad sizes or missing languages.
  void Validate() const;
  // Stable digest of everything that determines the output.
  std::string Fingerprint() const;
};

// A dataset record in its on-disk shape. CSV rows become JSON objects of
// column -> string.
struct RawRecord {
  std::string id;
  nlohmann::json object;
};

struct RawDataset {
  DatasetKind kind = DatasetKind::kCrowsPairs;
  std::vector<std::string> csv_header;  // CSV only
  std::vector<RawRecord> records;
};

// Ids follow the corpus loaders' rules.
RawDataset ReadRawDataset(DatasetKind kind, const std::filesystem::path& path);

struct TranslatedRecord {
  std::string id;
  // Every field, as text: strings verbatim, other JSON values canonically
  // serialized. Copied fields are byte-identical in both maps.
  std::map<std::string, std::string> source_texts;
  std::map<std::string, std::string> target_texts;
  std::string provider_id;
  std::string timestamp;  // UTC time the newest field translation was made
  // Review hints, e.g. a BBQ option that no longer appears verbatim in the
  // translated context.
  std::vector<std::string> flags;

  bool operator==(const TranslatedRecord&) const = default;
};

nlohmann::json ToJson(const TranslatedRecord& record);
TranslatedRecord TranslatedRecordFromJson(const nlohmann::json& json);

struct RecordError {
  std::string id;
  std::string message;
};

struct TranslationOutcome {
  std::vector<TranslatedRecord> records;  // input order, failed records omitted
  std::vector<RecordError> errors;
  std::size_t provider_calls = 0;
  std::size_t provider_texts = 0;
  std::size_t cache_hits = 0;
};

// Raised when a batch still fails after its retries. Completed batches are in
// the cache and the checkpoint, so rerunning the job resumes from there.
class TranslationHalted : public TransportError {
 public:
  TranslationHalted(const std::string& what, std::size_t batches_done)
      : TransportError(what), batches_done_(batches_done) {}
  std::size_t batches_done() const { return batches_done_; }

 private:
  std::size_t batches_done_;
};

// Translation cache keyed by (provider, source language, target language,
// SHA-256 of the text).
class TranslationCache {
 public:
  explicit TranslationCache(std::filesystem::path path) : store_(std::move(path)) {}

  struct Entry {
    std::string translation;
    std::string timestamp;
  };
  std::optional<Entry> Get(std::string_view provider, std::string_view source,
                           std::string_view target, std::string_view text) const;
  void Put(std::string_view provider, std::string_view source,
           std::string_view target, std::string_view text, const Entry& entry);
  std::size_t size() const { return store_.size(); }

 private:
  static std::string Key(std::string_view provider, std::string_view source,
                         std::string_view target, std::string_view text);
  KeyedStore store_;
};

using Clock = std::function<std::string()>;
std::string UtcNow();

// Translates every record per the job's field policy. The cache is consulted
// before the provider, misses are deduplicated and sent in batches of
// job.batch_size with up to job.max_concurrency batches in flight. A warm
// cache means zero provider calls.
TranslationOutcome TranslateDataset(const TranslationJob& job,
                                    std::span<const RawRecord> records,
                                    const TranslationProvider& provider,
                                    const Clock& clock = UtcNow);

// Writes a dataset file the corpus loaders accept, with translated fields
// substituted. CSV output always carries an "id" column.
void WriteTranslatedDataset(const std::filesystem::path& path,
                            const RawDataset& source,
                            std::span<const TranslatedRecord> translated);

void WriteTranslatedRecords(const std::filesystem::path& path,
                            std::span<const TranslatedRecord> records);
std::vector<TranslatedRecord> ReadTranslatedRecords(
    const std::filesystem::path& path);

// Deterministic sample of n ids without replacement, returned in source
// order. Uses mt19937_64 with rejection sampling so the sample is identical
// on every platform. Throws ValidationError if n exceeds the id count.
std::vector<std::string> SampleForReview(std::span<const std::string> ids,
                                         std::size_t n, std::uint64_t seed);

// Review tasks for `sample_ids`: the source text joins the translatable fields
// with newlines; each provider's output contributes one candidate.
std::vector<ReviewTask> BuildReviewTasks(
    DatasetKind kind, std::string_view language,
    std::span<const std::string> sample_ids,
    const std::map<std::string, std::vector<TranslatedRecord>>& by_provider);

}  // namespace biaseval

#endif  // BIASEVAL_TRANSLATE_H_
