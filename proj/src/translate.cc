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


#include "biaseval/translate.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <thread>
#include <unordered_map>

#include "biaseval/csv.h"
#include "biaseval/io.h"

namespace biaseval {

using json = nlohmann::json;

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string IdText(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  return value.dump();
}

std::string FieldText(const json& value) {
  return value.is_string() ? value.get<std::string>() : CanonicalDump(value);
}

std::string RecordId(DatasetKind kind, const json& rec, std::size_t row) {
  if (auto it = rec.find("id"); it != rec.end()) return IdText(*it);
  auto need = [&](const char* name) -> const json& {
    auto it = rec.find(name);
    if (it == rec.end()) throw ParseError(row, name, "missing field");
    return *it;
  };
  switch (kind) {
    case DatasetKind::kCrowsPairs:
      return std::to_string(row);
    case DatasetKind::kBbq:
      return FieldText(need("category")) + "-" + IdText(need("example_id"));
    case DatasetKind::kBelebele:
      return FieldText(need("link")) + "#" + IdText(need("question_number"));
  }
  return std::to_string(row);
}

bool IsTranslatable(DatasetKind kind, const std::string& field) {
  const auto& fields = TranslatableFields(kind);
  return std::find(fields.begin(), fields.end(), field) != fields.end();
}

struct Checkpoint {
  std::string fingerprint;
  std::set<std::size_t> batches_done;
  std::size_t batch_count = 0;
  bool complete = false;
};

void WriteCheckpoint(const std::string& path, const Checkpoint& cp) {
  if (path.empty()) return;
  json j = {{"fingerprint", cp.fingerprint},
            {"batch_count", cp.batch_count},
            {"batches_done", cp.batches_done},
            {"complete", cp.complete}};
  WriteFileAtomic(path, j.dump(2) + "\n");
}

std::uint64_t UniformBelow(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t max = std::mt19937_64::max();
  const std::uint64_t limit = max - (max % bound + 1) % bound;
  while (true) {
    const std::uint64_t x = engine();
    if (x <= limit) return x % bound;
  }
}

}  // namespace

// ---- Providers --------------------------------------------------------------

std::string MockProvider::Apply(std::string_view text,
                                std::string_view language) {
  std::string out;
  out.reserve(text.size() * 2);
  bool in_word = false;
  for (char c : text) {
    if (IsSpace(c)) {
      in_word = false;
    } else if (!in_word) {
      out.append(language);
      out.push_back(':');
      in_word = true;
    }
    out.push_back(c);
  }
  return out;
}

std::string MockProvider::Reverse(std::string_view text,
                                  std::string_view language) {
  const std::string marker = std::string(language) + ":";
  std::string out;
  std::size_t i = 0;
  bool at_word_start = true;
  while (i < text.size()) {
    if (IsSpace(text[i])) {
      at_word_start = true;
      out.push_back(text[i++]);
      continue;
    }
    if (at_word_start && text.substr(i, marker.size()) == marker) {
      i += marker.size();
    }
    at_word_start = false;
    out.push_back(text[i++]);
  }
  return out;
}

std::vector<std::string> MockProvider::Translate(
    std::string_view, std::string_view target_language,
    std::span<const std::string> texts) const {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Apply(t, target_language));
  return out;
}

// ---- Jobs -------------------------------------------------------------------

const std::vector<std::string>& TranslatableFields(DatasetKind kind) {
  static const std::vector<std::string> crows = {"sent_more", "sent_less"};
  static const std::vector<std::string> bbq = {"context", "question", "ans0",
                                               "ans1", "ans2"};
  static const std::vector<std::string> belebele = {
      "flores_passage", "question",    "mc_answer1",
      "mc_answer2",     "mc_answer3", "mc_answer4"};
  switch (kind) {
    case DatasetKind::kCrowsPairs:
      return crows;
    case DatasetKind::kBbq:
      return bbq;
    case DatasetKind::kBelebele:
      return belebele;
  }
  return crows;
}

TranslationJob TranslationJob::ForDataset(DatasetKind kind,
                                          std::string source_language,
                                          std::string target_language,
                                          std::string provider_id) {
  TranslationJob job;
  job.kind = kind;
  job.source_language = std::move(source_language);
  job.target_language = std::move(target_language);
  job.provider_id = std::move(provider_id);
  for (const auto& f : TranslatableFields(kind)) {
    job.field_policy[f] = FieldPolicy::kTranslate;
  }
  return job;
}

void TranslationJob::Validate() const {
  if (source_language.empty() || target_language.empty()) {
    throw UsageError("translation job needs source and target languages");
  }
  if (provider_id.empty()) throw UsageError("translation job needs a provider");
  if (batch_size == 0) throw UsageError("batch_size must be positive");
  if (max_concurrency < 1) throw UsageError("max_concurrency must be >= 1");
  if (max_retries < 0) throw UsageError("max_retries must be >= 0");
  for (const auto& [field, policy] : field_policy) {
    if (policy == FieldPolicy::kTranslate && !IsTranslatable(kind, field)) {
      throw ValidationError("field '" + field +
                            "' is metadata for " +
                            std::string(DatasetKindName(kind)) +
                            " and must be copied, not translated");
    }
  }
}

std::string TranslationJob::Fingerprint() const {
  json policy = json::object();
  for (const auto& [field, p] : field_policy) {
    policy[field] = p == FieldPolicy::kTranslate ? "translate" : "copy";
  }
  json j = {{"kind", DatasetKindName(kind)},
            {"source_language", source_language},
            {"target_language", target_language},
            {"provider_id", provider_id},
            {"field_policy", policy},
            {"batch_size", batch_size}};
  return Sha256Hex(CanonicalDump(j));
}

RawDataset ReadRawDataset(DatasetKind kind, const std::filesystem::path& path) {
  RawDataset out;
  out.kind = kind;
  const std::string text = ReadFile(path);
  std::set<std::string> seen;
  auto add = [&](RawRecord rec, std::size_t row) {
    if (!seen.insert(rec.id).second) {
      throw ValidationError("row " + std::to_string(row) + ": duplicate id '" +
                            rec.id + "'");
    }
    out.records.push_back(std::move(rec));
  };
  if (kind == DatasetKind::kCrowsPairs) {
    const CsvTable table = ParseCsv(text);
    out.csv_header = table.header;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      RawRecord rec;
      rec.object = json::object();
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        rec.object[table.header[c]] = table.rows[r][c];
      }
      rec.id = RecordId(kind, rec.object, r + 1);
      add(std::move(rec), r + 1);
    }
    return out;
  }
  const std::vector<json> rows = ParseJsonLines(text);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_object()) {
      throw ParseError(r + 1, "<record>", "expected object");
    }
    RawRecord rec{RecordId(kind, rows[r], r + 1), rows[r]};
    add(std::move(rec), r + 1);
  }
  return out;
}

json ToJson(const TranslatedRecord& record) {
  return {{"id", record.id},
          {"source_texts", record.source_texts},
          {"target_texts", record.target_texts},
          {"provider_id", record.provider_id},
          {"timestamp", record.timestamp},
          {"flags", record.flags}};
}

TranslatedRecord TranslatedRecordFromJson(const json& j) {
  TranslatedRecord r;
  r.id = j.at("id").get<std::string>();
  r.source_texts = j.at("source_texts").get<std::map<std::string, std::string>>();
  r.target_texts = j.at("target_texts").get<std::map<std::string, std::string>>();
  r.provider_id = j.at("provider_id").get<std::string>();
  r.timestamp = j.value("timestamp", "");
  r.flags = j.value("flags", std::vector<std::string>{});
  return r;
}

// ---- Cache ------------------------------------------------------------------

std::string TranslationCache::Key(std::string_view provider,
                                  std::string_view source,
                                  std::string_view target,
                                  std::string_view text) {
  std::string key(provider);
  key += '\x1f';
  key += source;
  key += '\x1f';
  key += target;
  key += '\x1f';
  key += Sha256Hex(text);
  return key;
}

std::optional<TranslationCache::Entry> TranslationCache::Get(
    std::string_view provider, std::string_view source, std::string_view target,
    std::string_view text) const {
  auto value = store_.Get(Key(provider, source, target, text));
  if (!value || !value->is_object()) return std::nullopt;
  auto t = value->find("t");
  if (t == value->end() || !t->is_string()) return std::nullopt;
  return Entry{t->get<std::string>(), value->value("ts", "")};
}

void TranslationCache::Put(std::string_view provider, std::string_view source,
                           std::string_view target, std::string_view text,
                           const Entry& entry) {
  store_.Put(Key(provider, source, target, text),
             json{{"t", entry.translation}, {"ts", entry.timestamp}});
}

std::string UtcNow() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- Translation ------------------------------------------------------------

TranslationOutcome TranslateDataset(const TranslationJob& job,
                                    std::span<const RawRecord> records,
                                    const TranslationProvider& provider,
                                    const Clock& clock) {
  job.Validate();
  if (provider.id() != job.provider_id) {
    throw UsageError("job names provider '" + job.provider_id +
                     "' but was given '" + provider.id() + "'");
  }
  TranslationOutcome outcome;

  std::unique_ptr<TranslationCache> cache;
  if (!job.cache_uri.empty()) {
    cache = std::make_unique<TranslationCache>(job.cache_uri);
  }

  // Unique non-empty texts that need translating, in first-seen order.
  std::vector<std::string> texts;
  std::unordered_map<std::string, TranslationCache::Entry> done;
  {
    std::set<std::string> queued;
    for (const auto& rec : records) {
      for (const auto& [field, policy] : job.field_policy) {
        if (policy != FieldPolicy::kTranslate) continue;
        auto it = rec.object.find(field);
        if (it == rec.object.end() || !it->is_string()) continue;
        const std::string text = it->get<std::string>();
        if (text.empty() || done.count(text) || queued.count(text)) continue;
        if (cache) {
          if (auto hit = cache->Get(job.provider_id, job.source_language,
                                    job.target_language, text)) {
            done.emplace(text, *hit);
            ++outcome.cache_hits;
            continue;
          }
        }
        queued.insert(text);
        texts.push_back(text);
      }
    }
  }

  const std::size_t batch_count =
      (texts.size() + job.batch_size - 1) / job.batch_size;
  // Batches finished by an earlier run are cache hits by now, so a resumed
  // job starts a fresh checkpoint over the remaining texts.
  Checkpoint checkpoint;
  checkpoint.fingerprint = job.Fingerprint();
  checkpoint.batch_count = batch_count;

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> sent{0};

  auto worker = [&] {
    while (!failed) {
      const std::size_t b = next.fetch_add(1);
      if (b >= batch_count) return;
      const std::size_t lo = b * job.batch_size;
      const std::size_t hi = std::min(texts.size(), lo + job.batch_size);
      std::span<const std::string> batch(texts.data() + lo, hi - lo);
      std::vector<std::string> result;
      std::string last_error;
      bool ok = false;
      for (int attempt = 0; attempt <= job.max_retries && !ok; ++attempt) {
        try {
          ++calls;
          sent += batch.size();
          result = provider.Translate(job.source_language, job.target_language,
                                      batch);
          if (result.size() != batch.size()) {
            throw TransportError("provider returned " +
                                 std::to_string(result.size()) +
                                 " translations for " +
                                 std::to_string(batch.size()) + " texts");
          }
          ok = true;
        } catch (const TransportError& e) {
          last_error = e.what();
          if (attempt < job.max_retries) {
            std::this_thread::sleep_for(std::chrono::milliseconds(10 * (attempt + 1)));
          }
        }
      }
      std::lock_guard<std::mutex> lock(mu);
      if (!ok) {
        if (!failed) {
          failure = "batch " + std::to_string(b) + " failed after " +
                    std::to_string(job.max_retries + 1) +
                    " attempt(s): " + last_error;
        }
        failed = true;
        return;
      }
      const std::string ts = clock();
      for (std::size_t i = 0; i < batch.size(); ++i) {
        TranslationCache::Entry entry{result[i], ts};
        // Empty outputs are per-record errors and never cached.
        if (cache && !result[i].empty()) {
          cache->Put(job.provider_id, job.source_language, job.target_language,
                     batch[i], entry);
        }
        done.emplace(batch[i], std::move(entry));
      }
      checkpoint.batches_done.insert(b);
      WriteCheckpoint(job.checkpoint_uri, checkpoint);
    }
  };

  const int n_threads = static_cast<int>(
      std::min<std::size_t>(job.max_concurrency, std::max<std::size_t>(batch_count, 1)));
  std::vector<std::thread> threads;
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  for (int t = 0; t < n_threads; ++t) {
    threads.emplace_back([&] {
      try {
        worker();
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        failed = true;
      }
    });
  }
  for (auto& t : threads) t.join();
  outcome.provider_calls = calls;
  outcome.provider_texts = sent;
  if (fatal) std::rethrow_exception(fatal);
  if (failed) {
    WriteCheckpoint(job.checkpoint_uri, checkpoint);
    throw TranslationHalted(
        "translation halted: " + failure + " (" +
            std::to_string(checkpoint.batches_done.size()) + "/" +
            std::to_string(batch_count) +
            " batches done; rerun the job to resume)",
        checkpoint.batches_done.size());
  }
  checkpoint.complete = true;
  WriteCheckpoint(job.checkpoint_uri, checkpoint);

  for (const auto& rec : records) {
    TranslatedRecord out;
    out.id = rec.id;
    out.provider_id = job.provider_id;
    std::string error;
    for (const auto& [field, value] : rec.object.items()) {
      const std::string source = FieldText(value);
      out.source_texts[field] = source;
      auto policy = job.field_policy.find(field);
      const bool translate = policy != job.field_policy.end() &&
                             policy->second == FieldPolicy::kTranslate &&
                             value.is_string() && !source.empty();
      if (!translate) {
        out.target_texts[field] = source;
        continue;
      }
      const auto& entry = done.at(source);
      if (entry.translation.empty()) {
        error = "empty translation for field '" + field + "'";
        break;
      }
      out.target_texts[field] = entry.translation;
      out.timestamp = std::max(out.timestamp, entry.timestamp);
    }
    if (!error.empty()) {
      outcome.errors.push_back({rec.id, error});
      continue;
    }
    if (job.kind == DatasetKind::kBbq && out.source_texts.count("context")) {
      const std::string& src_ctx = out.source_texts["context"];
      const std::string& tgt_ctx = out.target_texts["context"];
      for (int k = 0; k < 3; ++k) {
        const std::string field = "ans" + std::to_string(k);
        auto s = out.source_texts.find(field);
        if (s == out.source_texts.end() || s->second.empty()) continue;
        const std::string& t = out.target_texts[field];
        if (src_ctx.find(s->second) != std::string::npos &&
            tgt_ctx.find(t) == std::string::npos) {
          out.flags.push_back("option " + field +
                              " no longer appears verbatim in the translated "
                              "context");
        }
      }
    }
    outcome.records.push_back(std::move(out));
  }
  return outcome;
}

void WriteTranslatedDataset(const std::filesystem::path& path,
                            const RawDataset& source,
                            std::span<const TranslatedRecord> translated) {
  std::unordered_map<std::string, const TranslatedRecord*> by_id;
  for (const auto& t : translated) by_id.emplace(t.id, &t);

  std::string out;
  if (source.kind == DatasetKind::kCrowsPairs) {
    std::vector<std::string> header = source.csv_header;
    const bool has_id =
        std::find(header.begin(), header.end(), "id") != header.end();
    if (!has_id) header.insert(header.begin(), "id");
    out += FormatCsvRow(header);
    for (const auto& rec : source.records) {
      auto it = by_id.find(rec.id);
      if (it == by_id.end()) continue;
      std::vector<std::string> row;
      for (const auto& col : header) {
        if (col == "id" && !has_id) {
          row.push_back(rec.id);
        } else {
          row.push_back(it->second->target_texts.at(col));
        }
      }
      out += FormatCsvRow(row);
    }
  } else {
    for (const auto& rec : source.records) {
      auto it = by_id.find(rec.id);
      if (it == by_id.end()) continue;
      json obj = rec.object;
      if (!obj.contains("id")) obj["id"] = rec.id;
      for (const auto& [field, value] : rec.object.items()) {
        if (!value.is_string()) continue;
        obj[field] = it->second->target_texts.at(field);
      }
      out += obj.dump(-1, ' ', false, json::error_handler_t::strict);
      out += '\n';
    }
  }
  WriteFileAtomic(path, out);
}

void WriteTranslatedRecords(const std::filesystem::path& path,
                            std::span<const TranslatedRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += CanonicalDump(ToJson(r));
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

std::vector<TranslatedRecord> ReadTranslatedRecords(
    const std::filesystem::path& path) {
  std::vector<TranslatedRecord> out;
  for (const auto& j : ParseJsonLines(ReadFile(path))) {
    out.push_back(TranslatedRecordFromJson(j));
  }
  return out;
}

std::vector<std::string> SampleForReview(std::span<const std::string> ids,
                                         std::size_t n, std::uint64_t seed) {
  if (n > ids.size()) {
    throw ValidationError("cannot sample " + std::to_string(n) + " of " +
                          std::to_string(ids.size()) + " records");
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 engine(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + UniformBelow(engine, ids.size() - i);
    std::swap(order[i], order[j]);
  }
  order.resize(n);
  std::sort(order.begin(), order.end());
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i : order) out.push_back(ids[i]);
  return out;
}

std::vector<ReviewTask> BuildReviewTasks(
    DatasetKind kind, std::string_view language,
    std::span<const std::string> sample_ids,
    const std::map<std::string, std::vector<TranslatedRecord>>& by_provider) {
  std::map<std::string, std::unordered_map<std::string, const TranslatedRecord*>>
      index;
  for (const auto& [provider, recs] : by_provider) {
    for (const auto& r : recs) index[provider].emplace(r.id, &r);
  }
  std::vector<ReviewTask> tasks;
  for (const auto& id : sample_ids) {
    ReviewTask task;
    task.sample_id = id;
    task.language = std::string(language);
    bool have_source = false;
    for (const auto& [provider, recs] : index) {
      auto it = recs.find(id);
      if (it == recs.end()) continue;
      std::string source, target;
      for (const auto& field : TranslatableFields(kind)) {
        auto s = it->second->source_texts.find(field);
        if (s == it->second->source_texts.end()) continue;
        if (!source.empty()) {
          source += '\n';
          target += '\n';
        }
        source += s->second;
        target += it->second->target_texts.at(field);
      }
      if (!have_source) {
        task.source_text = source;
        have_source = true;
      } else if (task.source_text != source) {
        throw ValidationError("providers disagree on the source text of '" +
                              id + "'");
      }
      task.candidate_translations[provider] = target;
    }
    if (!have_source) {
      throw ValidationError("sample id '" + id + "' has no translations");
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

// ---- Review tasks -----------------------------------------------------------

json ToJson(const ReviewTask& task) {
  return {{"sample_id", task.sample_id},
          {"language", task.language},
          {"source_text", task.source_text},
          {"candidates", task.candidate_translations}};
}

ReviewTask ReviewTaskFromJson(const json& j) {
  ReviewTask t;
  t.sample_id = j.at("sample_id").get<std::string>();
  t.language = j.at("language").get<std::string>();
  t.source_text = j.at("source_text").get<std::string>();
  t.candidate_translations =
      j.at("candidates").get<std::map<std::string, std::string>>();
  if (t.sample_id.empty()) throw ValidationError("review task without sample_id");
  return t;
}

std::vector<ReviewTask> ReadReviewTasks(const std::filesystem::path& path) {
  std::vector<ReviewTask> out;
  std::size_t row = 0;
  for (const auto& j : ParseJsonLines(ReadFile(path))) {
    ++row;
    try {
      out.push_back(ReviewTaskFromJson(j));
    } catch (const json::exception& e) {
      throw ParseError(row, "<task>", e.what());
    }
  }
  return out;
}

void WriteReviewTasks(const std::filesystem::path& path,
                      const std::vector<ReviewTask>& tasks) {
  std::string out;
  for (const auto& t : tasks) {
    out += CanonicalDump(ToJson(t));
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

}  // namespace biaseval
