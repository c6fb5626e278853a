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


#include "biaseval/annotate.h"

#include <sqlite3.h>

#include <algorithm>
#include <cstdlib>
#include <set>

#include "biaseval/io.h"

namespace biaseval {

using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, kNumQualityLevels> kQualityNames = {
    "wrong", "bumpy", "correct"};
constexpr std::array<std::string_view, kNumBiasJudgments> kBiasNames = {
    "same", "more", "less", "none", "not_reasonable"};

// Schema versions are applied in order; index i migrates from i to i + 1.
constexpr const char* kMigrations[] = {
    R"sql(
CREATE TABLE annotators (
  id TEXT PRIMARY KEY,
  token_sha256 TEXT NOT NULL UNIQUE,
  languages TEXT NOT NULL DEFAULT '[]'
);
CREATE TABLE tasks (
  language TEXT NOT NULL,
  sample_id TEXT NOT NULL,
  source_text TEXT NOT NULL,
  PRIMARY KEY (language, sample_id)
);
CREATE TABLE candidates (
  language TEXT NOT NULL,
  sample_id TEXT NOT NULL,
  provider_id TEXT NOT NULL,
  text TEXT NOT NULL,
  PRIMARY KEY (language, sample_id, provider_id)
);
CREATE TABLE annotations (
  language TEXT NOT NULL,
  sample_id TEXT NOT NULL,
  annotator_id TEXT NOT NULL REFERENCES annotators(id),
  provider_id TEXT NOT NULL,
  quality INTEGER NOT NULL CHECK (quality BETWEEN 0 AND 2),
  bias_judgment TEXT NOT NULL,
  comment TEXT NOT NULL,
  timestamp TEXT NOT NULL,
  version INTEGER NOT NULL,
  PRIMARY KEY (language, sample_id, annotator_id, provider_id)
);
CREATE TABLE audit (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  action TEXT NOT NULL,
  record TEXT NOT NULL
);
)sql",
};
static_assert(std::size(kMigrations) == AnnotationStore::kSchemaVersion);

[[noreturn]] void Fail(sqlite3* db, const std::string& what) {
  throw Error("annotation store: " + what + ": " + sqlite3_errmsg(db));
}

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      Fail(db, "prepare");
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& Bind(int i, std::string_view text) {
    sqlite3_bind_text(stmt_, i, text.data(), static_cast<int>(text.size()),
                      SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& Bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  // True while rows remain.
  bool Step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    Fail(db_, "step");
  }
  void Run() {
    while (Step()) {
    }
  }
  std::string Text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p),
                           sqlite3_column_bytes(stmt_, col))
             : std::string();
  }
  std::int64_t Int(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void Exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(std::string("annotation store: ") + msg);
  }
}

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { Exec(db_, "BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!committed_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void Commit() {
    Exec(db_, "COMMIT");
    committed_ = true;
  }

 private:
  sqlite3* db_;
  bool committed_ = false;
};

const std::string& RequireString(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw FieldError(field, "required string field");
  }
  return it->get_ref<const std::string&>();
}

AnnotationRecord RecordFromRow(const Stmt& s) {
  AnnotationRecord r;
  r.language = s.Text(0);
  r.sample_id = s.Text(1);
  r.annotator_id = s.Text(2);
  r.provider_id = s.Text(3);
  r.quality = static_cast<Quality>(s.Int(4));
  r.bias_judgment = *ParseBiasJudgment(s.Text(5));
  r.comment = s.Text(6);
  r.timestamp = s.Text(7);
  return r;
}

// Throws NotFoundError for an unknown annotator and FieldError when the
// annotator is restricted to other languages.
void CheckAssignment(sqlite3* db, std::string_view annotator_id,
                     std::string_view language) {
  Stmt s(db, "SELECT languages FROM annotators WHERE id = ?");
  s.Bind(1, annotator_id);
  if (!s.Step()) {
    throw NotFoundError("unknown annotator '" + std::string(annotator_id) + "'");
  }
  const auto languages = json::parse(s.Text(0)).get<std::vector<std::string>>();
  if (!languages.empty() &&
      std::find(languages.begin(), languages.end(), language) == languages.end()) {
    throw FieldError("language", "annotator '" + std::string(annotator_id) +
                                     "' is not assigned to language '" +
                                     std::string(language) + "'");
  }
}

bool RecordLess(const AnnotationRecord& a, const AnnotationRecord& b) {
  if (a.language != b.language) return a.language < b.language;
  if (a.sample_id != b.sample_id) return NaturalLess(a.sample_id, b.sample_id);
  if (a.annotator_id != b.annotator_id) return a.annotator_id < b.annotator_id;
  return a.provider_id < b.provider_id;
}

}  // namespace

std::string_view QualityName(Quality q) {
  return kQualityNames[static_cast<int>(q)];
}

std::optional<Quality> ParseQuality(std::string_view name) {
  for (int i = 0; i < kNumQualityLevels; ++i) {
    if (kQualityNames[i] == name) return static_cast<Quality>(i);
  }
  return std::nullopt;
}

std::string_view BiasJudgmentName(BiasJudgment b) {
  return kBiasNames[static_cast<int>(b)];
}

std::optional<BiasJudgment> ParseBiasJudgment(std::string_view name) {
  for (int i = 0; i < kNumBiasJudgments; ++i) {
    if (kBiasNames[i] == name) return static_cast<BiasJudgment>(i);
  }
  return std::nullopt;
}

json ToJson(const AnnotationRecord& r) {
  return {{"sample_id", r.sample_id},
          {"annotator_id", r.annotator_id},
          {"language", r.language},
          {"provider_id", r.provider_id},
          {"quality", QualityName(r.quality)},
          {"bias_judgment", BiasJudgmentName(r.bias_judgment)},
          {"comment", r.comment},
          {"timestamp", r.timestamp}};
}

AnnotationRecord AnnotationRecordFromJson(const json& j) {
  if (!j.is_object()) throw FieldError("<record>", "expected a JSON object");
  AnnotationRecord r;
  r.sample_id = RequireString(j, "sample_id");
  r.annotator_id = RequireString(j, "annotator_id");
  r.language = RequireString(j, "language");
  r.provider_id = RequireString(j, "provider_id");
  for (const char* f : {"sample_id", "annotator_id", "language", "provider_id"}) {
    if (j.at(f).get_ref<const std::string&>().empty()) {
      throw FieldError(f, "must be non-empty");
    }
  }
  auto q = j.find("quality");
  if (q == j.end()) throw FieldError("quality", "required field");
  if (q->is_string()) {
    auto parsed = ParseQuality(q->get_ref<const std::string&>());
    if (!parsed) {
      throw FieldError("quality", "expected wrong, bumpy or correct, got '" +
                                      q->get<std::string>() + "'");
    }
    r.quality = *parsed;
  } else if (q->is_number_integer() && q->get<long long>() >= 0 &&
             q->get<long long>() < kNumQualityLevels) {
    r.quality = static_cast<Quality>(q->get<int>());
  } else {
    throw FieldError("quality", "expected wrong, bumpy, correct or 0..2");
  }
  const std::string& b = RequireString(j, "bias_judgment");
  auto parsed = ParseBiasJudgment(b);
  if (!parsed) {
    throw FieldError("bias_judgment",
                     "expected same, more, less, none or not_reasonable, got '" +
                         b + "'");
  }
  r.bias_judgment = *parsed;
  if (auto c = j.find("comment"); c != j.end() && !c->is_null()) {
    if (!c->is_string()) throw FieldError("comment", "expected a string");
    r.comment = c->get<std::string>();
  }
  if (auto t = j.find("timestamp"); t != j.end() && !t->is_null()) {
    if (!t->is_string()) throw FieldError("timestamp", "expected a string");
    r.timestamp = t->get<std::string>();
  }
  return r;
}

std::vector<Annotator> AnnotatorsFromJson(const json& j) {
  if (!j.is_array()) throw ValidationError("annotators: expected an array");
  std::vector<Annotator> out;
  std::set<std::string> ids;
  for (const auto& a : j) {
    Annotator annotator;
    annotator.id = a.at("id").get<std::string>();
    if (annotator.id.empty()) throw ValidationError("annotator with empty id");
    if (!ids.insert(annotator.id).second) {
      throw ValidationError("duplicate annotator id '" + annotator.id + "'");
    }
    if (a.contains("token")) {
      annotator.token = a.at("token").get<std::string>();
    } else if (a.contains("token_env")) {
      const std::string var = a.at("token_env").get<std::string>();
      const char* value = std::getenv(var.c_str());
      if (!value) {
        throw UsageError("annotator " + annotator.id + ": environment variable " +
                         var + " is not set");
      }
      annotator.token = value;
    }
    if (annotator.token.empty()) {
      throw ValidationError("annotator " + annotator.id + " has no token");
    }
    annotator.languages =
        a.value("languages", std::vector<std::string>{});
    out.push_back(std::move(annotator));
  }
  return out;
}

json ToJson(const Acknowledgment& ack) {
  return {{"stored", ack.stored},
          {"overwritten", ack.overwritten},
          {"flagged_for_exclusion", ack.flagged_for_exclusion},
          {"version", ack.version}};
}

json ToJson(const AnnotationSummary& s) {
  json per = json::object();
  for (const auto& [id, h] : s.per_annotator) {
    json q = json::object(), b = json::object();
    for (int i = 0; i < kNumQualityLevels; ++i) q[kQualityNames[i]] = h.quality[i];
    for (int i = 0; i < kNumBiasJudgments; ++i) b[kBiasNames[i]] = h.bias[i];
    per[id] = {{"quality", q}, {"bias", b}};
  }
  json aq = json::object(), ab = json::object();
  for (int i = 0; i < kNumQualityLevels; ++i) aq[kQualityNames[i]] = s.average_quality[i];
  for (int i = 0; i < kNumBiasJudgments; ++i) ab[kBiasNames[i]] = s.average_bias[i];
  return {{"language", s.language},
          {"provider_id", s.provider_id},
          {"per_annotator", per},
          {"average", {{"quality", aq}, {"bias", ab}}}};
}

json ToJson(const AgreementReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"annotator_a", p.annotator_a},
                     {"annotator_b", p.annotator_b},
                     {"n_shared", p.n_shared},
                     {"status", p.status},
                     {"result", p.result ? ToJson(*p.result) : json(nullptr)}});
  }
  return {{"language", r.language},
          {"provider_id", r.provider_id},
          {"weighting", KappaWeightingName(r.weighting)},
          {"status", r.status},
          {"pairs", pairs}};
}

IdSet DeriveExclusions(std::span<const AnnotationRecord> records) {
  IdSet out;
  for (const auto& r : records) {
    if (r.bias_judgment == BiasJudgment::kNotReasonable) out.insert(r.sample_id);
  }
  return out;
}

AnnotationSummary SummarizeAnnotations(std::span<const AnnotationRecord> records,
                                       std::string_view language,
                                       std::string_view provider_id) {
  AnnotationSummary s;
  s.language = std::string(language);
  s.provider_id = std::string(provider_id);
  for (const auto& r : records) {
    if (r.language != language || r.provider_id != provider_id) continue;
    Histogram& h = s.per_annotator[r.annotator_id];
    ++h.quality[static_cast<int>(r.quality)];
    ++h.bias[static_cast<int>(r.bias_judgment)];
  }
  if (!s.per_annotator.empty()) {
    const double n = static_cast<double>(s.per_annotator.size());
    for (int i = 0; i < kNumQualityLevels; ++i) {
      std::size_t total = 0;
      for (const auto& [id, h] : s.per_annotator) total += h.quality[i];
      s.average_quality[i] = static_cast<double>(total) / n;
    }
    for (int i = 0; i < kNumBiasJudgments; ++i) {
      std::size_t total = 0;
      for (const auto& [id, h] : s.per_annotator) total += h.bias[i];
      s.average_bias[i] = static_cast<double>(total) / n;
    }
  }
  return s;
}

AgreementReport AgreementFor(std::span<const AnnotationRecord> records,
                             std::string_view language,
                             std::string_view provider_id,
                             KappaWeighting weighting) {
  AgreementReport report;
  report.language = std::string(language);
  report.provider_id = std::string(provider_id);
  report.weighting = weighting;
  std::map<std::string, std::map<std::string, int>> by_annotator;
  for (const auto& r : records) {
    if (r.language != language || r.provider_id != provider_id) continue;
    by_annotator[r.annotator_id][r.sample_id] = static_cast<int>(r.quality);
  }
  if (by_annotator.size() < 2) {
    report.status = "insufficient annotators";
    return report;
  }
  report.status = "ok";
  for (auto a = by_annotator.begin(); a != by_annotator.end(); ++a) {
    for (auto b = std::next(a); b != by_annotator.end(); ++b) {
      PairAgreement pair;
      pair.annotator_a = a->first;
      pair.annotator_b = b->first;
      std::vector<int> ra, rb;
      for (const auto& [sample, q] : a->second) {
        auto it = b->second.find(sample);
        if (it == b->second.end()) continue;
        ra.push_back(q);
        rb.push_back(it->second);
      }
      pair.n_shared = ra.size();
      if (ra.empty()) {
        pair.status = "no shared items";
      } else {
        pair.result = CohensKappa(ra, rb, kNumQualityLevels, weighting);
        pair.status = "ok";
      }
      report.pairs.push_back(std::move(pair));
    }
  }
  return report;
}

// ---- Store ------------------------------------------------------------------

AnnotationStore::AnnotationStore(const std::filesystem::path& path, Clock clock)
    : clock_(std::move(clock)) {
  const std::string p = path.string();
  if (p != ":memory:" && path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  if (sqlite3_open(p.c_str(), &db_) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error("annotation store: cannot open " + p + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  Exec(db_, "PRAGMA foreign_keys = ON");
  Migrate();
}

AnnotationStore::~AnnotationStore() { sqlite3_close(db_); }

int AnnotationStore::schema_version() const {
  std::lock_guard<std::mutex> lock(mu_);
  Stmt s(db_, "PRAGMA user_version");
  s.Step();
  return static_cast<int>(s.Int(0));
}

void AnnotationStore::Migrate() {
  int version;
  {
    Stmt s(db_, "PRAGMA user_version");
    s.Step();
    version = static_cast<int>(s.Int(0));
  }
  if (version > kSchemaVersion) {
    throw Error("annotation store has schema version " +
                std::to_string(version) + ", newer than supported " +
                std::to_string(kSchemaVersion));
  }
  for (; version < kSchemaVersion; ++version) {
    Transaction tx(db_);
    Exec(db_, kMigrations[version]);
    Exec(db_, ("PRAGMA user_version = " + std::to_string(version + 1)).c_str());
    tx.Commit();
  }
}

void AnnotationStore::ProvisionAnnotators(std::span<const Annotator> annotators) {
  std::lock_guard<std::mutex> lock(mu_);
  Transaction tx(db_);
  for (const auto& a : annotators) {
    Stmt s(db_,
           "INSERT INTO annotators (id, token_sha256, languages) VALUES (?, ?, ?) "
           "ON CONFLICT(id) DO UPDATE SET token_sha256 = excluded.token_sha256, "
           "languages = excluded.languages");
    s.Bind(1, a.id).Bind(2, Sha256Hex(a.token)).Bind(3, json(a.languages).dump());
    s.Run();
  }
  tx.Commit();
}

std::optional<std::string> AnnotationStore::Authenticate(
    std::string_view token) const {
  if (token.empty()) return std::nullopt;
  std::lock_guard<std::mutex> lock(mu_);
  Stmt s(db_, "SELECT id FROM annotators WHERE token_sha256 = ?");
  s.Bind(1, Sha256Hex(token));
  if (!s.Step()) return std::nullopt;
  return s.Text(0);
}

bool AnnotationStore::HasAnnotator(std::string_view annotator_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  Stmt s(db_, "SELECT 1 FROM annotators WHERE id = ?");
  s.Bind(1, annotator_id);
  return s.Step();
}

std::size_t AnnotationStore::ImportTasks(std::span<const ReviewTask> tasks) {
  for (const auto& t : tasks) {
    if (t.sample_id.empty() || t.language.empty()) {
      throw ValidationError("review task needs sample_id and language");
    }
    if (t.candidate_translations.empty()) {
      throw ValidationError("review task '" + t.sample_id +
                            "' has no candidate translations");
    }
  }
  std::lock_guard<std::mutex> lock(mu_);
  Transaction tx(db_);
  std::size_t added = 0;
  for (const auto& t : tasks) {
    {
      Stmt e(db_, "SELECT 1 FROM tasks WHERE language = ? AND sample_id = ?");
      e.Bind(1, t.language).Bind(2, t.sample_id);
      if (!e.Step()) ++added;
    }
    Stmt s(db_,
           "INSERT INTO tasks (language, sample_id, source_text) VALUES (?, ?, ?) "
           "ON CONFLICT(language, sample_id) DO UPDATE SET "
           "source_text = excluded.source_text");
    s.Bind(1, t.language).Bind(2, t.sample_id).Bind(3, t.source_text);
    s.Run();
    for (const auto& [provider, text] : t.candidate_translations) {
      Stmt c(db_,
             "INSERT INTO candidates (language, sample_id, provider_id, text) "
             "VALUES (?, ?, ?, ?) ON CONFLICT(language, sample_id, provider_id) "
             "DO UPDATE SET text = excluded.text");
      c.Bind(1, t.language).Bind(2, t.sample_id).Bind(3, provider).Bind(4, text);
      c.Run();
    }
  }
  tx.Commit();
  return added;
}

std::vector<ReviewTask> AnnotationStore::Tasks(
    std::optional<std::string> language) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::map<std::pair<std::string, std::string>, ReviewTask> tasks;
  {
    Stmt s(db_, "SELECT language, sample_id, source_text FROM tasks");
    while (s.Step()) {
      if (language && s.Text(0) != *language) continue;
      ReviewTask t;
      t.language = s.Text(0);
      t.sample_id = s.Text(1);
      t.source_text = s.Text(2);
      tasks.emplace(std::make_pair(t.language, t.sample_id), std::move(t));
    }
  }
  Stmt c(db_, "SELECT language, sample_id, provider_id, text FROM candidates");
  while (c.Step()) {
    auto it = tasks.find({c.Text(0), c.Text(1)});
    if (it != tasks.end()) it->second.candidate_translations[c.Text(2)] = c.Text(3);
  }
  std::vector<ReviewTask> out;
  for (auto& [key, t] : tasks) out.push_back(std::move(t));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.language != b.language) return a.language < b.language;
    return NaturalLess(a.sample_id, b.sample_id);
  });
  return out;
}

std::optional<ReviewTask> AnnotationStore::ServeNextTask(
    std::string_view annotator_id, std::string_view language) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    CheckAssignment(db_, annotator_id, language);
  }
  std::vector<ReviewTask> tasks = Tasks(std::string(language));
  std::set<std::pair<std::string, std::string>> rated;
  {
    std::lock_guard<std::mutex> lock(mu_);
    Stmt s(db_,
           "SELECT sample_id, provider_id FROM annotations "
           "WHERE annotator_id = ? AND language = ?");
    s.Bind(1, annotator_id).Bind(2, language);
    while (s.Step()) rated.emplace(s.Text(0), s.Text(1));
  }
  for (auto& t : tasks) {
    for (const auto& [provider, text] : t.candidate_translations) {
      if (!rated.count({t.sample_id, provider})) {
        t.status = TaskStatus::kPending;
        return std::move(t);
      }
    }
  }
  return std::nullopt;
}

Acknowledgment AnnotationStore::Submit(AnnotationRecord record) {
  if (record.timestamp.empty()) record.timestamp = clock_();
  std::lock_guard<std::mutex> lock(mu_);
  Transaction tx(db_);
  CheckAssignment(db_, record.annotator_id, record.language);
  {
    Stmt s(db_, "SELECT 1 FROM tasks WHERE language = ? AND sample_id = ?");
    s.Bind(1, record.language).Bind(2, record.sample_id);
    if (!s.Step()) {
      throw NotFoundError("unknown sample '" + record.sample_id +
                          "' for language '" + record.language + "'");
    }
  }
  {
    Stmt s(db_,
           "SELECT 1 FROM candidates WHERE language = ? AND sample_id = ? "
           "AND provider_id = ?");
    s.Bind(1, record.language).Bind(2, record.sample_id).Bind(3, record.provider_id);
    if (!s.Step()) {
      throw FieldError("provider_id", "sample '" + record.sample_id +
                                          "' has no candidate from provider '" +
                                          record.provider_id + "'");
    }
  }
  int version = 0;
  {
    Stmt s(db_,
           "SELECT version FROM annotations WHERE language = ? AND sample_id = ? "
           "AND annotator_id = ? AND provider_id = ?");
    s.Bind(1, record.language)
        .Bind(2, record.sample_id)
        .Bind(3, record.annotator_id)
        .Bind(4, record.provider_id);
    if (s.Step()) version = static_cast<int>(s.Int(0));
  }
  Acknowledgment ack;
  ack.overwritten = version > 0;
  ack.version = version + 1;
  {
    Stmt s(db_,
           "INSERT INTO annotations (language, sample_id, annotator_id, "
           "provider_id, quality, bias_judgment, comment, timestamp, version) "
           "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?) "
           "ON CONFLICT(language, sample_id, annotator_id, provider_id) DO UPDATE "
           "SET quality = excluded.quality, bias_judgment = excluded.bias_judgment, "
           "comment = excluded.comment, timestamp = excluded.timestamp, "
           "version = excluded.version");
    s.Bind(1, record.language)
        .Bind(2, record.sample_id)
        .Bind(3, record.annotator_id)
        .Bind(4, record.provider_id)
        .Bind(5, static_cast<std::int64_t>(record.quality))
        .Bind(6, BiasJudgmentName(record.bias_judgment))
        .Bind(7, record.comment)
        .Bind(8, record.timestamp)
        .Bind(9, static_cast<std::int64_t>(ack.version));
    s.Run();
  }
  {
    Stmt s(db_, "INSERT INTO audit (action, record) VALUES (?, ?)");
    s.Bind(1, ack.overwritten ? "overwrite" : "insert")
        .Bind(2, CanonicalDump(ToJson(record)));
    s.Run();
  }
  tx.Commit();
  ack.stored = true;
  ack.flagged_for_exclusion =
      record.bias_judgment == BiasJudgment::kNotReasonable;
  return ack;
}

std::vector<AnnotationRecord> AnnotationStore::Records(
    std::optional<std::string> language,
    std::optional<std::string> provider_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  Stmt s(db_,
         "SELECT language, sample_id, annotator_id, provider_id, quality, "
         "bias_judgment, comment, timestamp FROM annotations");
  std::vector<AnnotationRecord> out;
  while (s.Step()) {
    AnnotationRecord r = RecordFromRow(s);
    if (language && r.language != *language) continue;
    if (provider_id && r.provider_id != *provider_id) continue;
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), RecordLess);
  return out;
}

std::vector<AuditEntry> AnnotationStore::Audit() const {
  std::lock_guard<std::mutex> lock(mu_);
  Stmt s(db_, "SELECT seq, action, record FROM audit ORDER BY seq");
  std::vector<AuditEntry> out;
  while (s.Step()) {
    out.push_back({s.Int(0), s.Text(1),
                   AnnotationRecordFromJson(json::parse(s.Text(2)))});
  }
  return out;
}

AnnotationSummary AnnotationStore::Summarize(std::string_view language,
                                             std::string_view provider_id) const {
  const auto records = Records(std::string(language), std::string(provider_id));
  return SummarizeAnnotations(records, language, provider_id);
}

AgreementReport AnnotationStore::Agreement(std::string_view language,
                                           std::string_view provider_id,
                                           KappaWeighting weighting) const {
  const auto records = Records(std::string(language), std::string(provider_id));
  return AgreementFor(records, language, provider_id, weighting);
}

IdSet AnnotationStore::Exclusions() const {
  const auto records = Records();
  return DeriveExclusions(records);
}

}  // namespace biaseval
