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


#include <gtest/gtest.h>

#include <map>
#include <set>

#include "biaseval/annotate.h"
#include "biaseval/annotate_server.h"
#include "biaseval/error.h"
#include "httplib.h"
#include "json.hpp"
#include "testing/synthetic.h"

namespace biaseval {
namespace {

using ::biaseval::testing::AnnotatorCounts;
using ::biaseval::testing::TempDir;
using json = nlohmann::json;

std::string FixedClock() { return "2026-03-04T05:06:07Z"; }

const std::vector<std::string> kProviders{"DeepL", "MetaTranslator"};

// Bias counts in fixtures are (same, more, less, not_reasonable).
Histogram Expected(const AnnotatorCounts& c) {
  Histogram h;
  h.quality = c.quality;
  h.bias[static_cast<int>(BiasJudgment::kSame)] = c.bias[0];
  h.bias[static_cast<int>(BiasJudgment::kMore)] = c.bias[1];
  h.bias[static_cast<int>(BiasJudgment::kLess)] = c.bias[2];
  h.bias[static_cast<int>(BiasJudgment::kNotReasonable)] = c.bias[3];
  return h;
}

// A store holding the fixture per-annotator tables for both providers.
class FixtureStore {
 public:
  FixtureStore() : store_(":memory:", FixedClock) {
    std::vector<Annotator> annotators;
    std::set<std::string> languages;
    for (const auto& c : testing::FixtureCounts("DeepL")) {
      annotators.push_back({c.annotator, "tok-" + c.annotator, {}});
      languages.insert(c.language);
    }
    store_.ProvisionAnnotators(annotators);
    for (const auto& lang : languages) {
      const auto tasks = testing::MakeReviewTasks(lang, 58, kProviders);
      store_.ImportTasks(tasks);
    }
    for (const auto& provider : kProviders) {
      for (const auto& c : testing::FixtureCounts(provider)) {
        for (auto r : testing::RecordsFromCounts(c, provider)) store_.Submit(r);
      }
    }
  }
  AnnotationStore& store() { return store_; }

 private:
  AnnotationStore store_;
};

TEST(AnnotationNamesTest, RoundTrip) {
  for (int q = 0; q < kNumQualityLevels; ++q) {
    EXPECT_EQ(ParseQuality(QualityName(static_cast<Quality>(q))), static_cast<Quality>(q));
  }
  for (int b = 0; b < kNumBiasJudgments; ++b) {
    const auto j = static_cast<BiasJudgment>(b);
    EXPECT_EQ(ParseBiasJudgment(BiasJudgmentName(j)), j);
  }
  EXPECT_FALSE(ParseQuality("great").has_value());
  EXPECT_EQ(BiasJudgmentName(BiasJudgment::kNotReasonable), "not_reasonable");
}

TEST(AnnotationRecordTest, JsonErrorsNameTheField) {
  const json good{{"sample_id", "1"}, {"annotator_id", "A1"}, {"language", "de"},
                  {"provider_id", "DeepL"}, {"quality", "bumpy"},
                  {"bias_judgment", "more"}, {"comment", ""}, {"timestamp", ""}};
  EXPECT_EQ(AnnotationRecordFromJson(good).quality, Quality::kBumpy);
  json numeric = good;
  numeric["quality"] = 0;
  EXPECT_EQ(AnnotationRecordFromJson(numeric).quality, Quality::kWrong);
  for (const auto& [field, value] :
       std::vector<std::pair<std::string, json>>{{"quality", "great"},
                                                 {"quality", 3},
                                                 {"bias_judgment", "worse"},
                                                 {"sample_id", 5}}) {
    json bad = good;
    bad[field] = value;
    try {
      AnnotationRecordFromJson(bad);
      FAIL() << field;
    } catch (const FieldError& e) {
      EXPECT_EQ(e.field(), field);
    }
  }
  json missing = good;
  missing.erase("bias_judgment");
  try {
    AnnotationRecordFromJson(missing);
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.field(), "bias_judgment");
  }
}

TEST(AnnotatorsTest, TokenFromEnvironment) {
  setenv("BIASEVAL_TEST_TOKEN", "from-env", 1);
  const auto a = AnnotatorsFromJson(json::parse(
      R"([{"id": "A1", "token": "t1"}, {"id": "A2", "token_env": "BIASEVAL_TEST_TOKEN",
           "languages": ["fr"]}])"));
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[1].token, "from-env");
  EXPECT_EQ(a[1].languages, std::vector<std::string>{"fr"});
  EXPECT_THROW(AnnotatorsFromJson(json::parse(R"([{"id": "A3", "token_env": "NOPE_UNSET_X"}])")),
               Error);
}

TEST(AnnotatorTablesTest, HistogramsRoundTrip) {
  FixtureStore fixture;
  for (const auto& provider : kProviders) {
    for (const auto& c : testing::FixtureCounts(provider)) {
      const AnnotationSummary s = fixture.store().Summarize(c.language, provider);
      ASSERT_EQ(s.per_annotator.count(c.annotator), 1u) << provider << c.annotator;
      EXPECT_EQ(s.per_annotator.at(c.annotator), Expected(c)) << provider << " " << c.annotator;
    }
  }
}

TEST(AnnotatorTablesTest, AveragesAreMeansOfAnnotatorCounts) {
  FixtureStore fixture;
  const AnnotationSummary de = fixture.store().Summarize("de", "MetaTranslator");
  ASSERT_EQ(de.per_annotator.size(), 2u);
  // A1 {0,23,35}, A2 {4,13,41}.
  EXPECT_DOUBLE_EQ(de.average_quality[0], 2.0);
  EXPECT_DOUBLE_EQ(de.average_quality[1], 18.0);
  EXPECT_DOUBLE_EQ(de.average_quality[2], 38.0);
  const AnnotationSummary none = fixture.store().Summarize("xx", "DeepL");
  EXPECT_TRUE(none.per_annotator.empty());
  EXPECT_EQ(none.average_quality[2], 0.0);
}

TEST(AnnotatorTablesTest, CountsSumToSampleSize) {
  for (const auto& provider : kProviders) {
    for (const auto& c : testing::FixtureCounts(provider)) {
      EXPECT_EQ(c.quality[0] + c.quality[1] + c.quality[2], 58u);
      EXPECT_EQ(c.bias[0] + c.bias[1] + c.bias[2] + c.bias[3], 58u);
    }
  }
}

AnnotationRecord Rec(std::string sample, std::string annotator, std::string provider,
                     Quality q = Quality::kCorrect, BiasJudgment b = BiasJudgment::kSame,
                     std::string language = "de") {
  AnnotationRecord r;
  r.sample_id = std::move(sample);
  r.annotator_id = std::move(annotator);
  r.language = std::move(language);
  r.provider_id = std::move(provider);
  r.quality = q;
  r.bias_judgment = b;
  return r;
}

class StoreTest : public ::testing::Test {
 protected:
  StoreTest() : store_(":memory:", FixedClock) {
    const std::vector<Annotator> annotators{{"A1", "tok1", {}}, {"A2", "tok2", {"de"}}};
    store_.ProvisionAnnotators(annotators);
    store_.ImportTasks(testing::MakeReviewTasks("de", 12, kProviders));
    store_.ImportTasks(testing::MakeReviewTasks("fr", 12, kProviders));
  }
  AnnotationStore store_;
};

TEST_F(StoreTest, SchemaAndAuth) {
  EXPECT_EQ(store_.schema_version(), AnnotationStore::kSchemaVersion);
  EXPECT_EQ(store_.Authenticate("tok1"), "A1");
  EXPECT_FALSE(store_.Authenticate("nope").has_value());
  EXPECT_TRUE(store_.HasAnnotator("A2"));
  EXPECT_FALSE(store_.HasAnnotator("A9"));
}

TEST_F(StoreTest, ImportIsIdempotent) {
  EXPECT_EQ(store_.ImportTasks(testing::MakeReviewTasks("de", 14, kProviders)), 2u);
  EXPECT_EQ(store_.Tasks("de").size(), 14u);
  EXPECT_EQ(store_.Tasks().size(), 26u);
  const auto tasks = store_.Tasks("de");
  EXPECT_EQ(tasks[1].sample_id, "2");
  EXPECT_EQ(tasks[9].sample_id, "10");
}

TEST_F(StoreTest, ExclusionsFromNotReasonable) {
  const auto flagged = {std::string("17"), std::string("1204")};
  store_.ImportTasks(std::vector<ReviewTask>{
      {"17", "de", testing::kFlaggedSentenceA, {{"DeepL", "x"}, {"MetaTranslator", "y"}}, {}},
      {"1204", "de", testing::kFlaggedSentenceB, {{"DeepL", "x"}, {"MetaTranslator", "y"}}, {}}});
  EXPECT_TRUE(store_.Exclusions().empty());
  std::size_t before = 0;
  for (const auto& id : flagged) {
    const auto ack = store_.Submit(
        Rec(id, "A1", "DeepL", Quality::kCorrect, BiasJudgment::kNotReasonable));
    EXPECT_TRUE(ack.flagged_for_exclusion);
    EXPECT_GT(store_.Exclusions().size(), before);
    before = store_.Exclusions().size();
  }
  // Flagged again by another annotator and provider: still counted once.
  store_.Submit(Rec("17", "A2", "MetaTranslator", Quality::kBumpy,
                    BiasJudgment::kNotReasonable));
  EXPECT_EQ(store_.Exclusions(), (IdSet{"17", "1204"}));
  const auto ack = store_.Submit(Rec("3", "A1", "DeepL"));
  EXPECT_FALSE(ack.flagged_for_exclusion);
  EXPECT_EQ(store_.Exclusions().size(), 2u);
}

TEST(ExclusionsTest, MonotoneInRecords) {
  std::vector<AnnotationRecord> records;
  std::size_t last = 0;
  for (int i = 0; i < 40; ++i) {
    records.push_back(Rec(std::to_string(i % 13), "A1", "DeepL", Quality::kCorrect,
                          i % 3 == 0 ? BiasJudgment::kNotReasonable : BiasJudgment::kSame));
    const std::size_t n = DeriveExclusions(records).size();
    ASSERT_GE(n, last);
    last = n;
  }
}

TEST_F(StoreTest, OverwriteKeepsAuditTrail) {
  const auto first = store_.Submit(Rec("1", "A1", "DeepL", Quality::kBumpy));
  EXPECT_TRUE(first.stored);
  EXPECT_FALSE(first.overwritten);
  EXPECT_EQ(first.version, 1);
  const auto second = store_.Submit(Rec("1", "A1", "DeepL", Quality::kCorrect));
  EXPECT_TRUE(second.overwritten);
  EXPECT_EQ(second.version, 2);
  const auto records = store_.Records("de", "DeepL");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].quality, Quality::kCorrect);
  EXPECT_EQ(records[0].timestamp, FixedClock());
  const auto audit = store_.Audit();
  ASSERT_EQ(audit.size(), 2u);
  EXPECT_EQ(audit[0].action, "insert");
  EXPECT_EQ(audit[0].record.quality, Quality::kBumpy);
  EXPECT_EQ(audit[1].action, "overwrite");
  EXPECT_LT(audit[0].seq, audit[1].seq);
}

TEST_F(StoreTest, SameSampleIdInTwoLanguagesIsDistinct) {
  store_.Submit(Rec("1", "A1", "DeepL", Quality::kWrong, BiasJudgment::kSame, "de"));
  const auto ack =
      store_.Submit(Rec("1", "A1", "DeepL", Quality::kCorrect, BiasJudgment::kSame, "fr"));
  EXPECT_FALSE(ack.overwritten);
  EXPECT_EQ(store_.Records().size(), 2u);
}

TEST_F(StoreTest, RejectsInvalidSubmissions) {
  EXPECT_THROW(store_.Submit(Rec("999", "A1", "DeepL")), NotFoundError);
  EXPECT_THROW(store_.Submit(Rec("1", "A9", "DeepL")), NotFoundError);
  try {
    store_.Submit(Rec("1", "A1", "Google"));
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.field(), "provider_id");
  }
  try {
    store_.Submit(Rec("1", "A2", "DeepL", Quality::kCorrect, BiasJudgment::kSame, "fr"));
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.field(), "language");
  }
  EXPECT_TRUE(store_.Records().empty());
}

TEST_F(StoreTest, InterleavedAnnotatorsSeeEachTaskOnce) {
  std::map<std::string, std::vector<std::string>> seen;
  bool progress = true;
  while (progress) {
    progress = false;
    for (const std::string annotator : {"A1", "A2"}) {
      auto task = store_.ServeNextTask(annotator, "de");
      if (!task) continue;
      progress = true;
      seen[annotator].push_back(task->sample_id);
      for (const auto& [provider, text] : task->candidate_translations) {
        store_.Submit(Rec(task->sample_id, annotator, provider));
      }
    }
  }
  for (const std::string annotator : {"A1", "A2"}) {
    ASSERT_EQ(seen[annotator].size(), 12u) << annotator;
    EXPECT_EQ(std::set<std::string>(seen[annotator].begin(), seen[annotator].end()).size(),
              12u);
    EXPECT_EQ(seen[annotator].front(), "1");
    EXPECT_EQ(seen[annotator].back(), "12");
  }
  EXPECT_TRUE(store_.ServeNextTask("A1", "fr").has_value());
  EXPECT_THROW(store_.ServeNextTask("A9", "de"), NotFoundError);
}

TEST_F(StoreTest, PartiallyRatedTaskIsServedAgain) {
  store_.Submit(Rec("1", "A1", "DeepL"));
  EXPECT_EQ(store_.ServeNextTask("A1", "de")->sample_id, "1");
  store_.Submit(Rec("1", "A1", "MetaTranslator"));
  EXPECT_EQ(store_.ServeNextTask("A1", "de")->sample_id, "2");
}

TEST(StorePersistenceTest, SurvivesReopen) {
  TempDir dir;
  const auto path = dir / "annotations.sqlite";
  std::vector<AnnotationRecord> before;
  {
    AnnotationStore store(path, FixedClock);
    store.ProvisionAnnotators(std::vector<Annotator>{{"A1", "tok1", {}}});
    store.ImportTasks(testing::MakeReviewTasks("it", 5, kProviders));
    store.Submit(Rec("2", "A1", "DeepL", Quality::kBumpy, BiasJudgment::kLess, "it"));
    store.Submit(Rec("2", "A1", "DeepL", Quality::kWrong, BiasJudgment::kLess, "it"));
    before = store.Records();
  }
  AnnotationStore reopened(path, FixedClock);
  EXPECT_EQ(reopened.schema_version(), AnnotationStore::kSchemaVersion);
  EXPECT_EQ(reopened.Records(), before);
  EXPECT_EQ(reopened.Audit().size(), 2u);
  EXPECT_EQ(reopened.Authenticate("tok1"), "A1");
  EXPECT_EQ(reopened.Tasks("it").size(), 5u);
}

TEST(AgreementTest, SingleAnnotatorIsInsufficient) {
  const std::vector<AnnotationRecord> records{Rec("1", "A1", "DeepL"),
                                              Rec("2", "A1", "DeepL")};
  const auto report = AgreementFor(records, "de", "DeepL");
  EXPECT_EQ(report.status, "insufficient annotators");
  EXPECT_TRUE(report.pairs.empty());
}

TEST(AgreementTest, PairwiseKappaOverSharedItems) {
  std::vector<AnnotationRecord> records;
  const std::vector<Quality> a{Quality::kCorrect, Quality::kCorrect, Quality::kBumpy,
                               Quality::kWrong};
  const std::vector<Quality> b{Quality::kCorrect, Quality::kBumpy, Quality::kBumpy,
                               Quality::kWrong};
  for (std::size_t i = 0; i < a.size(); ++i) {
    records.push_back(Rec(std::to_string(i), "A1", "DeepL", a[i]));
    records.push_back(Rec(std::to_string(i), "A2", "DeepL", b[i]));
  }
  records.push_back(Rec("99", "A1", "DeepL"));  // not shared
  records.push_back(Rec("0", "A3", "DeepL", Quality::kCorrect, BiasJudgment::kSame, "fr"));
  const auto report = AgreementFor(records, "de", "DeepL");
  EXPECT_EQ(report.status, "ok");
  ASSERT_EQ(report.pairs.size(), 1u);
  EXPECT_EQ(report.pairs[0].n_shared, 4u);
  ASSERT_TRUE(report.pairs[0].result.has_value());
  const std::vector<int> ai{2, 2, 1, 0}, bi{2, 1, 1, 0};
  EXPECT_EQ(report.pairs[0].result->kappa, CohensKappa(ai, bi, 3).kappa);
  const auto linear = AgreementFor(records, "de", "DeepL", KappaWeighting::kLinear);
  EXPECT_EQ(linear.pairs[0].result->kappa,
            CohensKappa(ai, bi, 3, KappaWeighting::kLinear).kappa);
}

TEST(AgreementTest, NoSharedItems) {
  const std::vector<AnnotationRecord> records{Rec("1", "A1", "DeepL"),
                                              Rec("2", "A2", "DeepL")};
  const auto report = AgreementFor(records, "de", "DeepL");
  ASSERT_EQ(report.pairs.size(), 1u);
  EXPECT_EQ(report.pairs[0].status, "no shared items");
  EXPECT_FALSE(report.pairs[0].result.has_value());
}

class ServerTest : public StoreTest {
 protected:
  void SetUp() override {
    server_ = std::make_unique<AnnotationServer>(store_, AnnotationServerOptions{});
    port_ = server_->Start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(5, 0);
  }
  void TearDown() override { server_->Stop(); }

  httplib::Headers Auth(const std::string& token) {
    return {{"Authorization", "Bearer " + token}};
  }
  httplib::Result Post(const std::string& token, const json& body) {
    return client_->Post("/api/annotations", Auth(token), body.dump(), "application/json");
  }

  std::unique_ptr<AnnotationServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

json Body(const std::string& sample, const std::string& provider = "DeepL") {
  return json{{"sample_id", sample}, {"language", "de"}, {"provider_id", provider},
              {"quality", "correct"}, {"bias_judgment", "same"}};
}

TEST_F(ServerTest, RequiresToken) {
  auto res = client_->Get("/api/whoami");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 401);
  res = client_->Get("/api/whoami", Auth("wrong"));
  EXPECT_EQ(res->status, 401);
  res = client_->Get("/api/whoami", Auth("tok1"));
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body).at("annotator_id"), "A1");
}

TEST_F(ServerTest, SubmitAndServe) {
  auto res = client_->Get("/api/tasks/next?language=de", Auth("tok1"));
  ASSERT_EQ(res->status, 200);
  const json task = json::parse(res->body);
  EXPECT_EQ(task.at("sample_id"), "1");
  EXPECT_EQ(task.at("status"), "pending");
  EXPECT_EQ(task.at("candidates").size(), 2u);

  res = Post("tok1", Body("1"));
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(json::parse(res->body).at("version"), 1);
  res = Post("tok1", Body("1", "MetaTranslator"));
  ASSERT_EQ(res->status, 200);
  res = client_->Get("/api/tasks/next?language=de", Auth("tok1"));
  EXPECT_EQ(json::parse(res->body).at("sample_id"), "2");
}

TEST_F(ServerTest, NothingLeftIs204) {
  for (int i = 1; i <= 12; ++i) {
    for (const auto& p : kProviders) {
      ASSERT_EQ(Post("tok2", Body(std::to_string(i), p))->status, 200);
    }
  }
  EXPECT_EQ(client_->Get("/api/tasks/next?language=de", Auth("tok2"))->status, 204);
}

TEST_F(ServerTest, ErrorStatuses) {
  json other = Body("1");
  other["annotator_id"] = "A2";
  auto res = Post("tok1", other);
  EXPECT_EQ(res->status, 403);
  EXPECT_EQ(json::parse(res->body).at("field"), "annotator_id");

  json bad = Body("1");
  bad["quality"] = "superb";
  res = Post("tok1", bad);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body).at("field"), "quality");

  res = Post("tok1", Body("404"));
  EXPECT_EQ(res->status, 404);

  res = client_->Post("/api/annotations", Auth("tok1"), "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_TRUE(store_.Records().empty());
}

TEST_F(ServerTest, ExportSummaryAgreementExclusions) {
  json flagged = Body("3");
  flagged["bias_judgment"] = "not_reasonable";
  ASSERT_EQ(Post("tok1", flagged)->status, 200);
  ASSERT_EQ(Post("tok2", Body("3"))->status, 200);

  auto res = client_->Get("/api/export", Auth("tok1"));
  ASSERT_EQ(res->status, 200);
  std::size_t lines = 0;
  for (char c : res->body) lines += c == '\n';
  EXPECT_EQ(lines, 2u);

  res = client_->Get("/api/exclusions", Auth("tok2"));
  ASSERT_EQ(res->status, 200);
  const json ex = json::parse(res->body);
  EXPECT_EQ(ex.at("dataset_kind"), "crows_pairs");
  EXPECT_EQ(ex.at("excluded_ids"), json::array({"3"}));

  res = client_->Get("/api/summary?language=de&provider_id=DeepL", Auth("tok1"));
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body).at("per_annotator").size(), 2u);

  res = client_->Get("/api/agreement?language=de&provider_id=DeepL&weighting=linear",
                     Auth("tok1"));
  ASSERT_EQ(res->status, 200);
  const json agreement = json::parse(res->body);
  EXPECT_EQ(agreement.at("status"), "ok");
  EXPECT_EQ(agreement.at("weighting"), "linear");
}

TEST_F(ServerTest, ServesConsolePage) {
  auto res = client_->Get("/");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
}

}  // namespace
}  // namespace biaseval
