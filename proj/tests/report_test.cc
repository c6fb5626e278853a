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

#include <algorithm>
#include <cmath>

#include "biaseval/error.h"
#include "biaseval/io.h"
#include "biaseval/report.h"
#include "testing/oracles.h"
#include "testing/synthetic.h"

namespace biaseval {
namespace {

CrowsCategoryMetrics Crows(BiasCategory c, std::size_t n, std::size_t n_more) {
  CrowsCategoryMetrics m;
  m.category = c;
  m.n = n;
  m.n_prefers_stereotype = n_more;
  m.pct_stereotype = static_cast<double>(n_more) / static_cast<double>(n);
  m.mean_diff = 0.0;
  return m;
}

EvaluationReport CrowsReport(std::string model, std::string language,
                             std::vector<CrowsCategoryMetrics> metrics) {
  EvaluationReport r;
  r.run_id = "crows_pairs-" + language + "-" + model + "-000000000000";
  r.run_manifest = r.run_id + ".manifest.json";
  r.kind = DatasetKind::kCrowsPairs;
  r.model_id = std::move(model);
  r.language = std::move(language);
  r.crows = std::move(metrics);
  for (const auto& m : r.crows) r.n_examples += m.n;
  ComputeMicroaverages(r);
  return r;
}

EvaluationReport BelebeleReport(std::string model, std::string size,
                                std::string language, double accuracy) {
  EvaluationReport r;
  r.run_id = "belebele-" + language + "-" + model;
  r.kind = DatasetKind::kBelebele;
  r.model_id = std::move(model);
  r.model_size = std::move(size);
  r.language = std::move(language);
  r.belebele_accuracy = accuracy;
  r.n_examples = 900;
  return r;
}

TEST(FormatTest, CellValues) {
  HeatmapSpec crows;
  crows.transform = Transform::kPctMinus50;
  EXPECT_EQ(FormatCell(crows, 0.5), "0.0");
  EXPECT_EQ(FormatCell(crows, 1.0), "50.0");
  EXPECT_EQ(FormatCell(crows, 0.0), "-50.0");
  EXPECT_EQ(FormatCell(crows, std::nullopt), "n/a");
  HeatmapSpec bbq;
  bbq.transform = Transform::kTimes100;
  EXPECT_EQ(FormatCell(bbq, -1.0), "-100.0");
  EXPECT_EQ(FormatCell(bbq, 0.608), "60.8");
  EXPECT_EQ(FormatValue(-0.0), "0.0");
  EXPECT_EQ(FormatValue(-0.04), "0.0");
  EXPECT_EQ(FormatValue(-0.05 - 1e-9), "-0.1");
}

TEST(FormatTest, Transforms) {
  EXPECT_EQ(ApplyTransform(Transform::kIdentity, 0.25), 0.25);
  EXPECT_EQ(ApplyTransform(Transform::kPctMinus50, 0.25), -25.0);
  EXPECT_EQ(ApplyTransform(Transform::kTimes100, 0.25), 25.0);
}

TEST(CrowsHeatmapTest, TwoModelsThreeCategories) {
  const std::vector<EvaluationReport> reports{
      CrowsReport("zeta", "de", {Crows(BiasCategory::kGender, 10, 7),
                                 Crows(BiasCategory::kAge, 4, 1),
                                 Crows(BiasCategory::kReligion, 6, 3)}),
      CrowsReport("alpha", "en", {Crows(BiasCategory::kGender, 20, 10),
                                  Crows(BiasCategory::kAge, 5, 5),
                                  Crows(BiasCategory::kReligion, 8, 2)})};
  const HeatmapSpec spec = BuildCrowsHeatmap(reports);
  EXPECT_EQ(spec.rows, (std::vector<std::string>{"alpha (en)", "zeta (de)"}));
  std::vector<std::string> expected_cols;
  for (BiasCategory c : kAllCategories) {
    if (c == BiasCategory::kGender || c == BiasCategory::kAge ||
        c == BiasCategory::kReligion) {
      expected_cols.emplace_back(CategoryName(c));
    }
  }
  expected_cols.push_back("microavg");
  EXPECT_EQ(spec.cols, expected_cols);

  // Exact oracle for each rendered cell.
  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    const auto& report = *std::find_if(reports.begin(), reports.end(), [&](const auto& x) {
      return RowLabel(x) == spec.rows[r];
    });
    std::vector<std::pair<double, std::size_t>> items;
    for (std::size_t c = 0; c + 1 < spec.cols.size(); ++c) {
      const auto& m = *std::find_if(report.crows.begin(), report.crows.end(), [&](const auto& x) {
        return CategoryName(x.category) == spec.cols[c];
      });
      const mpq_class pct(static_cast<long>(m.n_prefers_stereotype), static_cast<long>(m.n));
      EXPECT_EQ(*spec.values[r][c], testing::RoundToDouble(pct));
      items.push_back({*m.pct_stereotype, m.n});
    }
    EXPECT_EQ(*spec.values[r].back(), testing::OracleMicroaverage(items));
  }
  const std::string csv = RenderCsv(spec);
  EXPECT_NE(csv.find("alpha (en),0.0,-25.0,50.0,1.5\n"), std::string::npos) << csv;
}

TEST(CrowsHeatmapTest, MissingCategoryIsNa) {
  const std::vector<EvaluationReport> reports{
      CrowsReport("a", "en", {Crows(BiasCategory::kGender, 2, 1)}),
      CrowsReport("b", "en", {Crows(BiasCategory::kAge, 2, 2)})};
  const std::string md = RenderMarkdown(BuildCrowsHeatmap(reports));
  EXPECT_NE(md.find("| a (en) | 0.0 | n/a | 0.0 |"), std::string::npos) << md;
}

TEST(MicroaverageTest, BbqWeights) {
  EvaluationReport r;
  r.kind = DatasetKind::kBbq;
  BbqCategoryMetrics a, b;
  a.category = BiasCategory::kAge;
  a.n_ambiguous = 10;
  a.n_disambiguated = 30;
  a.acc_overall = 0.5;
  a.acc_ambiguous = 0.2;
  a.s_dis = 0.1;
  b.category = BiasCategory::kGender;
  b.n_ambiguous = 30;
  b.n_disambiguated = 10;
  b.acc_overall = 0.75;
  b.acc_ambiguous = 0.6;
  b.s_dis = std::nullopt;
  r.bbq = {a, b};
  ComputeMicroaverages(r);
  EXPECT_DOUBLE_EQ(r.microaverage.at("acc_overall"), 0.625);
  EXPECT_DOUBLE_EQ(r.microaverage.at("acc_ambiguous"), 0.5);
  EXPECT_DOUBLE_EQ(r.microaverage.at("s_dis"), 0.1);
  EXPECT_EQ(r.microaverage.count("s_amb"), 0u);
}

TEST(BbqHeatmapTest, FiveMapsTimes100) {
  EvaluationReport r;
  r.kind = DatasetKind::kBbq;
  r.model_id = "m";
  r.language = "en";
  BbqCategoryMetrics m;
  m.category = BiasCategory::kAge;
  m.n_ambiguous = 5;
  m.n_disambiguated = 5;
  m.acc_overall = 0.608;
  m.acc_ambiguous = 0.5;
  m.acc_disambiguated = 0.716;
  m.s_amb = -1.0;
  m.s_dis = 0.0;
  r.bbq = {m};
  ComputeMicroaverages(r);
  const std::vector<EvaluationReport> reports{r};
  const auto maps = BuildBbqHeatmaps(reports);
  std::vector<std::string> names;
  for (const auto& n : maps) names.push_back(n.name);
  EXPECT_EQ(names, (std::vector<std::string>{"bbq_acc_overall", "bbq_acc_ambiguous",
                                             "bbq_acc_disambiguated", "bbq_bias_ambiguous",
                                             "bbq_bias_disambiguated"}));
  EXPECT_EQ(FormatCell(maps[0].spec, maps[0].spec.values[0][0]), "60.8");
  EXPECT_EQ(FormatCell(maps[3].spec, maps[3].spec.values[0][0]), "-100.0");
  EXPECT_EQ(maps[3].spec.scale, ColorScale::kDiverging);
  EXPECT_EQ(maps[3].spec.lo, -100.0);
  EXPECT_EQ(maps[0].spec.scale, ColorScale::kSequential);
}

TEST(BelebeleTableTest, FixtureRow) {
  const std::vector<BelebeleRow> rows{{"en-mono", "2.6B", "en", 0.317}};
  EXPECT_EQ(RenderBelebeleTable(rows),
            "| Model | Size | Language | Accuracy |\n"
            "|---|---|---|---:|\n"
            "| en-mono | 2.6B | English | 31.7 |\n");
}

TEST(BelebeleTableTest, EmptyIsHeaderOnly) {
  EXPECT_EQ(RenderBelebeleTable({}),
            "| Model | Size | Language | Accuracy |\n|---|---|---|---:|\n");
}

TEST(BelebeleTableTest, SortedByModelThenLanguageName) {
  const std::vector<BelebeleRow> rows{{"b", "1B", "de", 0.4},
                                      {"a", "1B", "fr", 0.3},
                                      {"a", "1B", "en", 0.25},
                                      {"a", "1B", "es", 0.5}};
  const std::string t = RenderBelebeleTable(rows);
  const auto english = t.find("English"), french = t.find("French"),
             spanish = t.find("Spanish"), german = t.find("German");
  EXPECT_LT(english, french);
  EXPECT_LT(french, spanish);
  EXPECT_LT(spanish, german);
  EXPECT_EQ(LanguageName("it"), "Italian");
  EXPECT_EQ(LanguageName("tlh"), "tlh");
}

TEST(HeatmapSpecTest, ShapeIsValidated) {
  HeatmapSpec spec;
  spec.rows = {"a"};
  spec.cols = {"x", "y"};
  spec.values = {{0.1}};
  EXPECT_THROW(spec.Validate(), ValidationError);
  EXPECT_THROW(RenderSvg(spec), ValidationError);
}

TEST(SvgTest, ColorsFollowScale) {
  HeatmapSpec spec;
  spec.rows = {"m (en)"};
  spec.cols = {"lo", "mid", "hi"};
  spec.values = {{-1.0, 0.0, 1.0}};
  spec.transform = Transform::kTimes100;
  spec.scale = ColorScale::kDiverging;
  spec.lo = -100;
  spec.hi = 100;
  const std::string svg = RenderSvg(spec);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("fill=\"#ffffff\" stroke"), std::string::npos) << svg;
  EXPECT_NE(svg.find(">-100.0<"), std::string::npos);
  EXPECT_NE(svg.find(">100.0<"), std::string::npos);
}

TEST(RenderReportsTest, WritesBundleDeterministically) {
  testing::TempDir dir;
  std::vector<EvaluationReport> reports{
      CrowsReport("m", "en", {Crows(BiasCategory::kGender, 4, 3)}),
      BelebeleReport("en-mono", "2.6B", "en", 0.317)};
  const auto first = RenderReports(reports, dir / "a");
  std::reverse(reports.begin(), reports.end());
  const auto second = RenderReports(reports, dir / "b");
  ASSERT_EQ(first.size(), second.size());
  ASSERT_EQ(first.size(), 5u);
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].filename(), second[i].filename());
    EXPECT_EQ(ReadFile(first[i]), ReadFile(second[i])) << first[i];
  }
  EXPECT_NE(ReadFile(dir / "a" / "belebele.md").find("| en-mono | 2.6B | English | 31.7 |"),
            std::string::npos);
}

TEST(EvaluationReportTest, JsonRoundTrip) {
  const EvaluationReport r =
      CrowsReport("m", "fr", {Crows(BiasCategory::kAge, 3, 2), Crows(BiasCategory::kRace, 5, 1)});
  const EvaluationReport back = EvaluationReportFromJson(ToJson(r));
  EXPECT_EQ(back.crows, r.crows);
  EXPECT_EQ(back.microaverage, r.microaverage);
  EXPECT_EQ(back.run_id, r.run_id);
  EXPECT_EQ(back.kind, r.kind);
}

}  // namespace
}  // namespace biaseval
