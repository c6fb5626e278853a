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

#ifndef BIASEVAL_REPORT_H_
#define BIASEVAL_REPORT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biaseval/corpus.h"
#include "biaseval/metrics.h"
#include "json.hpp"

namespace biaseval {

// Contents of a <run_id>.metrics.json file: one model on one language split of
// one dataset.
struct EvaluationReport {
  std::string run_id;
  std::string run_manifest;  // file name of the run manifest, same directory
  DatasetKind kind = DatasetKind::kCrowsPairs;
  std::string model_id;
  std::string model_size;  // free text such as "2.6B"; may be empty
  std::string language;
  std::vector<CrowsCategoryMetrics> crows;
  std::vector<BbqCategoryMetrics> bbq;
  std::optional<double> belebele_accuracy;
  std::size_t n_examples = 0;
  // Frequency-weighted over categories; see ComputeMicroaverages.
  std::map<std::string, double> microaverage;
};

nlohmann::json ToJson(const EvaluationReport& report);
EvaluationReport EvaluationReportFromJson(const nlohmann::json& json);
EvaluationReport ReadEvaluationReport(const std::filesystem::path& path);

// Fills report.microaverage. CrowS: pct_stereotype weighted by pair count.
// BBQ: acc_overall by example count, acc_ambiguous and s_amb by ambiguous
// count, acc_disambiguated and s_dis by disambiguated count. Categories where
// a metric is absent do not contribute to it.
void ComputeMicroaverages(EvaluationReport& report);

enum class Transform { kIdentity, kPctMinus50, kTimes100 };
double ApplyTransform(Transform transform, double value);

enum class ColorScale { kSequential, kDiverging };

struct HeatmapSpec {
  std::string title;
  std::vector<std::string> rows;  // model labels
  std::vector<std::string> cols;  // categories, then "microavg"
  // Raw metric fractions; the transform applies only when rendering.
  std::vector<std::vector<std::optional<double>>> values;
  Transform transform = Transform::kIdentity;
  ColorScale scale = ColorScale::kSequential;
  double lo = 0.0;  // bounds of the color scale, in rendered units
  double hi = 100.0;

  // Throws ValidationError when the matrix does not match rows x cols.
  void Validate() const;
};

// One decimal, with negative zero printed as "0.0".
std::string FormatValue(double rendered);
// "n/a" for absent cells.
std::string FormatCell(const HeatmapSpec& spec, const std::optional<double>& raw);

std::string RenderSvg(const HeatmapSpec& spec);
std::string RenderCsv(const HeatmapSpec& spec);
std::string RenderMarkdown(const HeatmapSpec& spec);

// "<model_id> (<language>)"; rows are ordered by model then language.
std::string RowLabel(const EvaluationReport& report);

// Cells are pct_stereotype * 100 - 50, so 0 means no preference.
HeatmapSpec BuildCrowsHeatmap(std::span<const EvaluationReport> reports);

struct NamedHeatmap {
  std::string name;  // file stem
  HeatmapSpec spec;
};

// Overall, ambiguous and disambiguated accuracy; ambiguous and disambiguated
// bias. All rendered times 100.
std::vector<NamedHeatmap> BuildBbqHeatmaps(
    std::span<const EvaluationReport> reports);

struct BelebeleRow {
  std::string model;
  std::string size;
  std::string language;  // code or name; codes are shown as names
  double accuracy = 0.0;  // fraction
};

// English display name for a language code, or the input unchanged.
std::string LanguageName(std::string_view code);

// Markdown grid "| Model | Size | Language | Accuracy |", rows sorted by model
// then language display name, stable.
std::string RenderBelebeleTable(std::span<const BelebeleRow> rows);
std::string RenderBelebeleCsv(std::span<const BelebeleRow> rows);

// Renders every report in `reports` into `out_dir` (heatmaps as .svg, .csv and
// .md; Belebele as a table) and returns the written paths, sorted.
std::vector<std::filesystem::path> RenderReports(
    std::span<const EvaluationReport> reports,
    const std::filesystem::path& out_dir);

}  // namespace biaseval

#endif  // BIASEVAL_REPORT_H_
