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


#include "biaseval/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "biaseval/csv.h"
#include "biaseval/error.h"
#include "biaseval/io.h"

namespace biaseval {

using json = nlohmann::json;

namespace {

constexpr const char* kMicroColumn = "microavg";

json Opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string XmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string MarkdownEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

struct Rgb {
  int r, g, b;
};

Rgb Mix(Rgb a, Rgb b, double t) {
  auto lerp = [t](int x, int y) {
    return static_cast<int>(std::lround(x + (y - x) * t));
  };
  return {lerp(a.r, b.r), lerp(a.g, b.g), lerp(a.b, b.b)};
}

Rgb CellColor(const HeatmapSpec& spec, double rendered) {
  constexpr Rgb kWhite{255, 255, 255};
  constexpr Rgb kBlue{33, 102, 172};
  constexpr Rgb kRed{178, 24, 43};
  constexpr Rgb kGreen{0, 109, 44};
  if (spec.scale == ColorScale::kSequential) {
    const double t = std::clamp((rendered - spec.lo) / (spec.hi - spec.lo), 0.0, 1.0);
    return Mix(kWhite, kGreen, t);
  }
  const double bound = std::max(std::abs(spec.lo), std::abs(spec.hi));
  const double t = std::clamp(rendered / bound, -1.0, 1.0);
  return t < 0 ? Mix(kWhite, kBlue, -t) : Mix(kWhite, kRed, t);
}

std::string Hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

// Reports ordered by model then language; input order breaks ties.
std::vector<const EvaluationReport*> Ordered(
    std::span<const EvaluationReport> reports, DatasetKind kind) {
  std::vector<const EvaluationReport*> out;
  for (const auto& r : reports) {
    if (r.kind == kind) out.push_back(&r);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    if (a->model_id != b->model_id) return a->model_id < b->model_id;
    return a->language < b->language;
  });
  return out;
}

template <typename M>
std::vector<BiasCategory> CategoriesOf(
    const std::vector<const EvaluationReport*>& reports,
    std::vector<M> EvaluationReport::*member) {
  std::set<BiasCategory> present;
  for (const auto* r : reports) {
    for (const auto& m : r->*member) present.insert(m.category);
  }
  std::vector<BiasCategory> out;
  for (BiasCategory c : kAllCategories) {
    if (present.count(c)) out.push_back(c);
  }
  return out;
}

std::optional<double> MicroOf(const EvaluationReport& r, const std::string& key) {
  auto it = r.microaverage.find(key);
  if (it == r.microaverage.end()) return std::nullopt;
  return it->second;
}

}  // namespace

// ---- Evaluation reports -----------------------------------------------------

json ToJson(const EvaluationReport& r) {
  json j = {{"run_id", r.run_id},
            {"run_manifest", r.run_manifest},
            {"dataset_kind", DatasetKindName(r.kind)},
            {"model_id", r.model_id},
            {"model_size", r.model_size},
            {"language", r.language},
            {"n_examples", r.n_examples},
            {"microaverage", r.microaverage}};
  switch (r.kind) {
    case DatasetKind::kCrowsPairs: {
      json cats = json::array();
      for (const auto& m : r.crows) cats.push_back(ToJson(m));
      j["categories"] = cats;
      break;
    }
    case DatasetKind::kBbq: {
      json cats = json::array();
      for (const auto& m : r.bbq) cats.push_back(ToJson(m));
      j["categories"] = cats;
      break;
    }
    case DatasetKind::kBelebele:
      j["accuracy"] = Opt(r.belebele_accuracy);
      break;
  }
  return j;
}

EvaluationReport EvaluationReportFromJson(const json& j) {
  try {
    EvaluationReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.run_manifest = j.value("run_manifest", "");
    r.kind = ParseDatasetKind(j.at("dataset_kind").get<std::string>());
    r.model_id = j.at("model_id").get<std::string>();
    r.model_size = j.value("model_size", "");
    r.language = j.at("language").get<std::string>();
    r.n_examples = j.value("n_examples", std::size_t{0});
    r.microaverage = j.value("microaverage", std::map<std::string, double>{});
    switch (r.kind) {
      case DatasetKind::kCrowsPairs:
        for (const auto& m : j.at("categories")) {
          r.crows.push_back(CrowsCategoryMetricsFromJson(m));
        }
        break;
      case DatasetKind::kBbq:
        for (const auto& m : j.at("categories")) {
          r.bbq.push_back(BbqCategoryMetricsFromJson(m));
        }
        break;
      case DatasetKind::kBelebele:
        if (auto it = j.find("accuracy"); it != j.end() && !it->is_null()) {
          r.belebele_accuracy = it->get<double>();
        }
        break;
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("metrics file: ") + e.what());
  }
}

EvaluationReport ReadEvaluationReport(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return EvaluationReportFromJson(j);
}

void ComputeMicroaverages(EvaluationReport& report) {
  report.microaverage.clear();
  using Pairs = std::vector<std::pair<double, std::size_t>>;
  auto put = [&](const char* key, const Pairs& pairs) {
    if (!pairs.empty()) report.microaverage[key] = Microaverage(pairs);
  };
  auto add = [](Pairs& pairs, const std::optional<double>& v, std::size_t n) {
    if (v && n > 0) pairs.emplace_back(*v, n);
  };
  switch (report.kind) {
    case DatasetKind::kCrowsPairs: {
      Pairs pct;
      for (const auto& m : report.crows) add(pct, m.pct_stereotype, m.n);
      put("pct_stereotype", pct);
      break;
    }
    case DatasetKind::kBbq: {
      Pairs overall, amb, dis, s_amb, s_dis;
      for (const auto& m : report.bbq) {
        add(overall, m.acc_overall, m.n_examples());
        add(amb, m.acc_ambiguous, m.n_ambiguous);
        add(dis, m.acc_disambiguated, m.n_disambiguated);
        add(s_amb, m.s_amb, m.n_ambiguous);
        add(s_dis, m.s_dis, m.n_disambiguated);
      }
      put("acc_overall", overall);
      put("acc_ambiguous", amb);
      put("acc_disambiguated", dis);
      put("s_amb", s_amb);
      put("s_dis", s_dis);
      break;
    }
    case DatasetKind::kBelebele:
      if (report.belebele_accuracy) {
        report.microaverage["accuracy"] = *report.belebele_accuracy;
      }
      break;
  }
}

// ---- Heatmaps ---------------------------------------------------------------

double ApplyTransform(Transform transform, double value) {
  switch (transform) {
    case Transform::kIdentity:
      return value;
    case Transform::kPctMinus50:
      return value * 100.0 - 50.0;
    case Transform::kTimes100:
      return value * 100.0;
  }
  return value;
}

void HeatmapSpec::Validate() const {
  if (values.size() != rows.size()) {
    throw ValidationError("heatmap '" + title + "': " +
                          std::to_string(values.size()) + " value rows for " +
                          std::to_string(rows.size()) + " labels");
  }
  for (const auto& row : values) {
    if (row.size() != cols.size()) {
      throw ValidationError("heatmap '" + title + "': row of " +
                            std::to_string(row.size()) + " values for " +
                            std::to_string(cols.size()) + " columns");
    }
  }
  if (!(hi > lo)) throw ValidationError("heatmap '" + title + "': empty scale");
}

std::string FormatValue(double rendered) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", rendered);
  std::string s = buf;
  if (s == "-0.0") s = "0.0";
  return s;
}

std::string FormatCell(const HeatmapSpec& spec, const std::optional<double>& raw) {
  return raw ? FormatValue(ApplyTransform(spec.transform, *raw)) : "n/a";
}

std::string RenderCsv(const HeatmapSpec& spec) {
  spec.Validate();
  std::vector<std::string> header = {"model"};
  header.insert(header.end(), spec.cols.begin(), spec.cols.end());
  std::string out = FormatCsvRow(header);
  for (std::size_t i = 0; i < spec.rows.size(); ++i) {
    std::vector<std::string> row = {spec.rows[i]};
    for (const auto& v : spec.values[i]) row.push_back(FormatCell(spec, v));
    out += FormatCsvRow(row);
  }
  return out;
}

std::string RenderMarkdown(const HeatmapSpec& spec) {
  spec.Validate();
  std::string out = "| model |";
  for (const auto& c : spec.cols) out += " " + MarkdownEscape(c) + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < spec.cols.size(); ++i) out += "---:|";
  out += "\n";
  for (std::size_t i = 0; i < spec.rows.size(); ++i) {
    out += "| " + MarkdownEscape(spec.rows[i]) + " |";
    for (const auto& v : spec.values[i]) out += " " + FormatCell(spec, v) + " |";
    out += "\n";
  }
  return out;
}

std::string RenderSvg(const HeatmapSpec& spec) {
  spec.Validate();
  constexpr double kCellW = 72, kCellH = 28, kLabelW = 240, kTitleH = 32,
                   kHeaderH = 28, kPad = 8;
  const double width = kPad * 2 + kLabelW + kCellW * spec.cols.size();
  const double height = kPad * 2 + kTitleH + kHeaderH + kCellH * spec.rows.size();
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(width) +
         "\" height=\"" + Num(height) + "\" font-family=\"sans-serif\" "
         "font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + Num(kPad) + "\" y=\"" + Num(kPad + 18) +
         "\" font-size=\"14\" font-weight=\"bold\">" + XmlEscape(spec.title) +
         "</text>\n";
  const double top = kPad + kTitleH;
  for (std::size_t c = 0; c < spec.cols.size(); ++c) {
    const double x = kPad + kLabelW + kCellW * c + kCellW / 2;
    out += "<text x=\"" + Num(x) + "\" y=\"" + Num(top + 18) +
           "\" text-anchor=\"middle\">" + XmlEscape(spec.cols[c]) + "</text>\n";
  }
  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    const double y = top + kHeaderH + kCellH * r;
    out += "<text x=\"" + Num(kPad + kLabelW - 6) + "\" y=\"" +
           Num(y + 18) + "\" text-anchor=\"end\">" + XmlEscape(spec.rows[r]) +
           "</text>\n";
    for (std::size_t c = 0; c < spec.cols.size(); ++c) {
      const double x = kPad + kLabelW + kCellW * c;
      const auto& raw = spec.values[r][c];
      std::string fill = "#dddddd";
      std::string ink = "#000000";
      if (raw) {
        const Rgb color = CellColor(spec, ApplyTransform(spec.transform, *raw));
        fill = Hex(color);
        const double luma = 0.299 * color.r + 0.587 * color.g + 0.114 * color.b;
        if (luma < 128) ink = "#ffffff";
      }
      out += "<rect x=\"" + Num(x) + "\" y=\"" + Num(y) + "\" width=\"" +
             Num(kCellW) + "\" height=\"" + Num(kCellH) + "\" fill=\"" + fill +
             "\" stroke=\"#ffffff\"/>\n";
      out += "<text x=\"" + Num(x + kCellW / 2) + "\" y=\"" + Num(y + 18) +
             "\" text-anchor=\"middle\" fill=\"" + ink + "\">" +
             FormatCell(spec, raw) + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::string RowLabel(const EvaluationReport& report) {
  return report.model_id + " (" + report.language + ")";
}

HeatmapSpec BuildCrowsHeatmap(std::span<const EvaluationReport> reports) {
  const auto ordered = Ordered(reports, DatasetKind::kCrowsPairs);
  const auto categories = CategoriesOf(ordered, &EvaluationReport::crows);
  HeatmapSpec spec;
  spec.title = "CrowS-Pairs stereotype preference (percent - 50)";
  spec.transform = Transform::kPctMinus50;
  spec.scale = ColorScale::kDiverging;
  spec.lo = -50;
  spec.hi = 50;
  for (BiasCategory c : categories) spec.cols.emplace_back(CategoryName(c));
  spec.cols.emplace_back(kMicroColumn);
  for (const auto* r : ordered) {
    spec.rows.push_back(RowLabel(*r));
    std::vector<std::optional<double>> row;
    for (BiasCategory c : categories) {
      std::optional<double> v;
      for (const auto& m : r->crows) {
        if (m.category == c) v = m.pct_stereotype;
      }
      row.push_back(v);
    }
    row.push_back(MicroOf(*r, "pct_stereotype"));
    spec.values.push_back(std::move(row));
  }
  return spec;
}

std::vector<NamedHeatmap> BuildBbqHeatmaps(
    std::span<const EvaluationReport> reports) {
  const auto ordered = Ordered(reports, DatasetKind::kBbq);
  const auto categories = CategoriesOf(ordered, &EvaluationReport::bbq);
  struct Map {
    const char* name;
    const char* title;
    const char* key;
    std::optional<double> BbqCategoryMetrics::*field;
    bool bias;
  };
  const Map maps[] = {
      {"bbq_acc_overall", "BBQ accuracy, all contexts", "acc_overall",
       &BbqCategoryMetrics::acc_overall, false},
      {"bbq_acc_ambiguous", "BBQ accuracy, ambiguous contexts", "acc_ambiguous",
       &BbqCategoryMetrics::acc_ambiguous, false},
      {"bbq_acc_disambiguated", "BBQ accuracy, disambiguated contexts",
       "acc_disambiguated", &BbqCategoryMetrics::acc_disambiguated, false},
      {"bbq_bias_ambiguous", "BBQ bias score, ambiguous contexts", "s_amb",
       &BbqCategoryMetrics::s_amb, true},
      {"bbq_bias_disambiguated", "BBQ bias score, disambiguated contexts",
       "s_dis", &BbqCategoryMetrics::s_dis, true},
  };
  std::vector<NamedHeatmap> out;
  for (const Map& map : maps) {
    HeatmapSpec spec;
    spec.title = map.title;
    spec.transform = Transform::kTimes100;
    spec.scale = map.bias ? ColorScale::kDiverging : ColorScale::kSequential;
    spec.lo = map.bias ? -100 : 0;
    spec.hi = 100;
    for (BiasCategory c : categories) spec.cols.emplace_back(CategoryName(c));
    spec.cols.emplace_back(kMicroColumn);
    for (const auto* r : ordered) {
      spec.rows.push_back(RowLabel(*r));
      std::vector<std::optional<double>> row;
      for (BiasCategory c : categories) {
        std::optional<double> v;
        for (const auto& m : r->bbq) {
          if (m.category == c) v = m.*map.field;
        }
        row.push_back(v);
      }
      row.push_back(MicroOf(*r, map.key));
      spec.values.push_back(std::move(row));
    }
    out.push_back({map.name, std::move(spec)});
  }
  return out;
}

// ---- Belebele ---------------------------------------------------------------

std::string LanguageName(std::string_view code) {
  static const std::map<std::string, std::string, std::less<>> kNames = {
      {"en", "English"}, {"de", "German"},  {"fr", "French"},
      {"it", "Italian"}, {"es", "Spanish"}, {"sk", "Slovak"},
      {"cs", "Czech"},   {"pl", "Polish"},  {"nl", "Dutch"},
      {"pt", "Portuguese"}};
  auto it = kNames.find(code);
  return it == kNames.end() ? std::string(code) : it->second;
}

namespace {

std::vector<BelebeleRow> SortedRows(std::span<const BelebeleRow> rows) {
  std::vector<BelebeleRow> out(rows.begin(), rows.end());
  for (auto& r : out) r.language = LanguageName(r.language);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.model != b.model) return a.model < b.model;
    return a.language < b.language;
  });
  return out;
}

}  // namespace

std::string RenderBelebeleTable(std::span<const BelebeleRow> rows) {
  std::string out =
      "| Model | Size | Language | Accuracy |\n|---|---|---|---:|\n";
  for (const auto& r : SortedRows(rows)) {
    out += "| " + MarkdownEscape(r.model) + " | " + MarkdownEscape(r.size) +
           " | " + MarkdownEscape(r.language) + " | " +
           FormatValue(r.accuracy * 100.0) + " |\n";
  }
  return out;
}

std::string RenderBelebeleCsv(std::span<const BelebeleRow> rows) {
  std::string out = FormatCsvRow({"model", "size", "language", "accuracy"});
  for (const auto& r : SortedRows(rows)) {
    out += FormatCsvRow({r.model, r.size, r.language,
                         FormatValue(r.accuracy * 100.0)});
  }
  return out;
}

std::vector<std::filesystem::path> RenderReports(
    std::span<const EvaluationReport> reports,
    const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& stem, const HeatmapSpec& spec) {
    if (spec.rows.empty()) return;
    for (const auto& [ext, text] :
         {std::pair<const char*, std::string>{".svg", RenderSvg(spec)},
          {".csv", RenderCsv(spec)},
          {".md", RenderMarkdown(spec)}}) {
      const auto path = out_dir / (stem + ext);
      WriteFileAtomic(path, text);
      written.push_back(path);
    }
  };
  emit("crows_pairs", BuildCrowsHeatmap(reports));
  for (const auto& map : BuildBbqHeatmaps(reports)) emit(map.name, map.spec);

  std::vector<BelebeleRow> rows;
  for (const auto& r : reports) {
    if (r.kind == DatasetKind::kBelebele && r.belebele_accuracy) {
      rows.push_back({r.model_id, r.model_size, r.language, *r.belebele_accuracy});
    }
  }
  if (!rows.empty()) {
    WriteFileAtomic(out_dir / "belebele.md", RenderBelebeleTable(rows));
    WriteFileAtomic(out_dir / "belebele.csv", RenderBelebeleCsv(rows));
    written.push_back(out_dir / "belebele.md");
    written.push_back(out_dir / "belebele.csv");
  }
  std::sort(written.begin(), written.end());
  return written;
}

}  // namespace biaseval
