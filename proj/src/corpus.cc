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

#include "biaseval/corpus.h"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "biaseval/csv.h"
#include "biaseval/error.h"
#include "biaseval/io.h"

namespace biaseval {

using nlohmann::json;

std::string_view CategoryName(BiasCategory category) {
  switch (category) {
    case BiasCategory::kRace: return "race";
    case BiasCategory::kGender: return "gender";
    case BiasCategory::kSexualOrientation: return "sexual-orientation";
    case BiasCategory::kReligion: return "religion";
    case BiasCategory::kAge: return "age";
    case BiasCategory::kNationality: return "nationality";
    case BiasCategory::kDisability: return "disability";
    case BiasCategory::kPhysicalAppearance: return "physical-appearance";
    case BiasCategory::kSocioeconomic: return "socioeconomic";
  }
  return "unknown";
}

std::optional<BiasCategory> ParseCategory(std::string_view name) {
  static const std::map<std::string, BiasCategory, std::less<>> kNames = {
      {"race", BiasCategory::kRace},
      {"race-color", BiasCategory::kRace},
      {"Race_ethnicity", BiasCategory::kRace},
      {"gender", BiasCategory::kGender},
      {"Gender_identity", BiasCategory::kGender},
      {"sexual-orientation", BiasCategory::kSexualOrientation},
      {"Sexual_orientation", BiasCategory::kSexualOrientation},
      {"religion", BiasCategory::kReligion},
      {"Religion", BiasCategory::kReligion},
      {"age", BiasCategory::kAge},
      {"Age", BiasCategory::kAge},
      {"nationality", BiasCategory::kNationality},
      {"Nationality", BiasCategory::kNationality},
      {"disability", BiasCategory::kDisability},
      {"Disability_status", BiasCategory::kDisability},
      {"physical-appearance", BiasCategory::kPhysicalAppearance},
      {"Physical_appearance", BiasCategory::kPhysicalAppearance},
      {"socioeconomic", BiasCategory::kSocioeconomic},
      {"SES", BiasCategory::kSocioeconomic},
  };
  auto it = kNames.find(name);
  if (it == kNames.end()) return std::nullopt;
  return it->second;
}

std::string_view DatasetKindName(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kCrowsPairs: return "crows_pairs";
    case DatasetKind::kBbq: return "bbq";
    case DatasetKind::kBelebele: return "belebele";
  }
  return "unknown";
}

DatasetKind ParseDatasetKind(std::string_view name) {
  if (name == "crows_pairs") return DatasetKind::kCrowsPairs;
  if (name == "bbq") return DatasetKind::kBbq;
  if (name == "belebele") return DatasetKind::kBelebele;
  throw UsageError("unknown dataset kind '" + std::string(name) +
                   "' (expected crows_pairs, bbq or belebele)");
}

namespace {

void CheckUniqueId(std::unordered_set<std::string>& seen, const std::string& id,
                   std::size_t row) {
  if (!seen.insert(id).second) {
    throw ValidationError("row " + std::to_string(row) + ": duplicate id '" +
                          id + "'");
  }
}

// ---- JSON field access with row/field diagnostics -------------------------

const json& Field(const json& record, std::size_t row, const char* name) {
  auto it = record.find(name);
  if (it == record.end()) throw ParseError(row, name, "missing field");
  return *it;
}

std::string StringField(const json& record, std::size_t row, const char* name) {
  const json& value = Field(record, row, name);
  if (!value.is_string()) throw ParseError(row, name, "expected a string");
  return value.get<std::string>();
}

int IndexField(const json& value, std::size_t row, const char* name,
               int arity) {
  int index = -1;
  if (value.is_number_integer()) {
    index = value.get<int>();
  } else if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) {
      throw ParseError(row, name, "expected an integer index");
    }
    index = std::stoi(s);
  } else {
    throw ParseError(row, name, "expected an integer index");
  }
  if (index < 0 || index >= arity) {
    throw ParseError(row, name,
                     "index " + std::to_string(index) + " out of range 0.." +
                         std::to_string(arity - 1));
  }
  return index;
}

std::string IdOf(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  return value.dump();
}

// ---- BBQ answer metadata --------------------------------------------------

std::string NormalizeGroup(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  static const std::map<std::string, std::string, std::less<>> kAliases = {
      {"woman", "f"}, {"women", "f"}, {"girl", "f"}, {"girls", "f"},
      {"female", "f"}, {"man", "m"},  {"men", "m"},  {"boy", "m"},
      {"boys", "m"},  {"male", "m"},
  };
  if (auto it = kAliases.find(out); it != kAliases.end()) return it->second;
  return out;
}

int ResolveUnknownIndex(const json& record, std::size_t row) {
  if (auto it = record.find("unknown_index"); it != record.end()) {
    return IndexField(*it, row, "unknown_index", 3);
  }
  auto info = record.find("answer_info");
  if (info == record.end() || !info->is_object()) {
    throw ValidationError("row " + std::to_string(row) +
                          ": missing unknown-option metadata (answer_info or "
                          "unknown_index)");
  }
  int found = -1;
  for (int k = 0; k < 3; ++k) {
    auto entry = info->find("ans" + std::to_string(k));
    if (entry == info->end() || !entry->is_array() || entry->size() < 2 ||
        !(*entry)[1].is_string()) {
      continue;
    }
    if ((*entry)[1].get<std::string>() == "unknown") {
      if (found >= 0) {
        throw ValidationError("row " + std::to_string(row) +
                              ": more than one option marked unknown");
      }
      found = k;
    }
  }
  if (found < 0) {
    throw ValidationError("row " + std::to_string(row) +
                          ": missing unknown-option metadata (no answer_info "
                          "label equals \"unknown\")");
  }
  return found;
}

int ResolveBiasTarget(const json& record, std::size_t row, int unknown_index) {
  for (const char* name : {"bias_target_index", "target_loc"}) {
    if (auto it = record.find(name); it != record.end() && !it->is_null()) {
      return IndexField(*it, row, name, 3);
    }
  }
  auto info = record.find("answer_info");
  auto meta = record.find("additional_metadata");
  if (info == record.end() || meta == record.end() || !meta->is_object() ||
      !meta->contains("stereotyped_groups")) {
    throw ValidationError("row " + std::to_string(row) +
                          ": missing bias-target metadata (bias_target_index, "
                          "target_loc or stereotyped_groups)");
  }
  std::set<std::string> groups;
  for (const json& g : (*meta)["stereotyped_groups"]) {
    if (g.is_string()) groups.insert(NormalizeGroup(g.get<std::string>()));
  }
  std::vector<int> matches;
  for (int k = 0; k < 3; ++k) {
    if (k == unknown_index) continue;
    auto entry = info->find("ans" + std::to_string(k));
    if (entry == info->end() || !entry->is_array()) continue;
    for (const json& label : *entry) {
      if (label.is_string() &&
          groups.count(NormalizeGroup(label.get<std::string>()))) {
        matches.push_back(k);
        break;
      }
    }
  }
  if (matches.size() != 1) {
    throw ValidationError(
        "row " + std::to_string(row) +
        ": cannot resolve the bias-target option from stereotyped_groups (" +
        std::to_string(matches.size()) +
        " options match); supply bias_target_index");
  }
  return matches.front();
}

ContextCondition ParseCondition(const std::string& s, std::size_t row) {
  if (s == "ambig" || s == "ambiguous") return ContextCondition::kAmbiguous;
  if (s == "disambig" || s == "disambiguated") {
    return ContextCondition::kDisambiguated;
  }
  throw ParseError(row, "context_condition", "unknown condition '" + s + "'");
}

Polarity ParsePolarity(const std::string& s, std::size_t row) {
  if (s == "neg" || s == "negative") return Polarity::kNegative;
  if (s == "nonneg" || s == "nonnegative") return Polarity::kNonNegative;
  throw ParseError(row, "question_polarity", "unknown polarity '" + s + "'");
}

}  // namespace

std::vector<CrowsPairsExample> ParseCrowsPairs(std::string_view text,
                                               std::string_view language,
                                               const IdSet& exclusions) {
  const CsvTable table = ParseCsv(text);
  std::vector<CrowsPairsExample> out;
  if (table.header.empty()) return out;

  auto require = [&](const char* name) {
    auto col = table.Column(name);
    if (!col) throw ParseError(0, name, "missing column in header");
    return *col;
  };
  const std::size_t c_more = require("sent_more");
  const std::size_t c_less = require("sent_less");
  const std::size_t c_dir = require("stereo_antistereo");
  const std::size_t c_bias = require("bias_type");
  const auto c_id = table.Column("id");

  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t row_no = r + 1;
    CrowsPairsExample ex;
    ex.id = c_id ? row[*c_id] : std::to_string(row_no);
    if (ex.id.empty()) throw ParseError(row_no, "id", "empty id");
    CheckUniqueId(seen, ex.id, row_no);

    ex.sent_more = row[c_more];
    ex.sent_less = row[c_less];
    if (ex.sent_more.empty()) throw ParseError(row_no, "sent_more", "empty");
    if (ex.sent_less.empty()) throw ParseError(row_no, "sent_less", "empty");
    if (ex.sent_more == ex.sent_less) {
      throw ValidationError("row " + std::to_string(row_no) +
                            ": sent_more and sent_less are identical");
    }
    const std::string& dir = row[c_dir];
    if (dir == "stereo") {
      ex.direction = StereoDirection::kStereo;
    } else if (dir == "antistereo") {
      ex.direction = StereoDirection::kAntiStereo;
    } else {
      throw ParseError(row_no, "stereo_antistereo",
                       "expected stereo or antistereo, got '" + dir + "'");
    }
    auto category = ParseCategory(row[c_bias]);
    if (!category) {
      throw ParseError(row_no, "bias_type",
                       "unknown bias category '" + row[c_bias] + "'");
    }
    ex.category = *category;
    ex.language = std::string(language);
    if (exclusions.count(ex.id)) continue;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<CrowsPairsExample> LoadCrowsPairs(const std::filesystem::path& path,
                                              std::string_view language,
                                              const IdSet& exclusions) {
  return ParseCrowsPairs(ReadFile(path), language, exclusions);
}

std::vector<BbqExample> ParseBbq(std::string_view text,
                                 std::string_view language,
                                 const IdSet& exclusions) {
  std::vector<BbqExample> out;
  std::unordered_set<std::string> seen;
  const std::vector<json> records = ParseJsonLines(text);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const json& rec = records[r];
    const std::size_t row = r + 1;
    if (!rec.is_object()) throw ParseError(row, "<record>", "expected object");

    BbqExample ex;
    const std::string raw_category = StringField(rec, row, "category");
    auto category = ParseCategory(raw_category);
    if (!category) {
      throw ParseError(row, "category",
                       "unsupported bias category '" + raw_category + "'");
    }
    ex.category = *category;
    if (auto it = rec.find("id"); it != rec.end()) {
      ex.id = IdOf(*it);
    } else {
      ex.id = raw_category + "-" + IdOf(Field(rec, row, "example_id"));
    }
    CheckUniqueId(seen, ex.id, row);

    ex.context = StringField(rec, row, "context");
    ex.question = StringField(rec, row, "question");
    for (int k = 0; k < 3; ++k) {
      const std::string name = "ans" + std::to_string(k);
      ex.options[k] = StringField(rec, row, name.c_str());
    }
    ex.gold_label = IndexField(Field(rec, row, "label"), row, "label", 3);
    ex.condition =
        ParseCondition(StringField(rec, row, "context_condition"), row);
    ex.polarity =
        ParsePolarity(StringField(rec, row, "question_polarity"), row);
    ex.unknown_index = ResolveUnknownIndex(rec, row);
    ex.bias_target_index = ResolveBiasTarget(rec, row, ex.unknown_index);
    ex.language = std::string(language);

    if (ex.condition == ContextCondition::kAmbiguous &&
        ex.gold_label != ex.unknown_index) {
      throw ValidationError(
          "row " + std::to_string(row) + " (id " + ex.id +
          "): ambiguous context requires gold_label == unknown_index (gold " +
          std::to_string(ex.gold_label) + ", unknown " +
          std::to_string(ex.unknown_index) + ")");
    }
    if (ex.bias_target_index == ex.unknown_index) {
      throw ValidationError("row " + std::to_string(row) + " (id " + ex.id +
                            "): bias_target_index equals unknown_index");
    }
    if (exclusions.count(ex.id)) continue;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<BbqExample> LoadBbq(const std::filesystem::path& path,
                                std::string_view language,
                                const IdSet& exclusions) {
  return ParseBbq(ReadFile(path), language, exclusions);
}

std::vector<BelebeleExample> ParseBelebele(std::string_view text,
                                           std::string_view language,
                                           const IdSet& exclusions) {
  std::vector<BelebeleExample> out;
  std::unordered_set<std::string> seen;
  const std::vector<json> records = ParseJsonLines(text);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const json& rec = records[r];
    const std::size_t row = r + 1;
    if (!rec.is_object()) throw ParseError(row, "<record>", "expected object");

    BelebeleExample ex;
    if (auto it = rec.find("id"); it != rec.end()) {
      ex.id = IdOf(*it);
    } else {
      ex.id = StringField(rec, row, "link") + "#" +
              IdOf(Field(rec, row, "question_number"));
    }
    CheckUniqueId(seen, ex.id, row);
    ex.passage = StringField(rec, row, "flores_passage");
    ex.question = StringField(rec, row, "question");
    for (int k = 0; k < 4; ++k) {
      const std::string name = "mc_answer" + std::to_string(k + 1);
      ex.options[k] = StringField(rec, row, name.c_str());
    }
    // correct_answer_num is 1-based upstream.
    const json& gold = Field(rec, row, "correct_answer_num");
    int one_based = 0;
    if (gold.is_number_integer()) {
      one_based = gold.get<int>();
    } else if (const std::string* text = gold.get_ptr<const std::string*>();
               text && !text->empty() && text->size() < 4 &&
               std::all_of(text->begin(), text->end(),
                           [](unsigned char c) { return std::isdigit(c); })) {
      one_based = std::stoi(*text);
    } else {
      throw ParseError(row, "correct_answer_num", "expected an integer 1..4");
    }
    if (one_based < 1 || one_based > 4) {
      throw ParseError(row, "correct_answer_num", "out of range 1..4");
    }
    ex.gold_label = one_based - 1;
    ex.language = std::string(language);
    if (exclusions.count(ex.id)) continue;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<BelebeleExample> LoadBelebele(const std::filesystem::path& path,
                                          std::string_view language,
                                          const IdSet& exclusions) {
  return ParseBelebele(ReadFile(path), language, exclusions);
}

std::vector<std::string> LoadIds(DatasetKind kind,
                                 const std::filesystem::path& path,
                                 std::string_view language,
                                 const IdSet& exclusions) {
  std::vector<std::string> ids;
  auto collect = [&](const auto& examples) {
    ids.reserve(examples.size());
    for (const auto& ex : examples) ids.push_back(ex.id);
  };
  switch (kind) {
    case DatasetKind::kCrowsPairs:
      collect(LoadCrowsPairs(path, language, exclusions));
      break;
    case DatasetKind::kBbq:
      collect(LoadBbq(path, language, exclusions));
      break;
    case DatasetKind::kBelebele:
      collect(LoadBelebele(path, language, exclusions));
      break;
  }
  return ids;
}

json ToJson(const DatasetManifest& m) {
  return json{{"dataset_kind", DatasetKindName(m.kind)},
              {"language", m.language},
              {"source_uri", m.source_uri},
              {"checksum", m.checksum},
              {"example_count", m.example_count},
              {"excluded_ids", m.excluded_ids},
              {"split", m.split}};
}

DatasetManifest ManifestFromJson(const json& j) {
  try {
    DatasetManifest m;
    m.kind = ParseDatasetKind(j.at("dataset_kind").get<std::string>());
    m.language = j.at("language").get<std::string>();
    m.source_uri = j.at("source_uri").get<std::string>();
    m.checksum = j.at("checksum").get<std::string>();
    m.example_count = j.at("example_count").get<std::size_t>();
    m.excluded_ids = j.value("excluded_ids", IdSet{});
    m.split = j.value("split", std::string("full"));
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
}

DatasetManifest ReadManifest(const std::filesystem::path& path) {
  try {
    DatasetManifest m = ManifestFromJson(json::parse(ReadFile(path)));
    // Relative source paths resolve against the manifest's directory.
    std::filesystem::path source(m.source_uri);
    if (source.is_relative() && path.has_parent_path()) {
      m.source_uri = (path.parent_path() / source).string();
    }
    return m;
  } catch (const json::parse_error& e) {
    throw ValidationError("manifest " + path.string() + ": " + e.what());
  }
}

void WriteManifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest) {
  WriteFileAtomic(path, ToJson(manifest).dump(2) + "\n");
}

DatasetManifest BuildManifest(DatasetKind kind,
                              const std::filesystem::path& path,
                              std::string_view language,
                              const IdSet& exclusions, std::string split) {
  const std::string bytes = ReadFile(path);
  DatasetManifest m;
  m.kind = kind;
  m.language = std::string(language);
  m.source_uri = path.string();
  m.checksum = Sha256Hex(bytes);
  m.excluded_ids = exclusions;
  m.split = std::move(split);
  switch (kind) {
    case DatasetKind::kCrowsPairs:
      m.example_count = ParseCrowsPairs(bytes, language, exclusions).size();
      break;
    case DatasetKind::kBbq:
      m.example_count = ParseBbq(bytes, language, exclusions).size();
      break;
    case DatasetKind::kBelebele:
      m.example_count = ParseBelebele(bytes, language, exclusions).size();
      break;
  }
  return m;
}

void VerifyManifest(const DatasetManifest& manifest) {
  const DatasetManifest actual =
      BuildManifest(manifest.kind, manifest.source_uri, manifest.language,
                    manifest.excluded_ids, manifest.split);
  if (actual.checksum != manifest.checksum) {
    throw ValidationError("checksum mismatch for " + manifest.source_uri +
                          ": manifest " + manifest.checksum + ", file " +
                          actual.checksum);
  }
  if (actual.example_count != manifest.example_count) {
    throw ValidationError(
        "example_count mismatch for " + manifest.source_uri + ": manifest " +
        std::to_string(manifest.example_count) + ", loaded " +
        std::to_string(actual.example_count));
  }
}

IdSet ReadExclusions(const std::filesystem::path& path) {
  try {
    const json j = json::parse(ReadFile(path));
    return j.at("excluded_ids").get<IdSet>();
  } catch (const json::exception& e) {
    throw ValidationError("exclusion file " + path.string() + ": " + e.what());
  }
}

void WriteExclusions(const std::filesystem::path& path, DatasetKind kind,
                     const IdSet& ids) {
  const json j{{"dataset_kind", DatasetKindName(kind)}, {"excluded_ids", ids}};
  WriteFileAtomic(path, j.dump(2) + "\n");
}

ParallelSplitReport ValidateParallelSplits(std::span<const SplitIds> splits) {
  if (splits.size() < 2) {
    throw UsageError("parallel split validation needs at least two splits");
  }
  const DatasetKind kind = splits.front().manifest.kind;
  for (const SplitIds& s : splits) {
    if (s.manifest.kind != kind) {
      throw UsageError("parallel split validation mixes dataset kinds");
    }
  }

  IdSet all_ids;
  IdSet all_exclusions;
  for (const SplitIds& s : splits) {
    all_ids.insert(s.ids.begin(), s.ids.end());
    all_exclusions.insert(s.manifest.excluded_ids.begin(),
                          s.manifest.excluded_ids.end());
  }

  ParallelSplitReport report;
  for (const SplitIds& s : splits) {
    const std::string& lang = s.manifest.language;
    const IdSet own(s.ids.begin(), s.ids.end());
    IdSet missing;
    std::set_difference(all_ids.begin(), all_ids.end(), own.begin(), own.end(),
                        std::inserter(missing, missing.end()));
    if (!missing.empty()) {
      report.passed = false;
      report.messages.push_back(lang + ": " + std::to_string(missing.size()) +
                                " id(s) missing");
      report.missing_ids[lang] = std::move(missing);
    }
    IdSet not_excluded;
    std::set_difference(all_exclusions.begin(), all_exclusions.end(),
                        s.manifest.excluded_ids.begin(),
                        s.manifest.excluded_ids.end(),
                        std::inserter(not_excluded, not_excluded.end()));
    if (!not_excluded.empty()) {
      report.passed = false;
      report.messages.push_back(lang + ": exclusion set differs from the "
                                       "global exclusion set");
      report.exclusion_mismatch[lang] = std::move(not_excluded);
    }
  }
  return report;
}

ParallelSplitReport ValidateParallelSplits(
    std::span<const DatasetManifest> manifests) {
  if (manifests.size() < 2) {
    throw UsageError("parallel split validation needs at least two manifests");
  }
  std::vector<SplitIds> splits;
  for (const DatasetManifest& m : manifests) {
    splits.push_back({m, LoadIds(m.kind, m.source_uri, m.language,
                                 m.excluded_ids)});
  }
  return ValidateParallelSplits(splits);
}

json ToJson(const ParallelSplitReport& report) {
  return json{{"passed", report.passed},
              {"missing_ids", report.missing_ids},
              {"exclusion_mismatch", report.exclusion_mismatch},
              {"messages", report.messages}};
}

}  // namespace biaseval
