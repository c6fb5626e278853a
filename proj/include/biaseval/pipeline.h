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

#ifndef BIASEVAL_PIPELINE_H_
#define BIASEVAL_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "biaseval/backend.h"
#include "biaseval/corpus.h"
#include "biaseval/scoring.h"
#include "json.hpp"

namespace biaseval {

// Version string recorded in run manifests.
inline constexpr const char* kToolVersion = "biaseval 0.1.0";

// A dataset is named either by a manifest (verified before use) or by kind,
// path and language.
struct DatasetSpec {
  std::filesystem::path manifest;
  DatasetKind kind = DatasetKind::kCrowsPairs;
  std::filesystem::path path;
  std::string language;
  std::string split = "full";
};

struct ProviderSpec {
  std::string id;
  std::string kind = "mock";  // "mock" or "http"
  std::string endpoint;
  std::string api_key_env;
  int timeout_ms = 60000;
};

struct ReviewSpec {
  std::size_t n = 60;
  std::uint64_t seed = 1;
};

struct TranslateSpec {
  DatasetSpec source;
  std::vector<std::string> targets;
  std::vector<ProviderSpec> providers;
  std::filesystem::path output_dir;
  std::filesystem::path cache;  // empty: no translation cache
  std::size_t batch_size = 50;
  int max_concurrency = 2;
  int max_retries = 2;
  std::optional<ReviewSpec> review;
};

struct AnnotateSpec {
  std::filesystem::path db;
  std::string host = "127.0.0.1";
  int port = 8765;
  std::filesystem::path static_dir;
  std::vector<std::filesystem::path> tasks;
  nlohmann::json annotators = nlohmann::json::array();
  DatasetKind exclusions_kind = DatasetKind::kCrowsPairs;
  // Written on shutdown when set.
  std::filesystem::path exclusions_out;
};

struct ScoringSpec {
  JoinConfig join;
  double tie_tolerance = kDefaultTieTolerance;
  PllMode pll_mode = PllMode::kCausal;
  int threads = 4;
};

struct ReportSpec {
  std::vector<std::filesystem::path> inputs;  // files or directories
  std::filesystem::path output_dir;
};

// Run file: one JSON document. Relative paths resolve against its directory.
// Environment overrides: BIASEVAL_BACKEND_ENDPOINT (remote backends),
// BIASEVAL_PROVIDER_ENDPOINT and BIASEVAL_PROVIDER_KEY (http providers).
struct RunConfig {
  std::filesystem::path output_dir = "out";
  std::vector<DatasetSpec> datasets;
  std::vector<BackendConfig> backends;
  std::map<std::string, std::string> model_sizes;  // model_id -> "2.6B"
  std::filesystem::path exclusions;
  bool require_exclusions = false;
  ScoringSpec scoring;
  std::filesystem::path score_cache;  // empty: no score cache
  std::optional<TranslateSpec> translate;
  std::optional<AnnotateSpec> annotate;
  ReportSpec report;
};

RunConfig RunConfigFromJson(const nlohmann::json& json,
                            const std::filesystem::path& base_dir);
RunConfig LoadRunConfig(const std::filesystem::path& path);

struct TranslateSummary {
  std::vector<std::filesystem::path> manifests;
  std::vector<std::filesystem::path> review_files;
  std::size_t provider_calls = 0;
  std::size_t record_errors = 0;
  std::size_t flagged = 0;
};

// Per provider and target language writes, under
// <output_dir>/<provider>/<language>/: the dataset file, its manifest,
// <kind>.translations.jsonl with provenance, and <kind>.errors.jsonl when
// records failed. Review samples go to <output_dir>/review.<language>.jsonl.
TranslateSummary RunTranslate(const RunConfig& config);

struct EvaluateSummary {
  std::vector<std::string> run_ids;
  std::vector<std::filesystem::path> files;
};

// One run per (dataset, backend). Each writes <run_id>.predictions.jsonl,
// <run_id>.metrics.json and <run_id>.manifest.json to output_dir. Refuses to
// run (ValidationError) when the dataset manifest lists excluded ids or
// require_exclusions is set and the exclusion file is missing or does not
// cover them.
EvaluateSummary RunEvaluate(const RunConfig& config);

// The run manifest of one (dataset, backend) pair without running it; equal
// manifests mean equal results.
nlohmann::json BuildRunManifest(const RunConfig& config,
                                const DatasetSpec& dataset,
                                const BackendConfig& backend);

std::vector<std::filesystem::path> RunReport(const RunConfig& config);

struct ValidateSummary {
  bool passed = true;
  nlohmann::json details;
};

// Loads every dataset, verifies manifests and exclusions, and checks that
// splits of the same kind hold the same ids.
ValidateSummary RunValidate(const RunConfig& config);

// Serves until `stop` returns true (polled) or forever when it is empty.
// `on_ready` receives the bound port.
void RunAnnotateServe(const RunConfig& config,
                      const std::function<void(int)>& on_ready = {},
                      const std::function<bool()>& stop = {});

}  // namespace biaseval

#endif  // BIASEVAL_PIPELINE_H_
