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


#include "biaseval/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <set>
#include <thread>

#include "biaseval/annotate.h"
#include "biaseval/annotate_server.h"
#include "biaseval/error.h"
#include "biaseval/io.h"
#include "biaseval/metrics.h"
#include "biaseval/report.h"
#include "biaseval/score_cache.h"
#include "biaseval/translate.h"

namespace biaseval {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path Resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_relative() ? base / path : path;
}

std::optional<std::string> Env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

DatasetSpec DatasetSpecFromJson(const json& j, const fs::path& base) {
  DatasetSpec d;
  if (j.contains("manifest")) {
    d.manifest = Resolve(base, j.at("manifest").get<std::string>());
    return d;
  }
  d.kind = ParseDatasetKind(j.at("kind").get<std::string>());
  d.path = Resolve(base, j.at("path").get<std::string>());
  d.language = j.at("language").get<std::string>();
  d.split = j.value("split", "full");
  return d;
}

std::string FileExtension(DatasetKind kind) {
  return kind == DatasetKind::kCrowsPairs ? ".csv" : ".jsonl";
}

// Dataset spec with the manifest resolved, verified when present.
struct ResolvedDataset {
  DatasetManifest manifest;
  bool from_manifest = false;
};

ResolvedDataset ResolveDataset(const DatasetSpec& spec) {
  ResolvedDataset out;
  if (!spec.manifest.empty()) {
    out.manifest = ReadManifest(spec.manifest);
    VerifyManifest(out.manifest);
    out.from_manifest = true;
  } else {
    out.manifest = BuildManifest(spec.kind, spec.path, spec.language, {},
                                 spec.split);
  }
  return out;
}

// Exclusion ids to apply, enforcing the refusal rules.
IdSet ApplicableExclusions(const RunConfig& config, const DatasetManifest& m) {
  const bool demanded = config.require_exclusions || !m.excluded_ids.empty();
  IdSet ids = m.excluded_ids;
  if (config.exclusions.empty()) {
    if (demanded) {
      throw ValidationError(
          "refusing to run on " + m.source_uri +
          ": an exclusion file is required but none is configured");
    }
    return ids;
  }
  if (!fs::exists(config.exclusions)) {
    if (demanded) {
      throw ValidationError("refusing to run on " + m.source_uri +
                            ": exclusion file " + config.exclusions.string() +
                            " is missing");
    }
    return ids;
  }
  const IdSet file_ids = ReadExclusions(config.exclusions);
  for (const auto& id : m.excluded_ids) {
    if (!file_ids.count(id)) {
      throw ValidationError("refusing to run on " + m.source_uri +
                            ": manifest excludes id '" + id +
                            "' which the exclusion file lacks");
    }
  }
  ids.insert(file_ids.begin(), file_ids.end());
  return ids;
}

std::string Sanitize(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

json ScoringJson(const ScoringSpec& s) {
  return {{"join",
           {{"context_question", s.join.context_question},
            {"before_option", s.join.before_option}}},
          {"tie_tolerance", s.tie_tolerance},
          {"pll_mode", PllModeName(s.pll_mode)}};
}

std::unique_ptr<TranslationProvider> MakeProvider(const ProviderSpec& spec) {
  if (spec.kind == "mock") return std::make_unique<MockProvider>(spec.id);
  if (spec.kind == "http") {
    std::string key;
    if (!spec.api_key_env.empty()) {
      key = Env(spec.api_key_env.c_str()).value_or("");
    }
    if (auto k = Env("BIASEVAL_PROVIDER_KEY")) key = *k;
    return std::make_unique<HttpProvider>(spec.id, spec.endpoint, key,
                                          spec.timeout_ms);
  }
  throw UsageError("provider '" + spec.id + "': unknown kind '" + spec.kind + "'");
}

}  // namespace

// ---- Config -----------------------------------------------------------------

RunConfig RunConfigFromJson(const json& j, const fs::path& base) {
  RunConfig c;
  try {
    if (!j.is_object()) throw UsageError("run file: expected a JSON object");
    c.output_dir = Resolve(base, j.value("output_dir", "out"));
    for (const auto& d : j.value("datasets", json::array())) {
      c.datasets.push_back(DatasetSpecFromJson(d, base));
    }
    for (const auto& b : j.value("backends", json::array())) {
      c.backends.push_back(BackendConfigFromJson(b));
      if (b.contains("size")) {
        c.model_sizes[c.backends.back().model_id] = b.at("size").get<std::string>();
      }
    }
    c.exclusions = Resolve(base, j.value("exclusions", ""));
    c.require_exclusions = j.value("require_exclusions", false);
    if (auto s = j.find("scoring"); s != j.end()) {
      if (auto jn = s->find("join"); jn != s->end()) {
        c.scoring.join.context_question =
            jn->value("context_question", c.scoring.join.context_question);
        c.scoring.join.before_option =
            jn->value("before_option", c.scoring.join.before_option);
      }
      c.scoring.tie_tolerance = s->value("tie_tolerance", kDefaultTieTolerance);
      c.scoring.pll_mode = ParsePllMode(s->value("pll_mode", "causal"));
      c.scoring.threads = s->value("threads", 4);
      if (c.scoring.threads < 1) throw UsageError("scoring.threads must be >= 1");
      if (c.scoring.tie_tolerance < 0) {
        throw UsageError("scoring.tie_tolerance must be >= 0");
      }
    }
    if (auto cache = j.find("cache"); cache != j.end() && !cache->is_null()) {
      c.score_cache = Resolve(base, cache->value("path", ""));
    }
    if (auto t = j.find("translate"); t != j.end()) {
      TranslateSpec ts;
      ts.source = DatasetSpecFromJson(t->at("source"), base);
      ts.targets = t->at("targets").get<std::vector<std::string>>();
      for (const auto& p : t->at("providers")) {
        ProviderSpec ps;
        ps.id = p.at("id").get<std::string>();
        ps.kind = p.value("kind", "mock");
        ps.endpoint = p.value("endpoint", "");
        ps.api_key_env = p.value("api_key_env", "");
        ps.timeout_ms = p.value("timeout_ms", 60000);
        if (ps.kind == "http") {
          if (auto e = Env("BIASEVAL_PROVIDER_ENDPOINT")) ps.endpoint = *e;
        }
        ts.providers.push_back(std::move(ps));
      }
      ts.output_dir = Resolve(base, t->value("output_dir", "translated"));
      ts.cache = Resolve(base, t->value("cache", ""));
      ts.batch_size = t->value("batch_size", std::size_t{50});
      ts.max_concurrency = t->value("max_concurrency", 2);
      ts.max_retries = t->value("max_retries", 2);
      if (auto r = t->find("review"); r != t->end()) {
        ts.review = ReviewSpec{r->value("n", std::size_t{60}),
                               r->value("seed", std::uint64_t{1})};
      }
      if (ts.targets.empty()) throw UsageError("translate.targets is empty");
      if (ts.providers.empty()) throw UsageError("translate.providers is empty");
      c.translate = std::move(ts);
    }
    if (auto a = j.find("annotate"); a != j.end()) {
      AnnotateSpec as;
      as.db = Resolve(base, a->value("db", "annotations.sqlite"));
      as.host = a->value("host", as.host);
      as.port = a->value("port", as.port);
      as.static_dir = Resolve(base, a->value("static_dir", ""));
      for (const auto& t : a->value("tasks", std::vector<std::string>{})) {
        as.tasks.push_back(Resolve(base, t));
      }
      as.annotators = a->value("annotators", json::array());
      as.exclusions_kind =
          ParseDatasetKind(a->value("exclusions_kind", "crows_pairs"));
      as.exclusions_out = Resolve(base, a->value("exclusions_out", ""));
      c.annotate = std::move(as);
    }
    if (auto r = j.find("report"); r != j.end()) {
      for (const auto& in : r->value("inputs", std::vector<std::string>{})) {
        c.report.inputs.push_back(Resolve(base, in));
      }
      c.report.output_dir = Resolve(base, r->value("output_dir", ""));
    }
    if (c.report.inputs.empty()) c.report.inputs.push_back(c.output_dir);
    if (c.report.output_dir.empty()) c.report.output_dir = c.output_dir / "report";
  } catch (const json::exception& e) {
    throw UsageError(std::string("run file: ") + e.what());
  }
  if (auto e = Env("BIASEVAL_BACKEND_ENDPOINT")) {
    for (auto& b : c.backends) {
      if (b.kind == BackendKind::kRemote) b.endpoint = *e;
    }
  }
  for (const auto& b : c.backends) b.Validate();
  return c;
}

RunConfig LoadRunConfig(const fs::path& path) {
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw UsageError("run file " + path.string() + ": " + e.what());
  }
  return RunConfigFromJson(j, path.has_parent_path() ? path.parent_path() : ".");
}

// ---- Translate --------------------------------------------------------------

TranslateSummary RunTranslate(const RunConfig& config) {
  if (!config.translate) throw UsageError("run file has no translate section");
  const TranslateSpec& spec = *config.translate;
  const ResolvedDataset source = ResolveDataset(spec.source);
  const DatasetKind kind = source.manifest.kind;
  const RawDataset raw = ReadRawDataset(kind, source.manifest.source_uri);
  IdSet exclusions = source.manifest.excluded_ids;
  if (!config.exclusions.empty() && fs::exists(config.exclusions)) {
    const IdSet more = ReadExclusions(config.exclusions);
    exclusions.insert(more.begin(), more.end());
  }

  TranslateSummary summary;
  std::map<std::string, std::map<std::string, std::vector<TranslatedRecord>>>
      by_language;  // language -> provider -> records
  for (const auto& pspec : spec.providers) {
    const auto provider = MakeProvider(pspec);
    for (const auto& target : spec.targets) {
      const fs::path dir = spec.output_dir / Sanitize(pspec.id) / Sanitize(target);
      const std::string stem(DatasetKindName(kind));
      TranslationJob job = TranslationJob::ForDataset(
          kind, source.manifest.language, target, pspec.id);
      job.batch_size = spec.batch_size;
      job.max_concurrency = spec.max_concurrency;
      job.max_retries = spec.max_retries;
      if (!spec.cache.empty()) job.cache_uri = spec.cache.string();
      job.checkpoint_uri = (dir / (stem + ".checkpoint.json")).string();

      TranslationOutcome outcome = TranslateDataset(job, raw.records, *provider);
      summary.provider_calls += outcome.provider_calls;
      summary.record_errors += outcome.errors.size();
      for (const auto& r : outcome.records) summary.flagged += !r.flags.empty();

      const fs::path data = dir / (stem + FileExtension(kind));
      WriteTranslatedDataset(data, raw, outcome.records);
      WriteTranslatedRecords(dir / (stem + ".translations.jsonl"), outcome.records);
      if (!outcome.errors.empty()) {
        std::string text;
        for (const auto& e : outcome.errors) {
          text += CanonicalDump({{"id", e.id}, {"error", e.message}}) + "\n";
        }
        WriteFileAtomic(dir / (stem + ".errors.jsonl"), text);
      }
      DatasetManifest m = BuildManifest(kind, data, target, exclusions,
                                        source.manifest.split);
      m.source_uri = data.filename().string();
      const fs::path manifest_path = dir / (stem + ".manifest.json");
      WriteManifest(manifest_path, m);
      summary.manifests.push_back(manifest_path);
      by_language[target][pspec.id] = std::move(outcome.records);
    }
  }

  if (spec.review) {
    for (const auto& [language, by_provider] : by_language) {
      // Ids every provider translated, in source order.
      std::vector<std::string> ids;
      for (const auto& rec : raw.records) {
        bool everywhere = true;
        for (const auto& [provider, recs] : by_provider) {
          everywhere &= std::any_of(recs.begin(), recs.end(),
                                    [&](const auto& r) { return r.id == rec.id; });
        }
        if (everywhere) ids.push_back(rec.id);
      }
      const auto sample = SampleForReview(ids, std::min(spec.review->n, ids.size()),
                                          spec.review->seed);
      const fs::path path = spec.output_dir / ("review." + Sanitize(language) + ".jsonl");
      WriteReviewTasks(path, BuildReviewTasks(kind, language, sample, by_provider));
      summary.review_files.push_back(path);
    }
  }
  return summary;
}

// ---- Evaluate ---------------------------------------------------------------

json BuildRunManifest(const RunConfig& config, const DatasetSpec& dataset,
                      const BackendConfig& backend) {
  const ResolvedDataset resolved = ResolveDataset(dataset);
  const DatasetManifest& m = resolved.manifest;
  const IdSet exclusions = ApplicableExclusions(config, m);
  const auto instance = MakeBackend(backend);
  auto size = config.model_sizes.find(backend.model_id);

  // Everything that determines the results. The score cache is deliberately
  // absent: warm and cold runs must agree.
  json effective = {
      {"dataset",
       {{"kind", DatasetKindName(m.kind)},
        {"language", m.language},
        {"split", m.split},
        {"file", fs::path(m.source_uri).filename().string()},
        {"checksum", m.checksum},
        {"excluded_ids", exclusions}}},
      {"backend", instance->Identity()},
      {"model_size", size == config.model_sizes.end() ? "" : size->second},
      {"scoring", ScoringJson(config.scoring)},
  };
  const std::string sha = Sha256Hex(CanonicalDump(effective));
  const std::string run_id = std::string(DatasetKindName(m.kind)) + "-" +
                             Sanitize(m.language) + "-" +
                             Sanitize(backend.model_id) + "-" + sha.substr(0, 12);
  return {
      {"run_id", run_id},
      {"tool_version", kToolVersion},
      {"config_sha256", sha},
      {"config", effective},
      {"dataset_checksum", m.checksum},
      {"dataset_manifest_verified", resolved.from_manifest},
      {"backend_identity", instance->Identity()},
      {"join", effective["scoring"]["join"]},
      {"tie_tolerance", config.scoring.tie_tolerance},
      {"pll_mode", PllModeName(config.scoring.pll_mode)},
      {"metric_variants",
       {{"s_amb", "scaled by ambiguous-context error rate; "
                  "s_amb_overall_accuracy uses overall error rate"},
        {"s_amb_factor", "over ambiguous non-unknown outputs"},
        {"s_dis", "over disambiguated non-unknown outputs"},
        {"microaverage", "weighted by per-category example counts"},
        {"kappa", "unweighted"}}},
      {"text_normalization", "none"},
      {"outputs",
       {run_id + ".predictions.jsonl", run_id + ".metrics.json",
        run_id + ".manifest.json"}},
  };
}

EvaluateSummary RunEvaluate(const RunConfig& config) {
  if (config.datasets.empty()) throw UsageError("run file lists no datasets");
  if (config.backends.empty()) throw UsageError("run file lists no backends");
  std::shared_ptr<ScoreCache> cache;
  if (!config.score_cache.empty()) {
    cache = std::make_shared<ScoreCache>(config.score_cache);
  }
  EvaluateSummary summary;
  for (const auto& dataset : config.datasets) {
    const ResolvedDataset resolved = ResolveDataset(dataset);
    const DatasetManifest& m = resolved.manifest;
    const IdSet exclusions = ApplicableExclusions(config, m);
    for (const auto& backend_config : config.backends) {
      const json manifest = BuildRunManifest(config, dataset, backend_config);
      const std::string run_id = manifest.at("run_id").get<std::string>();
      std::shared_ptr<const LogprobBackend> backend = MakeBackend(backend_config);
      if (cache) backend = std::make_shared<CachedBackend>(backend, cache);

      EvaluationReport report;
      report.run_id = run_id;
      report.run_manifest = run_id + ".manifest.json";
      report.kind = m.kind;
      report.model_id = backend_config.model_id;
      if (auto s = config.model_sizes.find(report.model_id);
          s != config.model_sizes.end()) {
        report.model_size = s->second;
      }
      report.language = m.language;

      const fs::path predictions = config.output_dir / (run_id + ".predictions.jsonl");
      switch (m.kind) {
        case DatasetKind::kCrowsPairs: {
          const auto examples = LoadCrowsPairs(m.source_uri, m.language, exclusions);
          const auto scores = ScorePairsAll(*backend, examples,
                                            config.scoring.pll_mode,
                                            config.scoring.threads);
          report.crows = CrowsMetricsByCategory(examples, scores);
          report.n_examples = examples.size();
          WritePredictions(predictions, run_id, scores);
          break;
        }
        case DatasetKind::kBbq: {
          const auto examples = LoadBbq(m.source_uri, m.language, exclusions);
          std::vector<MultipleChoiceItem> items;
          for (const auto& ex : examples) items.push_back(AsMultipleChoice(ex));
          const auto preds = ScoreMultipleChoiceAll(
              *backend, items, config.scoring.join, config.scoring.tie_tolerance,
              config.scoring.threads);
          report.bbq = BbqMetricsByCategory(examples, preds);
          report.n_examples = examples.size();
          WritePredictions(predictions, run_id, preds);
          break;
        }
        case DatasetKind::kBelebele: {
          const auto examples = LoadBelebele(m.source_uri, m.language, exclusions);
          std::vector<MultipleChoiceItem> items;
          for (const auto& ex : examples) items.push_back(AsMultipleChoice(ex));
          const auto preds = ScoreMultipleChoiceAll(
              *backend, items, config.scoring.join, config.scoring.tie_tolerance,
              config.scoring.threads);
          if (!examples.empty()) {
            report.belebele_accuracy = BelebeleAccuracy(examples, preds);
          }
          report.n_examples = examples.size();
          WritePredictions(predictions, run_id, preds);
          break;
        }
      }
      ComputeMicroaverages(report);
      const fs::path metrics = config.output_dir / (run_id + ".metrics.json");
      const fs::path manifest_path = config.output_dir / (run_id + ".manifest.json");
      WriteFileAtomic(metrics, ToJson(report).dump(2) + "\n");
      WriteFileAtomic(manifest_path, manifest.dump(2) + "\n");
      summary.run_ids.push_back(run_id);
      summary.files.insert(summary.files.end(),
                           {predictions, metrics, manifest_path});
    }
  }
  return summary;
}

// ---- Report -----------------------------------------------------------------

std::vector<fs::path> RunReport(const RunConfig& config) {
  std::vector<fs::path> files;
  for (const auto& input : config.report.inputs) {
    if (fs::is_directory(input)) {
      for (const auto& entry : fs::directory_iterator(input)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.ends_with(".metrics.json")) {
          files.push_back(entry.path());
        }
      }
    } else if (fs::exists(input)) {
      files.push_back(input);
    } else {
      throw UsageError("report input " + input.string() + " does not exist");
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  if (files.empty()) throw UsageError("no metrics files to report");
  std::vector<EvaluationReport> reports;
  for (const auto& f : files) reports.push_back(ReadEvaluationReport(f));
  return RenderReports(reports, config.report.output_dir);
}

// ---- Validate ---------------------------------------------------------------

ValidateSummary RunValidate(const RunConfig& config) {
  ValidateSummary summary;
  json datasets = json::array();
  std::map<DatasetKind, std::vector<SplitIds>> by_kind;
  for (const auto& spec : config.datasets) {
    json entry;
    try {
      const ResolvedDataset resolved = ResolveDataset(spec);
      const IdSet exclusions = ApplicableExclusions(config, resolved.manifest);
      SplitIds split{resolved.manifest,
                     LoadIds(resolved.manifest.kind, resolved.manifest.source_uri,
                             resolved.manifest.language, exclusions)};
      split.manifest.excluded_ids = exclusions;
      entry = {{"source", resolved.manifest.source_uri},
               {"kind", DatasetKindName(resolved.manifest.kind)},
               {"language", resolved.manifest.language},
               {"examples", split.ids.size()},
               {"status", "ok"}};
      by_kind[resolved.manifest.kind].push_back(std::move(split));
    } catch (const Error& e) {
      summary.passed = false;
      entry = {{"source", spec.manifest.empty() ? spec.path.string()
                                                : spec.manifest.string()},
               {"status", "error"},
               {"error", e.what()}};
    }
    datasets.push_back(std::move(entry));
  }
  json parallel = json::array();
  for (const auto& [kind, splits] : by_kind) {
    if (splits.size() < 2) continue;
    const ParallelSplitReport report = ValidateParallelSplits(splits);
    summary.passed &= report.passed;
    json r = ToJson(report);
    r["kind"] = DatasetKindName(kind);
    parallel.push_back(std::move(r));
  }
  summary.details = {{"passed", summary.passed},
                     {"datasets", datasets},
                     {"parallel_splits", parallel}};
  return summary;
}

// ---- Annotate ---------------------------------------------------------------

void RunAnnotateServe(const RunConfig& config,
                      const std::function<void(int)>& on_ready,
                      const std::function<bool()>& stop) {
  if (!config.annotate) throw UsageError("run file has no annotate section");
  const AnnotateSpec& spec = *config.annotate;
  AnnotationStore store(spec.db);
  const auto annotators = AnnotatorsFromJson(spec.annotators);
  if (annotators.empty()) throw UsageError("annotate.annotators is empty");
  store.ProvisionAnnotators(annotators);
  for (const auto& path : spec.tasks) store.ImportTasks(ReadReviewTasks(path));

  AnnotationServerOptions options;
  options.host = spec.host;
  options.port = spec.port;
  options.static_dir = spec.static_dir;
  options.exclusions_kind = spec.exclusions_kind;
  AnnotationServer server(store, options);
  const int port = server.Start();
  if (on_ready) on_ready(port);
  while (!stop || !stop()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  server.Stop();
  if (!spec.exclusions_out.empty()) {
    WriteExclusions(spec.exclusions_out, spec.exclusions_kind, store.Exclusions());
  }
}

}  // namespace biaseval
