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


// biaseval: translate, annotate, evaluate and report bias benchmarks.
//
//   biaseval translate      --config run.json
//   biaseval annotate-serve --config run.json [--port N]
//   biaseval evaluate       --config run.json [--output-dir DIR]
//   biaseval report         --config run.json [--input PATH]... [--output-dir DIR]
//   biaseval validate       --config run.json
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 transport.

#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "biaseval/error.h"
#include "biaseval/pipeline.h"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void OnSignal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  using namespace biaseval;

  CLI::App app{"Multilingual stereotype-bias evaluation harness"};
  app.require_subcommand(1);
  std::string config_path;
  std::string output_dir;
  std::vector<std::string> inputs;
  int port = -1;

  auto* translate = app.add_subcommand("translate", "Machine-translate a dataset");
  auto* serve = app.add_subcommand("annotate-serve", "Run the annotation service");
  auto* evaluate = app.add_subcommand("evaluate", "Score datasets and compute metrics");
  auto* report = app.add_subcommand("report", "Render heatmaps and tables");
  auto* validate = app.add_subcommand("validate", "Check datasets, manifests and splits");
  for (auto* sub : {translate, serve, evaluate, report, validate}) {
    sub->add_option("--config", config_path, "Run file (JSON)")->required();
  }
  serve->add_option("--port", port, "Listen port (overrides the run file)");
  evaluate->add_option("--output-dir", output_dir, "Output directory");
  report->add_option("--output-dir", output_dir, "Report directory");
  report->add_option("--input", inputs, "Metrics file or directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig config = LoadRunConfig(config_path);
    if (*translate) {
      const TranslateSummary s = RunTranslate(config);
      std::cout << "translated " << s.manifests.size() << " split(s), "
                << s.provider_calls << " provider call(s), " << s.record_errors
                << " record error(s), " << s.flagged << " flagged record(s)\n";
      for (const auto& m : s.manifests) std::cout << "  " << m.string() << "\n";
      for (const auto& r : s.review_files) std::cout << "  " << r.string() << "\n";
    } else if (*serve) {
      if (port >= 0 && config.annotate) config.annotate->port = port;
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      RunAnnotateServe(
          config,
          [](int bound) {
            std::cout << "annotation service listening on port " << bound
                      << std::endl;
          },
          [] { return g_stop != 0; });
    } else if (*evaluate) {
      if (!output_dir.empty()) config.output_dir = output_dir;
      const EvaluateSummary s = RunEvaluate(config);
      for (const auto& f : s.files) std::cout << f.string() << "\n";
    } else if (*report) {
      if (!output_dir.empty()) config.report.output_dir = output_dir;
      if (!inputs.empty()) {
        config.report.inputs.assign(inputs.begin(), inputs.end());
      }
      for (const auto& f : RunReport(config)) std::cout << f.string() << "\n";
    } else if (*validate) {
      const ValidateSummary s = RunValidate(config);
      std::cout << s.details.dump(2) << "\n";
      return s.passed ? 0 : 2;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
