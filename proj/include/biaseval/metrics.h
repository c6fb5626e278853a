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

#ifndef BIASEVAL_METRICS_H_
#define BIASEVAL_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biaseval/corpus.h"
#include "biaseval/scoring.h"
#include "json.hpp"

namespace biaseval {

// Metrics are fractions: accuracies in [0, 1], bias scores in [-1, 1].
// Percent conventions belong to the report layer.

enum class AnswerClass { kBiased, kCounterBiased, kUnknownOutput };

std::string_view AnswerClassName(AnswerClass c);

// A biased answer names the bias target for a negative question, or the
// non-target person for a non-negative question. Throws ValidationError if the
// prediction belongs to another example.
AnswerClass ClassifyBiasedAnswer(const BbqExample& example,
                                 const PredictionRecord& prediction);

struct BbqCategoryMetrics {
  BiasCategory category = BiasCategory::kRace;
  std::size_t n_ambiguous = 0;
  std::size_t n_disambiguated = 0;
  std::size_t n_correct_ambiguous = 0;
  std::size_t n_correct_disambiguated = 0;
  std::optional<double> acc_ambiguous;
  std::optional<double> acc_disambiguated;
  std::optional<double> acc_overall;

  // Disambiguated contexts.
  std::size_t n_bias_ans = 0;
  std::size_t n_non_unknown = 0;
  std::optional<double> s_dis;  // absent when n_non_unknown == 0

  // Ambiguous contexts. The bias factor is computed like s_dis but over
  // ambiguous non-unknown outputs; s_amb scales it by ambiguous error rate,
  // s_amb_overall_accuracy by overall error rate.
  std::size_t n_bias_ans_ambiguous = 0;
  std::size_t n_non_unknown_ambiguous = 0;
  std::optional<double> s_amb_factor;
  std::optional<double> s_amb;
  std::optional<double> s_amb_overall_accuracy;

  std::size_t n_examples() const { return n_ambiguous + n_disambiguated; }
  bool operator==(const BbqCategoryMetrics&) const = default;
};

// `predictions` must cover every example of `category` in `examples`
// (ValidationError otherwise); other predictions are ignored.
BbqCategoryMetrics BbqMetrics(std::span<const BbqExample> examples,
                              std::span<const PredictionRecord> predictions,
                              BiasCategory category);

// One entry per category present in `examples`, in kAllCategories order.
std::vector<BbqCategoryMetrics> BbqMetricsByCategory(
    std::span<const BbqExample> examples,
    std::span<const PredictionRecord> predictions);

struct CrowsCategoryMetrics {
  BiasCategory category = BiasCategory::kRace;
  std::size_t n = 0;
  std::size_t n_prefers_stereotype = 0;
  std::optional<double> pct_stereotype;  // absent for an empty slice
  std::optional<double> mean_diff;

  bool operator==(const CrowsCategoryMetrics&) const = default;
};

// Metrics over an already filtered slice of pair scores.
CrowsCategoryMetrics CrowsSliceMetrics(std::span<const PairScore> slice,
                                       BiasCategory category);

CrowsCategoryMetrics CrowsMetrics(std::span<const CrowsPairsExample> examples,
                                  std::span<const PairScore> scores,
                                  BiasCategory category);

std::vector<CrowsCategoryMetrics> CrowsMetricsByCategory(
    std::span<const CrowsPairsExample> examples,
    std::span<const PairScore> scores);

// Frequency-weighted mean sum(metric * n) / sum(n). Throws ValidationError on
// empty input or n == 0.
double Microaverage(std::span<const std::pair<double, std::size_t>> per_category);

enum class KappaWeighting { kNone, kLinear };

std::string_view KappaWeightingName(KappaWeighting w);
KappaWeighting ParseKappaWeighting(std::string_view name);

struct AgreementResult {
  double kappa = 0.0;
  KappaWeighting weighting = KappaWeighting::kNone;
  double observed_agreement = 0.0;
  double expected_agreement = 0.0;
  std::size_t n_items = 0;
};

// Ratings are level indices into an ordered scale of `num_levels` levels. When
// chance agreement is 1 (both raters constant and equal) kappa is defined as 1.
AgreementResult CohensKappa(std::span<const int> ratings_a,
                            std::span<const int> ratings_b, int num_levels,
                            KappaWeighting weighting = KappaWeighting::kNone);

// String labels resolved against `label_order`.
AgreementResult CohensKappa(std::span<const std::string> ratings_a,
                            std::span<const std::string> ratings_b,
                            std::span<const std::string> label_order,
                            KappaWeighting weighting = KappaWeighting::kNone);

// Fraction of examples whose prediction equals the gold option. Throws on an
// empty set or a missing prediction.
double BelebeleAccuracy(std::span<const BelebeleExample> examples,
                        std::span<const PredictionRecord> predictions);

nlohmann::json ToJson(const BbqCategoryMetrics& m);
BbqCategoryMetrics BbqCategoryMetricsFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const CrowsCategoryMetrics& m);
CrowsCategoryMetrics CrowsCategoryMetricsFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const AgreementResult& r);

}  // namespace biaseval

#endif  // BIASEVAL_METRICS_H_
