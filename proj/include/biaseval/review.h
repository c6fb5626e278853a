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

#ifndef BIASEVAL_REVIEW_H_
#define BIASEVAL_REVIEW_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace biaseval {

enum class TaskStatus { kPending, kDone };

// One sample shown to annotators: the source text and each provider's
// translation of it. Status is per annotator.
struct ReviewTask {
  std::string sample_id;
  std::string language;
  std::string source_text;
  std::map<std::string, std::string> candidate_translations;  // provider -> text
  TaskStatus status = TaskStatus::kPending;

  bool operator==(const ReviewTask&) const = default;
};

nlohmann::json ToJson(const ReviewTask& task);
ReviewTask ReviewTaskFromJson(const nlohmann::json& json);

// Review-sample file: one ReviewTask JSON per line.
std::vector<ReviewTask> ReadReviewTasks(const std::filesystem::path& path);
void WriteReviewTasks(const std::filesystem::path& path,
                      const std::vector<ReviewTask>& tasks);

}  // namespace biaseval

#endif  // BIASEVAL_REVIEW_H_
