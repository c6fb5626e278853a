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

#ifndef BIASEVAL_EXACT_SUM_H_
#define BIASEVAL_EXACT_SUM_H_

#include <span>

namespace biaseval {

// Correctly rounded sum of finite doubles (Shewchuk's non-overlapping
// partials with a final half-way correction). The result does not depend on
// the order of `values`, which keeps aggregate metrics permutation-invariant.
double ExactSum(std::span<const double> values);

}  // namespace biaseval

#endif  // BIASEVAL_EXACT_SUM_H_
