/*
 * Copyright (C) 2026 The coat Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>
#include <vector>

namespace coat::testing {

// Brute-force reference metrics. Labels are plain strings compared exactly;
// "positive" is the binary positive class. Each class is scored by its own
// pass over the samples, via precision and recall.

struct ClassCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

ClassCounts oracle_counts(const std::vector<std::string>& pred,
                          const std::vector<std::string>& gold, const std::string& label);

/// 2PR/(P+R), 0 when TP is 0.
double oracle_f1(const ClassCounts& c);

double oracle_binary_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
                        const std::string& positive);

/// Mean over `classes` of the per-class F1, skipping classes that appear in
/// neither sequence.
double oracle_macro_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
                       const std::vector<std::string>& classes);

std::vector<std::vector<long>> oracle_confusion(const std::vector<std::string>& pred,
                                                const std::vector<std::string>& gold,
                                                const std::vector<std::string>& labels);

std::vector<std::vector<double>> oracle_normalize(const std::vector<std::vector<long>>& counts);

std::vector<std::vector<double>> oracle_diff(const std::vector<std::vector<double>>& a,
                                             const std::vector<std::vector<double>>& b);

}  // namespace coat::testing
