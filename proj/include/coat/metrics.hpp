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

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coat/agents.hpp"

namespace coat {

enum class MetricsErrc { MissingGold, EmptyInput, ShapeMismatch, UnknownLabel };

std::string_view to_string(MetricsErrc code);

class MetricsError : public std::runtime_error {
 public:
  MetricsError(MetricsErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  MetricsErrc code() const noexcept { return code_; }

 private:
  MetricsErrc code_;
};

/// Rows are gold labels, columns predictions, both in LabelSet::all() order.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::int64_t>> counts;

  std::int64_t total() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

struct RealMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;

  bool operator==(const RealMatrix&) const = default;
};

// The metric functions take parallel prediction/gold sequences (index i of
// each refers to the same video). A length mismatch is MissingGold and zero
// samples is EmptyInput.

/// Binary F1 with Abnormal as the positive class; 0 when 2TP+FP+FN is 0.
double ad_f1(std::span<const AdLabel> pred, std::span<const AdLabel> gold);

/// Macro F1 over the label set, skipping classes absent from both sides.
/// With `include_normal` false the normal class is left out of the mean.
/// Labels are matched case-insensitively; unknown ones throw UnknownLabel.
double ac_f1(std::span<const std::string> pred, std::span<const std::string> gold,
             const LabelSet& labels, bool include_normal = true);

ConfusionMatrix confusion(std::span<const std::string> pred, std::span<const std::string> gold,
                          const LabelSet& labels);

/// Rows with a positive sum are divided by it; zero rows stay zero.
RealMatrix row_normalize(const ConfusionMatrix& m);

/// Elementwise high - low. Throws ShapeMismatch unless labels match in order.
RealMatrix diff_matrix(const RealMatrix& high, const RealMatrix& low);

/// Header row and column of labels; values printed with %.17g so that
/// parse_matrix_csv gives back the exact doubles.
std::string matrix_csv(const RealMatrix& m);
std::string matrix_csv(const ConfusionMatrix& m);
RealMatrix parse_matrix_csv(std::string_view text);

}  // namespace coat
