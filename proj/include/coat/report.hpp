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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coat/dataset.hpp"
#include "coat/metrics.hpp"

namespace coat {

class UnknownBaselineRow : public std::runtime_error {
 public:
  explicit UnknownBaselineRow(const std::string& row)
      : std::runtime_error("UnknownBaselineRow: no row named '" + row + "'"), row_(row) {}

  const std::string& row() const noexcept { return row_; }

 private:
  std::string row_;
};

struct ReportOptions {
  std::optional<std::string> baseline_row;
  bool ac_include_normal = true;
  bool split_by_resolution = false;
};

/// Scores of one row on one dataset.
struct ReportCell {
  std::size_t videos = 0;
  std::size_t fallbacks = 0;
  double ad_f1 = 0.0;
  double ac_f1 = 0.0;
  ConfusionMatrix matrix;
  std::optional<double> ad_delta_pp;  ///< set on non-baseline rows when a baseline is named
  std::optional<double> ac_delta_pp;
};

/// Row-normalized matrices over all of a row's videos, split by resolution.
/// `diff` (high - low) is present only when both resolutions occur.
struct ResolutionSplit {
  std::size_t high_videos = 0;
  std::size_t low_videos = 0;
  RealMatrix high;
  RealMatrix low;
  std::optional<RealMatrix> diff;
};

struct ReportRow {
  std::string name;
  std::size_t videos = 0;
  std::size_t fallbacks = 0;
  std::map<std::string, ReportCell> cells;  ///< by dataset; absent when the row has no videos there
  std::optional<ResolutionSplit> split;
};

struct MetricsReport {
  std::vector<std::string> datasets;  ///< manifest order of first appearance
  std::vector<std::string> labels;
  std::vector<ReportRow> rows;        ///< order of first appearance in the predictions
  std::optional<std::string> baseline_row;
  bool ac_include_normal = true;

  const ReportRow* find(std::string_view row) const;

  /// Aligned table: one column group (AD, AC and, with a baseline, their
  /// deltas) per dataset, preceded by comment lines stating the averaging.
  std::string render_text() const;
  nlohmann::json to_json() const;
};

/// Groups predictions by row name and scores each group per dataset against
/// the manifest gold labels. Throws MetricsError(MissingGold) for videos not
/// in the manifest, DataError for duplicate predictions and
/// UnknownBaselineRow.
MetricsReport build_report(std::span<const PredictionRecord> predictions,
                           std::span<const ManifestEntry> manifest, const LabelSet& labels,
                           const ReportOptions& options = {});

/// 0.5 -> "50.00".
std::string format_pct(double fraction);
/// 11.8 -> "+11.80"; values that round to zero print "+0.00".
std::string format_delta(double pp);

/// Writes report.txt, report.json and matrices/*.csv under `dir`. Returns
/// the written paths, relative to `dir`, in write order.
std::vector<std::string> write_report(const MetricsReport& report,
                                      const std::filesystem::path& dir);

/// File stem used for a row's matrices: non-alphanumerics become '_'.
std::string file_stem(std::string_view name);

}  // namespace coat
