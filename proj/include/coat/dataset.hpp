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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coat/agents.hpp"
#include "coat/session.hpp"

namespace coat {

enum class Resolution { High, Low };

std::string_view to_string(Resolution r);
std::optional<Resolution> parse_resolution(std::string_view text);

enum class DataErrc { ManifestInvalid, PredictionsInvalid };

std::string_view to_string(DataErrc code);

/// Bad manifest or predictions file. `line()` is 1-based, 0 for file-level
/// problems.
class DataError : public std::runtime_error {
 public:
  DataError(DataErrc code, std::size_t line, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) +
                           (line ? ": line " + std::to_string(line) : std::string()) + ": " +
                           what),
        code_(code),
        line_(line) {}

  DataErrc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  DataErrc code_;
  std::size_t line_;
};

struct ManifestEntry {
  std::string video_id;
  std::string uri;
  std::string gold_label;  ///< canonical spelling from the label set
  Resolution resolution = Resolution::High;
  std::string dataset;
  MediaKind kind = MediaKind::VideoFile;

  MediaRef media() const { return MediaRef{video_id, uri, kind}; }
  nlohmann::json to_json() const;
  bool operator==(const ManifestEntry&) const = default;
};

/// JSONL, one object per line: video_id, uri, gold_label, resolution
/// ("high"/"low"), dataset and optional kind. Blank lines are skipped.
std::vector<ManifestEntry> parse_manifest(std::string_view text, const LabelSet& labels);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         const LabelSet& labels);

struct PredictionRecord {
  std::string video_id;
  std::string predicted_ac;
  AdLabel predicted_ad = AdLabel::Normal;
  std::string strategy;  ///< "coat" or a baseline name
  std::string variant;   ///< "l1".."joint" for coat, the strategy name otherwise
  bool fallback = false;

  /// Report row name: "coat-l4", "direct", ...
  std::string row_name() const;
  nlohmann::json to_json() const;
  bool operator==(const PredictionRecord&) const = default;
};

/// Throws std::invalid_argument when the session has no classification.
PredictionRecord make_prediction(const SessionResult& result);

/// Sorted by video_id (then row name), one compact JSON object per line.
std::string predictions_jsonl(std::vector<PredictionRecord> records);

/// Checks label membership and that predicted_ad agrees with predicted_ac.
std::vector<PredictionRecord> parse_predictions(std::string_view text, const LabelSet& labels);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               const LabelSet& labels);

/// Whole-file helpers; throw std::runtime_error naming the path.
std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace coat
