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

#include "coat/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace coat {

using nlohmann::json;

namespace {

struct Sample {
  const PredictionRecord* pred;
  const ManifestEntry* gold;
};

struct Scores {
  double ad = 0.0;
  double ac = 0.0;
  ConfusionMatrix matrix;
};

Scores score(const std::vector<Sample>& samples, const LabelSet& labels, bool include_normal) {
  std::vector<AdLabel> pred_ad, gold_ad;
  std::vector<std::string> pred_ac, gold_ac;
  for (const auto& s : samples) {
    pred_ad.push_back(s.pred->predicted_ad);
    gold_ad.push_back(labels.is_normal(s.gold->gold_label) ? AdLabel::Normal : AdLabel::Abnormal);
    pred_ac.push_back(s.pred->predicted_ac);
    gold_ac.push_back(s.gold->gold_label);
  }
  return Scores{ad_f1(pred_ad, gold_ad), ac_f1(pred_ac, gold_ac, labels, include_normal),
                confusion(pred_ac, gold_ac, labels)};
}

ConfusionMatrix confusion_of(const std::vector<Sample>& samples, const LabelSet& labels) {
  if (samples.empty()) {
    ConfusionMatrix m;
    m.labels = labels.all();
    m.counts.assign(m.labels.size(), std::vector<std::int64_t>(m.labels.size(), 0));
    return m;
  }
  std::vector<std::string> pred, gold;
  for (const auto& s : samples) {
    pred.push_back(s.pred->predicted_ac);
    gold.push_back(s.gold->gold_label);
  }
  return confusion(pred, gold, labels);
}

json matrix_json(const RealMatrix& m) { return json{{"labels", m.labels}, {"values", m.values}}; }

std::string pad(const std::string& s, std::size_t width, bool left) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

}  // namespace

std::string format_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

std::string format_delta(double pp) {
  if (std::fabs(pp) < 0.005) return "+0.00";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f", pp);
  return buf;
}

std::string file_stem(std::string_view name) {
  std::string out(name);
  for (auto& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return out;
}

const ReportRow* MetricsReport::find(std::string_view row) const {
  for (const auto& r : rows) {
    if (r.name == row) return &r;
  }
  return nullptr;
}

MetricsReport build_report(std::span<const PredictionRecord> predictions,
                           std::span<const ManifestEntry> manifest, const LabelSet& labels,
                           const ReportOptions& options) {
  MetricsReport report;
  report.labels = labels.all();
  report.ac_include_normal = options.ac_include_normal;
  report.baseline_row = options.baseline_row;

  std::unordered_map<std::string, const ManifestEntry*> gold;
  for (const auto& e : manifest) {
    gold.emplace(e.video_id, &e);
    if (std::find(report.datasets.begin(), report.datasets.end(), e.dataset) ==
        report.datasets.end()) {
      report.datasets.push_back(e.dataset);
    }
  }
  if (predictions.empty()) throw MetricsError(MetricsErrc::EmptyInput, "no predictions");

  std::vector<std::string> order;
  std::map<std::string, std::vector<Sample>> by_row;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : predictions) {
    auto it = gold.find(p.video_id);
    if (it == gold.end()) {
      throw MetricsError(MetricsErrc::MissingGold, "video '" + p.video_id + "' is not in the manifest");
    }
    const auto row = p.row_name();
    if (!seen.emplace(row, p.video_id).second) {
      throw DataError(DataErrc::PredictionsInvalid, 0,
                      "duplicate prediction for '" + p.video_id + "' in row '" + row + "'");
    }
    if (!by_row.count(row)) order.push_back(row);
    by_row[row].push_back(Sample{&p, it->second});
  }
  if (options.baseline_row && !by_row.count(*options.baseline_row)) {
    throw UnknownBaselineRow(*options.baseline_row);
  }

  for (const auto& name : order) {
    const auto& samples = by_row[name];
    ReportRow row;
    row.name = name;
    row.videos = samples.size();
    for (const auto& dataset : report.datasets) {
      std::vector<Sample> subset;
      for (const auto& s : samples) {
        if (s.gold->dataset == dataset) subset.push_back(s);
      }
      if (subset.empty()) continue;
      auto sc = score(subset, labels, options.ac_include_normal);
      ReportCell cell;
      cell.videos = subset.size();
      for (const auto& s : subset) cell.fallbacks += s.pred->fallback;
      cell.ad_f1 = sc.ad;
      cell.ac_f1 = sc.ac;
      cell.matrix = std::move(sc.matrix);
      row.cells.emplace(dataset, std::move(cell));
    }
    for (const auto& s : samples) row.fallbacks += s.pred->fallback;

    if (options.split_by_resolution) {
      std::vector<Sample> high, low;
      for (const auto& s : samples) {
        (s.gold->resolution == Resolution::High ? high : low).push_back(s);
      }
      ResolutionSplit split;
      split.high_videos = high.size();
      split.low_videos = low.size();
      split.high = row_normalize(confusion_of(high, labels));
      split.low = row_normalize(confusion_of(low, labels));
      if (!high.empty() && !low.empty()) split.diff = diff_matrix(split.high, split.low);
      row.split = std::move(split);
    }
    report.rows.push_back(std::move(row));
  }

  if (options.baseline_row) {
    const auto base = *report.find(*options.baseline_row);
    for (auto& row : report.rows) {
      if (row.name == base.name) continue;
      for (auto& [dataset, cell] : row.cells) {
        auto it = base.cells.find(dataset);
        if (it == base.cells.end()) continue;
        cell.ad_delta_pp = 100.0 * (cell.ad_f1 - it->second.ad_f1);
        cell.ac_delta_pp = 100.0 * (cell.ac_f1 - it->second.ac_f1);
      }
    }
  }
  return report;
}

std::string MetricsReport::render_text() const {
  const bool deltas = baseline_row.has_value();
  std::vector<std::vector<std::string>> table;

  std::vector<std::string> header{"Row"};
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    header.insert(header.end(), {"AD", "AC"});
    if (deltas) header.insert(header.end(), {"dAD", "dAC"});
  }
  header.insert(header.end(), {"Videos", "Fallbacks"});
  table.push_back(header);

  for (const auto& row : rows) {
    std::vector<std::string> line{row.name};
    for (const auto& dataset : datasets) {
      auto it = row.cells.find(dataset);
      if (it == row.cells.end()) {
        line.insert(line.end(), deltas ? 4 : 2, "-");
        continue;
      }
      const auto& c = it->second;
      line.push_back(format_pct(c.ad_f1));
      line.push_back(format_pct(c.ac_f1));
      if (deltas) {
        line.push_back(c.ad_delta_pp ? format_delta(*c.ad_delta_pp) : "-");
        line.push_back(c.ac_delta_pp ? format_delta(*c.ac_delta_pp) : "-");
      }
    }
    line.push_back(std::to_string(row.videos));
    line.push_back(std::to_string(row.fallbacks));
    table.push_back(std::move(line));
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  const std::size_t per_dataset = deltas ? 4 : 2;
  // Dataset names span their column group; widen the group if a name is long.
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    std::size_t span = per_dataset - 1;
    for (std::size_t k = 0; k < per_dataset; ++k) span += width[1 + d * per_dataset + k] + 1;
    if (datasets[d].size() > span) width[1 + d * per_dataset] += datasets[d].size() - span;
  }

  std::string out;
  out += "# AD F1: binary, Abnormal is the positive class\n";
  out += "# AC F1: macro average over " + std::to_string(labels.size() - (ac_include_normal ? 0 : 1)) +
         " labels, Normal " + (ac_include_normal ? "included" : "excluded") +
         "; labels absent from both gold and predictions are skipped\n";
  out += "# Fallback classifications are scored as predicted\n";
  if (deltas) out += "# dAD/dAC: percentage points against row '" + *baseline_row + "'\n";

  std::string group = pad("", width[0], true);
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    std::size_t span = 0;
    for (std::size_t k = 0; k < per_dataset; ++k) span += width[1 + d * per_dataset + k] + 2;
    group += "  " + pad(datasets[d], span - 2, true);
  }
  while (!group.empty() && group.back() == ' ') group.pop_back();
  out += group + "\n";

  for (const auto& line : table) {
    std::string text;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) text += "  ";
      text += pad(line[i], width[i], i == 0);
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + "\n";
  }
  return out;
}

json MetricsReport::to_json() const {
  json rows_json = json::array();
  for (const auto& row : rows) {
    json cells = json::object();
    for (const auto& [dataset, c] : row.cells) {
      json cell{{"videos", c.videos},
                {"fallbacks", c.fallbacks},
                {"ad_f1", c.ad_f1},
                {"ac_f1", c.ac_f1},
                {"ad_pct", format_pct(c.ad_f1)},
                {"ac_pct", format_pct(c.ac_f1)},
                {"confusion", c.matrix.counts}};
      cell["ad_delta"] = c.ad_delta_pp ? json(format_delta(*c.ad_delta_pp)) : json(nullptr);
      cell["ac_delta"] = c.ac_delta_pp ? json(format_delta(*c.ac_delta_pp)) : json(nullptr);
      cells[dataset] = std::move(cell);
    }
    json r{{"name", row.name}, {"videos", row.videos}, {"fallbacks", row.fallbacks},
           {"datasets", std::move(cells)}};
    if (row.split) {
      json split{{"high_videos", row.split->high_videos},
                 {"low_videos", row.split->low_videos},
                 {"high", matrix_json(row.split->high)},
                 {"low", matrix_json(row.split->low)}};
      split["diff"] = row.split->diff ? matrix_json(*row.split->diff) : json(nullptr);
      r["resolution_split"] = std::move(split);
    }
    rows_json.push_back(std::move(r));
  }
  return json{{"version", 1},
              {"ad_positive_class", "Abnormal"},
              {"ac_average", "macro"},
              {"ac_include_normal", ac_include_normal},
              {"baseline_row", baseline_row ? json(*baseline_row) : json(nullptr)},
              {"datasets", datasets},
              {"labels", labels},
              {"rows", std::move(rows_json)}};
}

std::vector<std::string> write_report(const MetricsReport& report,
                                      const std::filesystem::path& dir) {
  std::vector<std::string> written;
  auto emit = [&](const std::string& rel, std::string_view content) {
    write_file(dir / rel, content);
    written.push_back(rel);
  };
  emit("report.txt", report.render_text());
  emit("report.json", report.to_json().dump(2) + "\n");
  for (const auto& row : report.rows) {
    const auto stem = "matrices/" + file_stem(row.name);
    for (const auto& [dataset, cell] : row.cells) {
      const auto base = stem + "." + file_stem(dataset);
      emit(base + ".counts.csv", matrix_csv(cell.matrix));
      emit(base + ".normalized.csv", matrix_csv(row_normalize(cell.matrix)));
    }
    if (row.split) {
      emit(stem + ".resolution-high.csv", matrix_csv(row.split->high));
      emit(stem + ".resolution-low.csv", matrix_csv(row.split->low));
      if (row.split->diff) emit(stem + ".resolution-diff.csv", matrix_csv(*row.split->diff));
    }
  }
  return written;
}

}  // namespace coat
