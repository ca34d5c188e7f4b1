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

#include "coat/metrics.hpp"

#include <cstdio>
#include <cstdlib>
#include <numeric>

namespace coat {

namespace {

void check_pairs(std::size_t npred, std::size_t ngold) {
  if (npred != ngold) {
    throw MetricsError(MetricsErrc::MissingGold, std::to_string(npred) + " predictions but " +
                                                     std::to_string(ngold) + " gold labels");
  }
  if (npred == 0) throw MetricsError(MetricsErrc::EmptyInput, "no samples");
}

std::size_t label_index(const std::vector<std::string>& all, const LabelSet& labels,
                        std::string_view label) {
  auto canon = labels.canonical(label);
  if (!canon) throw MetricsError(MetricsErrc::UnknownLabel, "'" + std::string(label) + "'");
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] == *canon) return i;
  }
  throw MetricsError(MetricsErrc::UnknownLabel, "'" + std::string(label) + "'");
}

double f1(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  const auto denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto end = line.find(sep, start);
    out.emplace_back(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

template <typename Row>
std::string csv(const std::vector<std::string>& labels, const std::vector<Row>& rows,
                auto&& fmt) {
  std::string out = "gold\\pred";
  for (const auto& l : labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += labels[i];
    for (auto v : rows[i]) out += "," + fmt(v);
    out += "\n";
  }
  return out;
}

}  // namespace

std::string_view to_string(MetricsErrc code) {
  switch (code) {
    case MetricsErrc::MissingGold: return "MissingGold";
    case MetricsErrc::EmptyInput: return "EmptyInput";
    case MetricsErrc::ShapeMismatch: return "ShapeMismatch";
    case MetricsErrc::UnknownLabel: return "UnknownLabel";
  }
  return "?";
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts) sum = std::accumulate(row.begin(), row.end(), sum);
  return sum;
}

double ad_f1(std::span<const AdLabel> pred, std::span<const AdLabel> gold) {
  check_pairs(pred.size(), gold.size());
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == AdLabel::Abnormal;
    const bool g = gold[i] == AdLabel::Abnormal;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  return f1(tp, fp, fn);
}

double ac_f1(std::span<const std::string> pred, std::span<const std::string> gold,
             const LabelSet& labels, bool include_normal) {
  const auto m = confusion(pred, gold, labels);
  const auto n = m.labels.size();
  double sum = 0.0;
  int classes = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (!include_normal && c == 0) continue;
    std::int64_t tp = m.counts[c][c], fp = 0, fn = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == c) continue;
      fp += m.counts[k][c];
      fn += m.counts[c][k];
    }
    if (tp + fp + fn == 0) continue;
    sum += f1(tp, fp, fn);
    ++classes;
  }
  return classes == 0 ? 0.0 : sum / classes;
}

ConfusionMatrix confusion(std::span<const std::string> pred, std::span<const std::string> gold,
                          const LabelSet& labels) {
  check_pairs(pred.size(), gold.size());
  ConfusionMatrix m;
  m.labels = labels.all();
  m.counts.assign(m.labels.size(), std::vector<std::int64_t>(m.labels.size(), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++m.counts[label_index(m.labels, labels, gold[i])][label_index(m.labels, labels, pred[i])];
  }
  return m;
}

RealMatrix row_normalize(const ConfusionMatrix& m) {
  RealMatrix out;
  out.labels = m.labels;
  for (const auto& row : m.counts) {
    const auto sum = std::accumulate(row.begin(), row.end(), std::int64_t{0});
    auto& dst = out.values.emplace_back(row.size(), 0.0);
    if (sum <= 0) continue;
    for (std::size_t j = 0; j < row.size(); ++j) {
      dst[j] = static_cast<double>(row[j]) / static_cast<double>(sum);
    }
  }
  return out;
}

RealMatrix diff_matrix(const RealMatrix& high, const RealMatrix& low) {
  if (high.labels != low.labels || high.values.size() != low.values.size()) {
    throw MetricsError(MetricsErrc::ShapeMismatch, "label orders differ");
  }
  RealMatrix out{high.labels, {}};
  for (std::size_t i = 0; i < high.values.size(); ++i) {
    const auto& h = high.values[i];
    const auto& l = low.values[i];
    if (h.size() != l.size() || h.size() != high.labels.size()) {
      throw MetricsError(MetricsErrc::ShapeMismatch, "row " + std::to_string(i) + " width differs");
    }
    auto& dst = out.values.emplace_back(h.size());
    for (std::size_t j = 0; j < h.size(); ++j) dst[j] = h[j] - l[j];
  }
  return out;
}

std::string matrix_csv(const RealMatrix& m) { return csv(m.labels, m.values, format_g17); }

std::string matrix_csv(const ConfusionMatrix& m) {
  return csv(m.labels, m.counts, [](std::int64_t v) { return std::to_string(v); });
}

RealMatrix parse_matrix_csv(std::string_view text) {
  RealMatrix m;
  std::size_t row = 0;
  for (const auto& line : split(text, '\n')) {
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (row == 0) {
      m.labels.assign(cells.begin() + 1, cells.end());
    } else {
      if (row > m.labels.size() || cells.size() != m.labels.size() + 1 || cells[0] != m.labels[row - 1]) {
        throw MetricsError(MetricsErrc::ShapeMismatch, "bad matrix row " + std::to_string(row));
      }
      auto& dst = m.values.emplace_back();
      for (std::size_t j = 1; j < cells.size(); ++j) {
        char* end = nullptr;
        dst.push_back(std::strtod(cells[j].c_str(), &end));
        if (end == cells[j].c_str() || *end != '\0') {
          throw MetricsError(MetricsErrc::ShapeMismatch, "bad number '" + cells[j] + "'");
        }
      }
    }
    ++row;
  }
  if (row == 0 || m.values.size() != m.labels.size()) {
    throw MetricsError(MetricsErrc::ShapeMismatch, "matrix is not square");
  }
  return m;
}

}  // namespace coat
