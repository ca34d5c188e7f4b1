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

#include "eval_cases.hpp"

#include <cstdio>

namespace coat::testing {

namespace {

PredictionRecord predict(const ManifestEntry& e, const std::string& ac, const LabelSet& labels,
                         const std::string& strategy, const std::string& variant) {
  PredictionRecord p;
  p.video_id = e.video_id;
  p.predicted_ac = ac;
  p.predicted_ad = labels.is_normal(ac) ? AdLabel::Normal : AdLabel::Abnormal;
  p.strategy = strategy;
  p.variant = variant;
  return p;
}

ManifestEntry entry(const std::string& id, const std::string& gold, const std::string& dataset,
                    Resolution res) {
  ManifestEntry e;
  e.video_id = id;
  e.uri = id + ".mp4";
  e.gold_label = gold;
  e.dataset = dataset;
  e.resolution = res;
  return e;
}

std::string vid(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d", prefix, i);
  return buf;
}

}  // namespace

namespace {

std::pair<BinaryCounts, BinaryCounts> search() {
  // F1 = 2TP / (TP + FP + G). Want F1_b - F1_a = 59/500 exactly.
  for (int total = 2; total <= 200; ++total) {
    for (int g = 1; g <= total; ++g) {
      const int n = total - g;
      for (int tp_a = 0; tp_a <= g; ++tp_a) {
        for (int fp_a = 0; fp_a <= n; ++fp_a) {
          const long da = tp_a + fp_a + g;
          for (int tp_b = 0; tp_b <= g; ++tp_b) {
            for (int fp_b = 0; fp_b <= n; ++fp_b) {
              const long db = tp_b + fp_b + g;
              if (500L * (2L * tp_b * da - 2L * tp_a * db) == 59L * da * db) {
                return {BinaryCounts{g, n, tp_a, fp_a}, BinaryCounts{g, n, tp_b, fp_b}};
              }
            }
          }
        }
      }
    }
  }
  return {};
}

}  // namespace

std::pair<BinaryCounts, BinaryCounts> search_ad_gap_of_11_80() {
  static const auto found = search();
  return found;
}

EvalCase ad_gap_case() {
  EvalCase c;
  const auto [a, b] = search_ad_gap_of_11_80();
  const auto& crimes = c.labels.crime_labels();
  for (int i = 0; i < a.gold_abnormal; ++i) {
    c.manifest.push_back(entry(vid("abn", i), crimes[static_cast<std::size_t>(i) % crimes.size()],
                               "UCF-Crime", Resolution::Low));
  }
  for (int i = 0; i < a.gold_normal; ++i) {
    c.manifest.push_back(entry(vid("nrm", i), "Normal", "UCF-Crime", Resolution::Low));
  }
  auto rows = [&](const BinaryCounts& k, const std::string& strategy, const std::string& variant) {
    std::vector<PredictionRecord> out;
    for (int i = 0; i < k.gold_abnormal; ++i) {
      const auto& e = c.manifest[static_cast<std::size_t>(i)];
      out.push_back(predict(e, i < k.tp ? e.gold_label : "Normal", c.labels, strategy, variant));
    }
    for (int i = 0; i < k.gold_normal; ++i) {
      const auto& e = c.manifest[static_cast<std::size_t>(k.gold_abnormal + i)];
      out.push_back(predict(e, i < k.fp ? "Robbery" : "Normal", c.labels, strategy, variant));
    }
    return out;
  };
  c.first = rows(a, "direct", "direct");
  c.second = rows(b, "coat", "joint");
  return c;
}

EvalCase resolution_case() {
  EvalCase c;
  c.labels = LabelSet("Normal", {"A", "B", "C"});
  const auto all = c.labels.all();
  int i = 0;
  for (const auto& gold : all) {
    for (int k = 0; k < 2; ++k) {
      auto e = entry(vid("hi", i++), gold, "BetterUCF", Resolution::High);
      c.manifest.push_back(e);
      c.first.push_back(predict(e, gold, c.labels, "coat", "joint"));
    }
  }
  for (const auto& gold : all) {
    for (const auto& pred : all) {
      auto e = entry(vid("lo", i++), gold, "UCF-Crime", Resolution::Low);
      c.manifest.push_back(e);
      c.first.push_back(predict(e, pred, c.labels, "coat", "joint"));
    }
  }
  return c;
}

}  // namespace coat::testing
