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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "coat/metrics.hpp"
#include "coat/report.hpp"
#include "eval_cases.hpp"
#include "golden.hpp"
#include "metrics_oracle.hpp"

using namespace coat;
using namespace coat::testing;

namespace {

using Labels = std::vector<std::string>;

std::vector<AdLabel> ad_of(const Labels& ac, const LabelSet& labels) {
  std::vector<AdLabel> out;
  for (const auto& l : ac) out.push_back(labels.is_normal(l) ? AdLabel::Normal : AdLabel::Abnormal);
  return out;
}

Labels ad_names(const Labels& ac, const LabelSet& labels) {
  Labels out;
  for (const auto& l : ac) out.push_back(labels.is_normal(l) ? "Normal" : "Abnormal");
  return out;
}

template <typename Fn>
MetricsErrc metrics_error_of(Fn&& fn) {
  try {
    fn();
  } catch (const MetricsError& e) {
    return e.code();
  }
  FAIL("expected MetricsError");
  return MetricsErrc::EmptyInput;
}

template <typename Fn>
DataError data_error_of(Fn&& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e;
  }
  FAIL("expected DataError");
  return DataError(DataErrc::ManifestInvalid, 0, "");
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

/// Random instance: 1..200 samples over 2..14 labels.
struct Instance {
  LabelSet labels = LabelSet::ucf_crime();
  Labels pred;
  Labels gold;
};

Instance random_instance(std::mt19937_64& rng) {
  const int k = std::uniform_int_distribution<int>(2, 14)(rng);
  const int n = std::uniform_int_distribution<int>(1, 200)(rng);
  std::vector<std::string> crimes;
  for (int i = 1; i < k; ++i) crimes.push_back("Class" + std::to_string(i));
  Instance inst{LabelSet("Normal", crimes), {}, {}};
  const auto all = inst.labels.all();
  // Skewed draws so some classes go missing and agreement is common.
  std::uniform_int_distribution<int> pick(0, k - 1);
  const int used = std::uniform_int_distribution<int>(1, k)(rng);
  for (int i = 0; i < n; ++i) {
    const auto g = all[static_cast<std::size_t>(pick(rng) % used)];
    inst.gold.push_back(g);
    inst.pred.push_back(rng() % 3 == 0 ? g : all[static_cast<std::size_t>(pick(rng))]);
  }
  return inst;
}

}  // namespace

TEST_CASE("ad_f1 worked examples") {
  using A = AdLabel;
  const std::vector<A> pred{A::Abnormal, A::Abnormal, A::Normal, A::Normal};
  const std::vector<A> gold{A::Abnormal, A::Normal, A::Abnormal, A::Normal};
  CHECK(ad_f1(pred, gold) == 0.5);
  CHECK(ad_f1(gold, gold) == 1.0);
  const std::vector<A> none(4, A::Normal);
  CHECK(ad_f1(none, gold) == 0.0);
  CHECK(ad_f1(none, none) == 0.0);
  CHECK(metrics_error_of([&] { ad_f1(pred, std::vector<A>{A::Normal}); }) == MetricsErrc::MissingGold);
  CHECK(metrics_error_of([] { ad_f1({}, {}); }) == MetricsErrc::EmptyInput);
}

TEST_CASE("ac_f1 worked examples") {
  const LabelSet two("X", {"Y"});
  const Labels gold{"X", "X", "Y", "Y"}, pred{"X", "Y", "Y", "Y"};
  CHECK(ac_f1(pred, gold, two) == doctest::Approx(11.0 / 15.0).epsilon(1e-15));
  CHECK(std::abs(ac_f1(pred, gold, two) - 11.0 / 15.0) < 1e-15);
  CHECK(std::abs(ac_f1(pred, gold, two) - oracle_macro_f1(pred, gold, {"X", "Y"})) < 1e-12);

  const LabelSet three("Normal", {"A", "B"});
  const Labels g3{"Normal", "A", "B", "a"};
  CHECK(ac_f1(g3, g3, three) == 1.0);

  // All predictions one class over balanced 13-class gold.
  const auto ucf = LabelSet::ucf_crime();
  Labels g13, p13;
  for (const auto& c : ucf.crime_labels()) {
    for (int i = 0; i < 5; ++i) {
      g13.push_back(c);
      p13.push_back("Robbery");
    }
  }
  const double macro = ac_f1(p13, g13, ucf);
  CHECK(macro < 0.1);
  CHECK(std::abs(macro - oracle_macro_f1(p13, g13, ucf.all())) < 1e-12);

  CHECK(metrics_error_of([&] { ac_f1(Labels{"Jaywalking"}, Labels{"Robbery"}, ucf); }) ==
        MetricsErrc::UnknownLabel);
  CHECK(metrics_error_of([&] { ac_f1(Labels{"Robbery"}, Labels{}, ucf); }) == MetricsErrc::MissingGold);
}

TEST_CASE("confusion, row_normalize and diff_matrix examples") {
  const LabelSet three("Normal", {"A", "B"});
  const auto single = confusion(Labels{"B"}, Labels{"A"}, three);
  CHECK(single.labels == three.all());
  CHECK(single.total() == 1);
  CHECK(single.counts[1][2] == 1);

  const Labels g{"Normal", "A", "A", "B"};
  const auto perfect = confusion(g, g, three);
  CHECK(perfect.counts == std::vector<std::vector<std::int64_t>>{{1, 0, 0}, {0, 2, 0}, {0, 0, 1}});

  ConfusionMatrix m{{"X", "Y"}, {{2, 2}, {0, 0}}};
  const auto n = row_normalize(m);
  CHECK(n.values == std::vector<std::vector<double>>{{0.5, 0.5}, {0.0, 0.0}});

  CHECK(diff_matrix(n, n).values == std::vector<std::vector<double>>{{0, 0}, {0, 0}});
  RealMatrix swapped{{"Y", "X"}, n.values};
  CHECK(metrics_error_of([&] { diff_matrix(n, swapped); }) == MetricsErrc::ShapeMismatch);
}

TEST_CASE("identity minus uniform over four labels") {
  const auto k = 4;
  RealMatrix identity{{"Normal", "A", "B", "C"}, {}};
  RealMatrix uniform = identity;
  for (int r = 0; r < k; ++r) {
    identity.values.emplace_back(k, 0.0);
    identity.values.back()[static_cast<std::size_t>(r)] = 1.0;
    uniform.values.emplace_back(k, 1.0 / k);
  }
  const auto d = diff_matrix(identity, uniform);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      CHECK(d.values[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] ==
            (r == c ? 0.75 : -0.25));
    }
  }
  CHECK(parse_matrix_csv(matrix_csv(d)) == d);
}

TEST_CASE("metrics agree with the brute-force oracle on random instances") {
  std::mt19937_64 rng(20261016);
  int checked = 0;
  for (int t = 0; t < 600; ++t) {
    const auto inst = random_instance(rng);
    const auto all = inst.labels.all();
    INFO("instance " << t);

    const double ad = ad_f1(ad_of(inst.pred, inst.labels), ad_of(inst.gold, inst.labels));
    CHECK(std::abs(ad - oracle_binary_f1(ad_names(inst.pred, inst.labels),
                                         ad_names(inst.gold, inst.labels), "Abnormal")) < 1e-12);

    CHECK(std::abs(ac_f1(inst.pred, inst.gold, inst.labels) -
                   oracle_macro_f1(inst.pred, inst.gold, all)) < 1e-12);
    const Labels crimes(all.begin() + 1, all.end());
    CHECK(std::abs(ac_f1(inst.pred, inst.gold, inst.labels, false) -
                   oracle_macro_f1(inst.pred, inst.gold, crimes)) < 1e-12);

    const auto cm = confusion(inst.pred, inst.gold, inst.labels);
    const auto expected = oracle_confusion(inst.pred, inst.gold, all);
    REQUIRE(cm.counts.size() == expected.size());
    for (std::size_t r = 0; r < expected.size(); ++r) {
      for (std::size_t c = 0; c < expected.size(); ++c) CHECK(cm.counts[r][c] == expected[r][c]);
    }
    CHECK(cm.total() == static_cast<std::int64_t>(inst.pred.size()));

    const auto norm = row_normalize(cm);
    const auto expected_norm = oracle_normalize(expected);
    for (std::size_t r = 0; r < expected.size(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < expected.size(); ++c) {
        CHECK(std::abs(norm.values[r][c] - expected_norm[r][c]) < 1e-12);
        sum += norm.values[r][c];
      }
      CHECK((sum == 0.0 || std::abs(sum - 1.0) < 1e-12));
    }
    // Normalizing already-normalized rows changes nothing.
    for (const auto& row : norm.values) {
      double sum = 0.0;
      for (double v : row) sum += v;
      for (double v : row) CHECK(std::abs((sum == 0.0 ? 0.0 : v / sum) - v) < 1e-12);
    }

    auto other = inst;
    std::shuffle(other.pred.begin(), other.pred.end(), rng);
    const auto norm2 = row_normalize(confusion(other.pred, other.gold, other.labels));
    const auto diff = diff_matrix(norm, norm2);
    const auto expected_diff =
        oracle_diff(expected_norm, oracle_normalize(oracle_confusion(other.pred, other.gold, all)));
    for (std::size_t r = 0; r < expected.size(); ++r) {
      for (std::size_t c = 0; c < expected.size(); ++c) {
        CHECK(std::abs(diff.values[r][c] - expected_diff[r][c]) < 1e-12);
        CHECK(diff.values[r][c] >= -1.0);
        CHECK(diff.values[r][c] <= 1.0);
      }
    }
    CHECK(parse_matrix_csv(matrix_csv(diff)) == diff);
    ++checked;
  }
  CHECK(checked >= 500);
}

TEST_CASE("metrics are invariant under sample permutation") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto inst = random_instance(rng);
    std::vector<std::size_t> order(inst.pred.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    Labels p, g;
    for (auto i : order) {
      p.push_back(inst.pred[i]);
      g.push_back(inst.gold[i]);
    }
    CHECK(ac_f1(p, g, inst.labels) == ac_f1(inst.pred, inst.gold, inst.labels));
    CHECK(ad_f1(ad_of(p, inst.labels), ad_of(g, inst.labels)) ==
          ad_f1(ad_of(inst.pred, inst.labels), ad_of(inst.gold, inst.labels)));
    CHECK(confusion(p, g, inst.labels) == confusion(inst.pred, inst.gold, inst.labels));
  }
}

TEST_CASE("ac_f1 on {Normal, Abnormal} without Normal reduces to ad_f1") {
  std::mt19937_64 rng(9);
  const LabelSet binary("Normal", {"Abnormal"});
  for (int t = 0; t < 200; ++t) {
    const auto inst = random_instance(rng);
    const auto p = ad_names(inst.pred, inst.labels);
    const auto g = ad_names(inst.gold, inst.labels);
    CHECK(ac_f1(p, g, binary, false) ==
          ad_f1(ad_of(inst.pred, inst.labels), ad_of(inst.gold, inst.labels)));
  }
}

TEST_CASE("matrix csv round-trips bit-exactly and rejects malformed text") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealMatrix m{{"Normal", "A", "B"}, {}};
  for (int r = 0; r < 3; ++r) m.values.push_back({u(rng), u(rng), 1.0 / 3.0});
  const auto text = matrix_csv(m);
  CHECK(lines(text).front() == "gold\\pred,Normal,A,B");
  CHECK(parse_matrix_csv(text) == m);
  CHECK(matrix_csv(ConfusionMatrix{{"X", "Y"}, {{1, 2}, {3, 4}}}) == "gold\\pred,X,Y\nX,1,2\nY,3,4\n");
  CHECK(metrics_error_of([] { parse_matrix_csv("gold\\pred,X,Y\nX,1\nY,3,4\n"); }) ==
        MetricsErrc::ShapeMismatch);
  CHECK(metrics_error_of([] { parse_matrix_csv("gold\\pred,X,Y\nY,1,2\nX,3,4\n"); }) ==
        MetricsErrc::ShapeMismatch);
  CHECK(metrics_error_of([] { parse_matrix_csv("gold\\pred,X\nX,abc\n"); }) ==
        MetricsErrc::ShapeMismatch);
}

TEST_CASE("percentage and delta formatting") {
  CHECK(format_pct(0.5) == "50.00");
  CHECK(format_pct(1.0) == "100.00");
  CHECK(format_pct(0.0) == "0.00");
  CHECK(format_pct(2.0 / 3.0) == "66.67");
  CHECK(format_delta(11.8) == "+11.80");
  CHECK(format_delta(-3.256) == "-3.26");
  CHECK(format_delta(-0.001) == "+0.00");
  CHECK(format_delta(0.0) == "+0.00");
}

TEST_CASE("engineered rows 11.80 points apart print +11.80") {
  const auto [a, b] = search_ad_gap_of_11_80();
  CHECK(a.gold_abnormal + a.gold_normal == 73);
  const auto c = ad_gap_case();

  auto oracle_ad = [&](const std::vector<PredictionRecord>& rows) {
    Labels p, g;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      p.push_back(c.labels.is_normal(rows[i].predicted_ac) ? "Normal" : "Abnormal");
      g.push_back(c.labels.is_normal(c.manifest[i].gold_label) ? "Normal" : "Abnormal");
    }
    return oracle_binary_f1(p, g, "Abnormal");
  };
  const double f1a = oracle_ad(c.first), f1b = oracle_ad(c.second);
  CHECK(std::abs(100.0 * (f1b - f1a) - 11.80) < 1e-9);

  std::vector<PredictionRecord> all = c.first;
  all.insert(all.end(), c.second.begin(), c.second.end());
  const auto report = build_report(all, c.manifest, c.labels, {.baseline_row = "direct"});
  const auto* row = report.find("coat-joint");
  REQUIRE(row);
  const auto& cell = row->cells.at("UCF-Crime");
  CHECK(std::abs(cell.ad_f1 - f1b) < 1e-12);
  CHECK(format_delta(*cell.ad_delta_pp) == "+11.80");

  const auto text = lines(report.render_text());
  auto find_line = [&](const std::string& first) -> std::vector<std::string> {
    for (const auto& l : text) {
      auto t = tokens(l);
      if (!t.empty() && t[0] == first) return t;
    }
    return {};
  };
  CHECK(find_line("Row") ==
        std::vector<std::string>{"Row", "AD", "AC", "dAD", "dAC", "Videos", "Fallbacks"});
  const auto joint = find_line("coat-joint");
  REQUIRE(joint.size() == 7);
  CHECK(joint[1] == format_pct(f1b));
  CHECK(joint[3] == "+11.80");
  CHECK(joint[5] == "73");
  const auto direct = find_line("direct");
  REQUIRE(direct.size() == 7);
  CHECK(direct[1] == format_pct(f1a));
  CHECK(direct[3] == "-");
  CHECK(direct[4] == "-");
  for (const auto& cellv : {joint[1], joint[2], direct[1], direct[2]}) {
    const auto dot = cellv.find('.');
    REQUIRE(dot != std::string::npos);
    CHECK(cellv.size() - dot - 1 == 2);
  }
  CHECK(find_line("UCF-Crime").size() == 1);
}

TEST_CASE("report without a baseline has no delta columns") {
  const auto c = ad_gap_case();
  const auto report = build_report(c.first, c.manifest, c.labels);
  CHECK(report.rows.size() == 1);
  const auto text = report.render_text();
  CHECK(text.find("dAD") == std::string::npos);
  CHECK(text.find("dAC") == std::string::npos);
  CHECK_FALSE(report.rows[0].cells.at("UCF-Crime").ad_delta_pp);
}

TEST_CASE("report errors") {
  const auto c = ad_gap_case();
  CHECK_THROWS_AS(build_report(c.first, c.manifest, c.labels, {.baseline_row = "tot"}),
                  UnknownBaselineRow);
  auto dup = c.first;
  dup.push_back(dup.front());
  CHECK_THROWS_AS(build_report(dup, c.manifest, c.labels), DataError);
  auto stray = c.first;
  stray[0].video_id = "not_in_manifest";
  CHECK(metrics_error_of([&] { build_report(stray, c.manifest, c.labels); }) ==
        MetricsErrc::MissingGold);
}

TEST_CASE("report cells match the oracle per dataset and row") {
  const auto c = ad_gap_case();
  auto all = c.first;
  all.insert(all.end(), c.second.begin(), c.second.end());
  const auto report = build_report(all, c.manifest, c.labels, {.baseline_row = "direct"});
  CHECK(report.datasets == std::vector<std::string>{"UCF-Crime"});
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].name == "direct");
  for (const auto* rows : {&c.first, &c.second}) {
    Labels p, g;
    for (std::size_t i = 0; i < rows->size(); ++i) {
      p.push_back((*rows)[i].predicted_ac);
      g.push_back(c.manifest[i].gold_label);
    }
    const auto& cell = report.find((*rows)[0].row_name())->cells.at("UCF-Crime");
    CHECK(std::abs(cell.ac_f1 - oracle_macro_f1(p, g, c.labels.all())) < 1e-12);
    CHECK(cell.videos == rows->size());
  }
  const auto j = report.to_json();
  CHECK(j["baseline_row"] == "direct");
  CHECK(j["ac_average"] == "macro");
  CHECK(j["rows"].size() == 2);
}

TEST_CASE("resolution split: identity high minus uniform low") {
  const auto c = resolution_case();
  const auto report = build_report(c.first, c.manifest, c.labels, {.split_by_resolution = true});
  const auto& split = *report.rows.at(0).split;
  CHECK(split.high_videos == 8);
  CHECK(split.low_videos == 16);
  REQUIRE(split.diff);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t col = 0; col < 4; ++col) CHECK(split.diff->values[r][col] == (r == col ? 0.75 : -0.25));
  }

  const auto dir = scratch_dir("eval-split");
  const auto written = write_report(report, dir);
  CHECK(std::find(written.begin(), written.end(), "matrices/coat-joint.resolution-diff.csv") !=
        written.end());
  CHECK(parse_matrix_csv(read_file(dir / "matrices/coat-joint.resolution-diff.csv")) == *split.diff);
  CHECK(parse_matrix_csv(read_file(dir / "matrices/coat-joint.UCF-Crime.normalized.csv")) ==
        row_normalize(report.rows[0].cells.at("UCF-Crime").matrix));

  // One resolution only: no diff.
  std::vector<PredictionRecord> high_only(c.first.begin(), c.first.begin() + 8);
  const auto single = build_report(high_only, c.manifest, c.labels, {.split_by_resolution = true});
  CHECK_FALSE(single.rows.at(0).split->diff);
}

TEST_CASE("manifest parsing") {
  const auto labels = LabelSet::ucf_crime();
  const auto ok = parse_manifest(
      R"({"video_id":"v1","uri":"a.mp4","dataset":"UCF-Crime","gold_label":"robbery","resolution":"low"})"
      "\n\n"
      R"({"video_id":"v2","uri":"frames/v2","dataset":"BetterUCF","gold_label":"Normal","resolution":"high","kind":"frame_dir"})"
      "\n",
      labels);
  REQUIRE(ok.size() == 2);
  CHECK(ok[0].gold_label == "Robbery");
  CHECK(ok[0].resolution == Resolution::Low);
  CHECK(ok[1].kind == MediaKind::FrameDir);

  const std::string good =
      R"({"video_id":"v1","uri":"a.mp4","dataset":"D","gold_label":"Normal","resolution":"low"})";
  auto err = data_error_of([&] {
    parse_manifest(good + "\n" +
                       R"({"video_id":"v2","uri":"a.mp4","dataset":"D","gold_label":"Jaywalking","resolution":"low"})",
                   labels);
  });
  CHECK(err.code() == DataErrc::ManifestInvalid);
  CHECK(err.line() == 2);
  CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  CHECK(data_error_of([&] { parse_manifest(good + "\n" + good, labels); }).line() == 2);
  CHECK(data_error_of([&] { parse_manifest("", labels); }).code() == DataErrc::ManifestInvalid);
  CHECK(data_error_of([&] { parse_manifest("{not json", labels); }).line() == 1);
  CHECK(data_error_of([&] {
          parse_manifest(R"({"video_id":"v1","uri":"a.mp4","dataset":"D","gold_label":"Normal","resolution":"4k"})",
                         labels);
        }).line() == 1);
  CHECK(data_error_of([&] {
          parse_manifest(R"({"video_id":"v1","dataset":"D","gold_label":"Normal","resolution":"low"})", labels);
        }).line() == 1);
}

TEST_CASE("prediction records round-trip and are validated") {
  const auto labels = LabelSet::ucf_crime();
  const auto c = ad_gap_case();
  auto rows = c.second;
  rows[0].fallback = true;
  const auto text = predictions_jsonl(rows);
  CHECK(parse_predictions(text, labels) == [&] {
    auto sorted = rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& x, const auto& y) { return x.video_id < y.video_id; });
    return sorted;
  }());
  CHECK(rows[0].row_name() == "coat-joint");
  CHECK(c.first[0].row_name() == "direct");

  const auto bad_label = data_error_of([&] {
    parse_predictions(
        R"({"video_id":"v","predicted_ac":"Jaywalking","predicted_ad":"Abnormal","strategy":"direct","variant":"direct","fallback":false})",
        labels);
  });
  CHECK(bad_label.code() == DataErrc::PredictionsInvalid);
  CHECK(data_error_of([&] {
          parse_predictions(
              R"({"video_id":"v","predicted_ac":"Robbery","predicted_ad":"Normal","strategy":"direct","variant":"direct","fallback":false})",
              labels);
        }).code() == DataErrc::PredictionsInvalid);
}

TEST_CASE("golden predictions score as the oracle says") {
  const auto cfg = golden_config();
  const auto manifest = load_manifest(golden_dir() / "manifest6.jsonl", cfg.session.labels);
  for (const auto& row : golden_rows()) {
    const auto preds = load_predictions(expected_predictions_path(row), cfg.session.labels);
    const auto report = build_report(preds, manifest, cfg.session.labels);
    for (const auto& dataset : report.datasets) {
      Labels p, g;
      for (const auto& pr : preds) {
        const auto e = std::find_if(manifest.begin(), manifest.end(),
                                    [&](const auto& m) { return m.video_id == pr.video_id; });
        if (e->dataset != dataset) continue;
        p.push_back(pr.predicted_ac);
        g.push_back(e->gold_label);
      }
      const auto& cell = report.rows.at(0).cells.at(dataset);
      CHECK(std::abs(cell.ac_f1 - oracle_macro_f1(p, g, cfg.session.labels.all())) < 1e-12);
      CHECK(std::abs(cell.ad_f1 - oracle_binary_f1(ad_names(p, cfg.session.labels),
                                                   ad_names(g, cfg.session.labels), "Abnormal")) <
            1e-12);
    }
  }
}
