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

#include "coat/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "coat/baselines.hpp"

namespace coat {

using nlohmann::json;

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Calls `fn(line_number, object)` for every non-blank line.
template <typename Fn>
void for_each_jsonl(std::string_view text, DataErrc code, Fn&& fn) {
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(code, lineno, std::string("not valid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw DataError(code, lineno, "expected a JSON object");
    fn(lineno, obj);
  }
}

std::string required_string(const json& obj, const char* key, DataErrc code, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(code, line, std::string("missing field '") + key + "'");
  if (!it->is_string() || it->get_ref<const std::string&>().empty()) {
    throw DataError(code, line, std::string("field '") + key + "' must be a non-empty string");
  }
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(Resolution r) { return r == Resolution::High ? "high" : "low"; }

std::optional<Resolution> parse_resolution(std::string_view text) {
  const auto t = lower(text);
  if (t == "high") return Resolution::High;
  if (t == "low") return Resolution::Low;
  return std::nullopt;
}

std::string_view to_string(DataErrc code) {
  return code == DataErrc::ManifestInvalid ? "ManifestInvalid" : "PredictionsInvalid";
}

json ManifestEntry::to_json() const {
  return json{{"video_id", video_id}, {"uri", uri},
              {"gold_label", gold_label}, {"resolution", to_string(resolution)},
              {"dataset", dataset}, {"kind", to_string(kind)}};
}

std::vector<ManifestEntry> parse_manifest(std::string_view text, const LabelSet& labels) {
  constexpr auto kCode = DataErrc::ManifestInvalid;
  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  for_each_jsonl(text, kCode, [&](std::size_t line, const json& obj) {
    ManifestEntry e;
    e.video_id = required_string(obj, "video_id", kCode, line);
    e.uri = required_string(obj, "uri", kCode, line);
    e.dataset = required_string(obj, "dataset", kCode, line);
    const auto gold = required_string(obj, "gold_label", kCode, line);
    auto canon = labels.canonical(gold);
    if (!canon) throw DataError(kCode, line, "unknown gold_label '" + gold + "'");
    e.gold_label = *canon;
    const auto res = required_string(obj, "resolution", kCode, line);
    auto r = parse_resolution(res);
    if (!r) throw DataError(kCode, line, "resolution must be 'high' or 'low', got '" + res + "'");
    e.resolution = *r;
    if (obj.contains("kind")) {
      const auto k = required_string(obj, "kind", kCode, line);
      auto kind = parse_media_kind(k);
      if (!kind) throw DataError(kCode, line, "unknown kind '" + k + "'");
      e.kind = *kind;
    }
    if (!seen.insert(e.video_id).second) {
      throw DataError(kCode, line, "duplicate video_id '" + e.video_id + "'");
    }
    out.push_back(std::move(e));
  });
  if (out.empty()) throw DataError(kCode, 0, "manifest has no entries");
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         const LabelSet& labels) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw DataError(DataErrc::ManifestInvalid, 0, e.what());
  }
  return parse_manifest(text, labels);
}

std::string PredictionRecord::row_name() const {
  return strategy == "coat" ? "coat-" + variant : strategy;
}

json PredictionRecord::to_json() const {
  return json{{"video_id", video_id}, {"predicted_ac", predicted_ac},
              {"predicted_ad", to_string(predicted_ad)}, {"strategy", strategy},
              {"variant", variant}, {"fallback", fallback}};
}

PredictionRecord make_prediction(const SessionResult& result) {
  if (!result.classification) {
    throw std::invalid_argument("session for " + result.video_id + " has no classification");
  }
  PredictionRecord p;
  p.video_id = result.video_id;
  p.predicted_ac = result.classification->ac;
  p.predicted_ad = result.classification->ad;
  auto s = parse_strategy(result.variant);
  p.strategy = s && *s != Strategy::Coat ? std::string(to_string(*s)) : "coat";
  p.variant = result.variant;
  p.fallback = result.used_fallback();
  return p;
}

std::string predictions_jsonl(std::vector<PredictionRecord> records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::forward_as_tuple(a.video_id, a.strategy, a.variant) <
           std::forward_as_tuple(b.video_id, b.strategy, b.variant);
  });
  std::string out;
  for (const auto& r : records) out += r.to_json().dump() + "\n";
  return out;
}

std::vector<PredictionRecord> parse_predictions(std::string_view text, const LabelSet& labels) {
  constexpr auto kCode = DataErrc::PredictionsInvalid;
  std::vector<PredictionRecord> out;
  for_each_jsonl(text, kCode, [&](std::size_t line, const json& obj) {
    PredictionRecord p;
    p.video_id = required_string(obj, "video_id", kCode, line);
    p.strategy = required_string(obj, "strategy", kCode, line);
    p.variant = required_string(obj, "variant", kCode, line);
    const auto ac = required_string(obj, "predicted_ac", kCode, line);
    auto canon = labels.canonical(ac);
    if (!canon) throw DataError(kCode, line, "unknown predicted_ac '" + ac + "'");
    p.predicted_ac = *canon;
    const auto ad = required_string(obj, "predicted_ad", kCode, line);
    auto adl = parse_ad_label(ad);
    if (!adl) throw DataError(kCode, line, "predicted_ad must be Normal or Abnormal");
    p.predicted_ad = *adl;
    if ((p.predicted_ad == AdLabel::Normal) != labels.is_normal(p.predicted_ac)) {
      throw DataError(kCode, line, "predicted_ad contradicts predicted_ac");
    }
    if (obj.contains("fallback")) {
      if (!obj["fallback"].is_boolean()) throw DataError(kCode, line, "fallback must be a boolean");
      p.fallback = obj["fallback"].get<bool>();
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               const LabelSet& labels) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw DataError(DataErrc::PredictionsInvalid, 0, e.what());
  }
  return parse_predictions(text, labels);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace coat
