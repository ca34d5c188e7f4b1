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

#include "coat/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "coat/backend.hpp"
#include "coat/baselines.hpp"
#include "coat/config.hpp"
#include "coat/dataset.hpp"
#include "coat/http_backend.hpp"
#include "coat/metrics.hpp"
#include "coat/report.hpp"
#include "coat/session.hpp"

namespace coat {

namespace fs = std::filesystem;

namespace {

enum class Command { Run, Eval, Replay, Record, Report };

struct Options {
  Command command = Command::Run;
  std::string config;
  std::string manifest;
  std::string fixtures;
  std::string record;
  std::string variant;
  std::string strategy;
  std::string output = "coat-out";
  std::string baseline;
  std::string split_by;
  std::string video;
  std::string video_id;
  std::string kind;
  int workers = 0;  ///< 0: take [eval].workers from the config
  bool timestamps = false;
  std::vector<std::string> predictions;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dispatches by role so one recorder can sit in front of three endpoints.
class RoleRouter : public ModelBackend {
 public:
  explicit RoleRouter(AgentBackends backends) : backends_(std::move(backends)) {}

  std::string complete(Role role, std::span<const Message> messages) override {
    return backends_.for_role(role).complete(role, messages);
  }

 private:
  AgentBackends backends_;
};

struct Backends {
  AgentBackends agents;
  std::shared_ptr<RecordingBackend> recorder;
  fs::path record_path;

  void save_recording() const {
    if (recorder) recorder->save(record_path);
  }
};

AppConfig load_app_config(const Options& opts) {
  if (opts.config.empty()) throw ConfigError("--config", "missing");
  auto cfg = load_config(opts.config);
  if (!opts.variant.empty()) {
    auto v = parse_variant(opts.variant);
    if (!v) throw UsageError("unknown --variant '" + opts.variant + "'");
    cfg.session.variant = *v;
  }
  if (!opts.strategy.empty()) {
    auto s = parse_strategy(opts.strategy);
    if (!s) throw UsageError("unknown --strategy '" + opts.strategy + "'");
    cfg.strategy = *s;
  }
  if (opts.workers > 0) cfg.workers = opts.workers;
  if (opts.timestamps) {
    cfg.session.timestamps = true;
    cfg.baselines.timestamps = true;
  }
  cfg.baselines.strategy = cfg.strategy;
  if (cfg.strategy != Strategy::Coat) cfg.baselines.validate();
  return cfg;
}

Backends make_backends(const AppConfig& cfg, const Options& opts) {
  Backends out;
  if (!opts.fixtures.empty()) {
    std::shared_ptr<const FixtureStore> store;
    try {
      store = std::make_shared<const FixtureStore>(FixtureStore::load(opts.fixtures));
    } catch (const std::exception& e) {
      throw ConfigError("--fixtures", e.what());
    }
    out.agents = AgentBackends::shared(std::make_shared<ScriptedBackend>(store));
    return out;
  }
  AgentBackends live{std::make_shared<HttpBackend>(cfg.backend(Role::Witness)),
                     std::make_shared<HttpBackend>(cfg.backend(Role::Detective)),
                     std::make_shared<HttpBackend>(cfg.backend(Role::Supervisor))};
  if (opts.record.empty()) {
    out.agents = std::move(live);
    return out;
  }
  auto store = std::make_shared<FixtureStore>();
  if (fs::exists(opts.record)) {
    try {
      *store = FixtureStore::load(opts.record);
    } catch (const std::exception& e) {
      throw ConfigError("--record", e.what());
    }
  }
  out.recorder = std::make_shared<RecordingBackend>(
      std::make_shared<RoleRouter>(std::move(live)), std::move(store));
  out.record_path = opts.record;
  out.agents = AgentBackends::shared(out.recorder);
  return out;
}

SessionResult run_one(const MediaRef& video, const AppConfig& cfg, const AgentBackends& backends) {
  if (cfg.strategy == Strategy::Coat) return run_session(video, cfg.session, backends);
  return run_baseline(video, backends, cfg.session.labels, cfg.baselines);
}

fs::path trace_path(const fs::path& dir, const std::string& video_id) {
  return dir / "traces" / (file_stem(video_id) + ".trace.json");
}

MediaRef resolve_video(const Options& opts, const AppConfig& cfg) {
  if (!opts.video.empty()) {
    MediaRef ref;
    ref.uri = opts.video;
    ref.video_id = opts.video_id.empty() ? fs::path(opts.video).stem().string() : opts.video_id;
    if (ref.video_id.empty()) throw UsageError("cannot derive a video id; pass --video-id");
    if (!opts.kind.empty()) {
      auto k = parse_media_kind(opts.kind);
      if (!k) throw UsageError("unknown --kind '" + opts.kind + "'");
      ref.kind = *k;
    } else if (opts.video.find("://") != std::string::npos) {
      ref.kind = MediaKind::Url;
    } else if (fs::is_directory(opts.video)) {
      ref.kind = MediaKind::FrameDir;
    }
    return ref;
  }
  if (opts.video_id.empty()) throw UsageError("pass --video, or --video-id with --manifest");
  if (opts.manifest.empty()) throw UsageError("--video-id without --video needs --manifest");
  for (const auto& e : load_manifest(opts.manifest, cfg.session.labels)) {
    if (e.video_id == opts.video_id) return e.media();
  }
  throw DataError(DataErrc::ManifestInvalid, 0,
                  "video '" + opts.video_id + "' is not in " + opts.manifest);
}

int cmd_run(const Options& opts, std::ostream& out) {
  const auto cfg = load_app_config(opts);
  const auto video = resolve_video(opts, cfg);
  auto backends = make_backends(cfg, opts);
  SessionResult result;
  try {
    result = run_one(video, cfg, backends.agents);
  } catch (...) {
    backends.save_recording();
    throw;
  }
  backends.save_recording();
  write_file(trace_path(opts.output, video.video_id), result.serialize());
  const auto& c = *result.classification;
  out << result.video_id << '\t' << to_string(c.ad) << '\t' << c.ac << '\n';
  return kExitOk;
}

struct Outcome {
  std::optional<SessionResult> result;
  std::string error;
  std::string fixture_key;
  bool backend_failure = false;
};

int cmd_eval(const Options& opts, std::ostream& out, std::ostream& err) {
  if (opts.manifest.empty()) throw UsageError("eval needs --manifest");
  const auto cfg = load_app_config(opts);
  const auto manifest = load_manifest(opts.manifest, cfg.session.labels);
  std::optional<std::string> baseline;
  if (!opts.baseline.empty()) baseline = opts.baseline;
  auto backends = make_backends(cfg, opts);

  std::vector<Outcome> outcomes(manifest.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < manifest.size(); i = next++) {
      auto& o = outcomes[i];
      try {
        o.result = run_one(manifest[i].media(), cfg, backends.agents);
      } catch (const BackendError& e) {
        o.error = e.what();
        o.fixture_key = e.fixture_key();
        o.backend_failure = true;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  const auto n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), manifest.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  backends.save_recording();

  const fs::path dir = opts.output;
  std::vector<PredictionRecord> predictions;
  std::string failures;
  bool any_backend_failure = false;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    auto& o = outcomes[i];
    if (o.result) {
      write_file(trace_path(dir, manifest[i].video_id), o.result->serialize());
      predictions.push_back(make_prediction(*o.result));
      continue;
    }
    any_backend_failure |= o.backend_failure;
    nlohmann::json f{{"video_id", manifest[i].video_id}, {"error", o.error}};
    if (!o.fixture_key.empty()) f["fixture_key"] = o.fixture_key;
    failures += f.dump() + "\n";
    err << "failed: " << manifest[i].video_id << ": " << o.error << '\n';
    if (!o.fixture_key.empty()) err << "fixture key: " << o.fixture_key << '\n';
  }
  write_file(dir / "predictions.jsonl", predictions_jsonl(predictions));
  if (failures.empty()) {
    fs::remove(dir / "failures.jsonl");
  } else {
    write_file(dir / "failures.jsonl", failures);
  }
  if (predictions.empty()) {
    err << "no video was scored\n";
    return any_backend_failure ? kExitBackend : kExitUsage;
  }

  ReportOptions ro;
  ro.baseline_row = baseline;
  ro.ac_include_normal = cfg.ac_include_normal;
  ro.split_by_resolution = opts.split_by == "resolution";
  const auto report = build_report(predictions, manifest, cfg.session.labels, ro);
  write_report(report, dir);
  out << report.render_text();
  out << "scored " << predictions.size() << " of " << manifest.size() << " videos\n";
  return kExitOk;
}

int cmd_report(const Options& opts, std::ostream& out) {
  if (opts.predictions.empty()) throw UsageError("report needs at least one predictions file");
  if (opts.manifest.empty()) throw UsageError("report needs --manifest for gold labels");
  LabelSet labels = LabelSet::ucf_crime();
  bool include_normal = true;
  if (!opts.config.empty()) {
    const auto cfg = load_config(opts.config);
    labels = cfg.session.labels;
    include_normal = cfg.ac_include_normal;
  }
  const auto manifest = load_manifest(opts.manifest, labels);
  std::vector<PredictionRecord> predictions;
  for (const auto& path : opts.predictions) {
    auto part = load_predictions(path, labels);
    predictions.insert(predictions.end(), part.begin(), part.end());
  }
  ReportOptions ro;
  if (!opts.baseline.empty()) ro.baseline_row = opts.baseline;
  ro.ac_include_normal = include_normal;
  ro.split_by_resolution = opts.split_by == "resolution";
  const auto report = build_report(predictions, manifest, labels, ro);
  write_report(report, opts.output);
  out << report.render_text();
  return kExitOk;
}

void add_session_flags(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "TOML config file");
  sub->add_option("--manifest", o.manifest, "JSONL manifest");
  sub->add_option("--variant", o.variant, "l1|l2|l3|l4|joint");
  sub->add_option("--strategy", o.strategy, "direct|cot|tot|iot|lcot|coat");
  sub->add_option("--output", o.output, "output directory")->capture_default_str();
  sub->add_option("--video", o.video, "video file, frame directory or URL");
  sub->add_option("--video-id", o.video_id, "video id (looked up in --manifest without --video)");
  sub->add_option("--kind", o.kind, "video_file|frame_dir|url");
  sub->add_option("--workers", o.workers, "concurrent sessions for manifest runs")
      ->check(CLI::PositiveNumber);
  sub->add_option("--baseline", o.baseline, "report row to compute deltas against");
  sub->add_option("--split-by", o.split_by, "emit per-resolution matrices")
      ->check(CLI::IsMember({"resolution"}));
  sub->add_flag("--timestamps", o.timestamps, "stamp trace events with elapsed time");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Multi-agent video anomaly reasoning and evaluation", "coat"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one video and write its trace");
  add_session_flags(run, o);
  run->add_option("--fixtures", o.fixtures, "replay replies from a fixture file");
  run->add_option("--record", o.record, "record live replies into a fixture file");

  auto* eval = app.add_subcommand("eval", "run every manifest video and score the predictions");
  add_session_flags(eval, o);
  eval->add_option("--fixtures", o.fixtures, "replay replies from a fixture file");
  eval->add_option("--record", o.record, "record live replies into a fixture file");

  auto* replay = app.add_subcommand("replay", "like run/eval, served only from fixtures");
  add_session_flags(replay, o);
  replay->add_option("--fixtures", o.fixtures, "fixture file")->required();

  auto* record = app.add_subcommand("record", "like run/eval against live backends, saving replies");
  add_session_flags(record, o);
  record->add_option("--record", o.record, "fixture file to create or extend")->required();

  auto* report = app.add_subcommand("report", "merge prediction files into one report");
  report->add_option("predictions", o.predictions, "predictions JSONL files")->required();
  report->add_option("--manifest", o.manifest, "JSONL manifest with gold labels")->required();
  report->add_option("--config", o.config, "config for labels and AC averaging");
  report->add_option("--baseline", o.baseline, "row to compute deltas against");
  report->add_option("--split-by", o.split_by, "emit per-resolution matrices")
      ->check(CLI::IsMember({"resolution"}));
  report->add_option("--output", o.output, "output directory")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      if (!o.fixtures.empty() && !o.record.empty()) {
        throw UsageError("--fixtures and --record are exclusive");
      }
      return cmd_run(o, out);
    }
    if (eval->parsed()) {
      if (!o.fixtures.empty() && !o.record.empty()) {
        throw UsageError("--fixtures and --record are exclusive");
      }
      return cmd_eval(o, out, err);
    }
    if (replay->parsed() || record->parsed()) {
      const bool single = !o.video.empty() || !o.video_id.empty();
      return single ? cmd_run(o, out) : cmd_eval(o, out, err);
    }
    return cmd_report(o, out);
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  } catch (const BackendError& e) {
    err << e.what() << '\n';
    if (!e.fixture_key().empty()) err << "fixture key: " << e.fixture_key() << '\n';
    return kExitBackend;
  } catch (const DataError& e) {
    err << e.what() << '\n';
    return kExitManifest;
  } catch (const MetricsError& e) {
    err << e.what() << '\n';
    return kExitManifest;
  } catch (const UnknownBaselineRow& e) {
    err << e.what() << '\n';
    return kExitUnknownBaseline;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace coat
