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

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coat/agents.hpp"
#include "coat/backend.hpp"
#include "coat/layer.hpp"
#include "coat/sot_graph.hpp"
#include "coat/trace.hpp"

namespace coat {

/// Invalid or incomplete configuration. `key()` names the offending setting.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("ConfigInvalid: " + key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

using QaPair = std::pair<std::string, std::string>;

struct SessionConfig {
  Variant variant = Variant::L4;
  BudgetState budget;  ///< limits applied to every layer; turns_used is ignored
  std::vector<std::string> anomaly_questions;
  LabelSet labels = LabelSet::ucf_crime();
  int retry_limit = 3;  ///< attempts per agent reply before forcing a stop or fallback
  int max_branches = SoTGraph::kDefaultMaxBranches;
  bool timestamps = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Weapons, violence, theft/forced entry, fire/explosion, distress and
/// property damage: one question each.
std::vector<std::string> default_anomaly_questions();

inline constexpr std::string_view kFallbackEvidence = "parse-fallback";

/// Everything one video's session produced. Serializes to one trace file.
struct SessionResult {
  static constexpr int kFormatVersion = 1;

  std::string video_id;
  std::string variant;  ///< "l1".."joint" for CoAT, the strategy name for baselines
  SoTGraph graph;
  std::vector<QaPair> anomaly_qa;
  std::optional<Classification> classification;
  std::vector<TraceEvent> trace;

  bool used_fallback() const;

  nlohmann::json to_json() const;
  static SessionResult from_json(const nlohmann::json& doc);
  std::string serialize() const;
  static SessionResult deserialize(std::string_view bytes);

  bool operator==(const SessionResult&) const = default;
};

/// One video's dialogue. Strictly sequential; sessions for different videos
/// may run concurrently over shared backends.
class Session {
 public:
  Session(MediaRef video, SessionConfig config, AgentBackends backends);

  /// Explores `layer` until its root is stopped or a budget bound is hit.
  void run_layer(SoTGraph& graph, LayerId layer);

  /// Asks every configured anomaly question, in order, verbatim.
  std::vector<QaPair> run_anomaly_layer(const SoTGraph& graph);

  /// Supervisor verdict over exploration and anomaly evidence. Falls back to
  /// Normal, with a ForcedFallback event, when no reply parses.
  Classification finalize(const SoTGraph& graph, const std::vector<QaPair>& anomaly_qa);

  const Trace& trace() const { return trace_; }
  Trace& trace() { return trace_; }
  std::int64_t turn() const { return turn_; }
  const MediaRef& video() const { return video_; }
  const SessionConfig& config() const { return config_; }

 private:
  std::optional<SupervisorDecision> decide(const SoTGraph& graph, LayerId layer,
                                           const BudgetState& budget);
  void execute(SoTGraph& graph, LayerId layer, const SupervisorDecision& decision,
               const BudgetState& budget);
  std::optional<DetectiveOutput> ask_detective(const SoTGraph& graph, LayerId layer,
                                               const SupervisorDecision& decision,
                                               DetectiveMode mode, int branch_limit);
  void answer_node(SoTGraph& graph, NodeId id, LayerId layer);
  void forced_stop(SoTGraph& graph, LayerId layer, NodeId target, const std::string& why);
  int split_room(const SoTGraph& graph, LayerId layer, const BudgetState& budget) const;

  MediaRef video_;
  SessionConfig config_;
  AgentBackends backends_;
  Trace trace_;
  std::vector<LayerId> completed_;
  std::int64_t turn_ = 0;
};

/// Seeds one root per exploration layer, explores the layers in order, runs
/// the anomaly layer and finalizes. Throws ConfigError or BackendError (with
/// the video id and stage prefixed to the message).
SessionResult run_session(const MediaRef& video, const SessionConfig& config,
                          const AgentBackends& backends);

/// Rebuilds the reasoning graph by re-applying the trace's operations and
/// answers. Equals `result.graph` for any completed session.
SoTGraph replay_graph(const SessionResult& result);

}  // namespace coat
