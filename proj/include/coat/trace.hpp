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

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coat/agents.hpp"
#include "coat/backend.hpp"

namespace coat {

enum class TraceKind {
  SessionStart,    ///< layers + root ids/questions
  LayerStart,
  Call,            ///< one backend round trip: role, prompt hash, reply
  ParseError,      ///< a reply was rejected; detail holds the error
  Operation,       ///< graph mutation: op, target, created nodes, questions
  Answer,          ///< Witness answer recorded on a node
  ForcedStop,      ///< retries exhausted; target stopped
  BudgetExhausted,
  LayerEnd,        ///< turns_used for the layer
  AnomalyAnswer,
  Classification,
  ForcedFallback,  ///< classification retries exhausted; Normal fallback used
};

std::string_view to_string(TraceKind kind);
std::optional<TraceKind> parse_trace_kind(std::string_view text);

/// Flat record; only the fields relevant to `kind` are set.
struct TraceEvent {
  TraceKind kind = TraceKind::Call;
  std::optional<LayerId> layer;
  std::optional<Role> role;
  std::optional<std::string> prompt_hash;
  std::optional<std::string> reply;
  std::optional<EdgeOp> op;
  std::optional<NodeId> target;
  std::vector<NodeId> nodes;
  std::vector<std::string> questions;
  std::vector<LayerId> layers;
  std::optional<std::string> answer;
  std::optional<std::int64_t> turn;
  std::optional<int> turns_used;
  std::optional<int> attempt;
  std::optional<std::string> detail;
  std::optional<std::int64_t> elapsed_us;  ///< only when timestamps are enabled

  bool operator==(const TraceEvent&) const = default;
};

nlohmann::json to_json(const TraceEvent& event);
TraceEvent trace_event_from_json(const nlohmann::json& j);

/// Append-only event list for one session. Optionally stamps events with the
/// time since construction; golden runs leave that off.
class Trace {
 public:
  explicit Trace(bool timestamps = false)
      : timestamps_(timestamps), start_(std::chrono::steady_clock::now()) {}

  void add(TraceEvent event);

  /// Sends `messages` to `backend`, logging a Call event.
  std::string call(ModelBackend& backend, Role role, std::span<const Message> messages,
                   std::optional<LayerId> layer = std::nullopt, int attempt = 1);

  const std::vector<TraceEvent>& events() const { return events_; }
  std::vector<TraceEvent> take() && { return std::move(events_); }

 private:
  bool timestamps_;
  std::chrono::steady_clock::time_point start_;
  std::vector<TraceEvent> events_;
};

}  // namespace coat
