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

#include "coat/trace.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace coat {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<TraceKind, std::string_view>, 12> kKinds{{
    {TraceKind::SessionStart, "session_start"},
    {TraceKind::LayerStart, "layer_start"},
    {TraceKind::Call, "call"},
    {TraceKind::ParseError, "parse_error"},
    {TraceKind::Operation, "operation"},
    {TraceKind::Answer, "answer"},
    {TraceKind::ForcedStop, "forced_stop"},
    {TraceKind::BudgetExhausted, "budget_exhausted"},
    {TraceKind::LayerEnd, "layer_end"},
    {TraceKind::AnomalyAnswer, "anomaly_answer"},
    {TraceKind::Classification, "classification"},
    {TraceKind::ForcedFallback, "forced_fallback"},
}};

NodeId node_from(const json& j) {
  auto id = parse_node_id(j.get<std::string>());
  if (!id) throw std::runtime_error("bad node id in trace: " + j.dump());
  return *id;
}

LayerId layer_from(const json& j) {
  auto layer = parse_layer(j.get<std::string>());
  if (!layer) throw std::runtime_error("bad layer in trace: " + j.dump());
  return *layer;
}

}  // namespace

std::string_view to_string(TraceKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<TraceKind> parse_trace_kind(std::string_view text) {
  for (const auto& [k, name] : kKinds) {
    if (name == text) return k;
  }
  return std::nullopt;
}

json to_json(const TraceEvent& e) {
  json j{{"kind", to_string(e.kind)}};
  if (e.layer) j["layer"] = to_string(*e.layer);
  if (e.role) j["role"] = to_string(*e.role);
  if (e.prompt_hash) j["prompt_hash"] = *e.prompt_hash;
  if (e.reply) j["reply"] = *e.reply;
  if (e.op) j["op"] = to_string(*e.op);
  if (e.target) j["target"] = to_string(*e.target);
  if (!e.nodes.empty()) {
    json ids = json::array();
    for (NodeId id : e.nodes) ids.push_back(to_string(id));
    j["nodes"] = std::move(ids);
  }
  if (!e.questions.empty()) j["questions"] = e.questions;
  if (!e.layers.empty()) {
    json layers = json::array();
    for (LayerId l : e.layers) layers.push_back(to_string(l));
    j["layers"] = std::move(layers);
  }
  if (e.answer) j["answer"] = *e.answer;
  if (e.turn) j["turn"] = *e.turn;
  if (e.turns_used) j["turns_used"] = *e.turns_used;
  if (e.attempt) j["attempt"] = *e.attempt;
  if (e.detail) j["detail"] = *e.detail;
  if (e.elapsed_us) j["elapsed_us"] = *e.elapsed_us;
  return j;
}

TraceEvent trace_event_from_json(const json& j) {
  TraceEvent e;
  auto kind = parse_trace_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown trace event kind " + j.at("kind").dump());
  e.kind = *kind;
  if (j.contains("layer")) e.layer = layer_from(j["layer"]);
  if (j.contains("role")) {
    e.role = parse_role(j["role"].get<std::string>());
    if (!e.role) throw std::runtime_error("bad role in trace: " + j["role"].dump());
  }
  if (j.contains("prompt_hash")) e.prompt_hash = j["prompt_hash"].get<std::string>();
  if (j.contains("reply")) e.reply = j["reply"].get<std::string>();
  if (j.contains("op")) {
    e.op = parse_edge_op(j["op"].get<std::string>());
    if (!e.op) throw std::runtime_error("bad op in trace: " + j["op"].dump());
  }
  if (j.contains("target")) e.target = node_from(j["target"]);
  if (j.contains("nodes")) {
    for (const auto& id : j["nodes"]) e.nodes.push_back(node_from(id));
  }
  if (j.contains("questions")) e.questions = j["questions"].get<std::vector<std::string>>();
  if (j.contains("layers")) {
    for (const auto& l : j["layers"]) e.layers.push_back(layer_from(l));
  }
  if (j.contains("answer")) e.answer = j["answer"].get<std::string>();
  if (j.contains("turn")) e.turn = j["turn"].get<std::int64_t>();
  if (j.contains("turns_used")) e.turns_used = j["turns_used"].get<int>();
  if (j.contains("attempt")) e.attempt = j["attempt"].get<int>();
  if (j.contains("detail")) e.detail = j["detail"].get<std::string>();
  if (j.contains("elapsed_us")) e.elapsed_us = j["elapsed_us"].get<std::int64_t>();
  return e;
}

void Trace::add(TraceEvent event) {
  if (timestamps_) {
    event.elapsed_us = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::steady_clock::now() - start_)
                           .count();
  }
  events_.push_back(std::move(event));
}

std::string Trace::call(ModelBackend& backend, Role role, std::span<const Message> messages,
                        std::optional<LayerId> layer, int attempt) {
  std::string reply = backend.complete(role, messages);
  TraceEvent e;
  e.kind = TraceKind::Call;
  e.layer = layer;
  e.role = role;
  e.prompt_hash = prompt_hash(messages);
  e.reply = reply;
  e.attempt = attempt;
  add(std::move(e));
  return reply;
}

}  // namespace coat
