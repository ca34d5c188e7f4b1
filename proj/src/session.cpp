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

#include "coat/session.hpp"

#include <algorithm>
#include <map>

namespace coat {

using nlohmann::json;

namespace {

constexpr std::string_view kNoAnswer = "(no answer)";

TraceEvent event(TraceKind kind, std::optional<LayerId> layer = std::nullopt) {
  TraceEvent e;
  e.kind = kind;
  e.layer = layer;
  return e;
}

void parse_error(Trace& trace, LayerId layer, Role role, int attempt, const std::exception& err) {
  auto e = event(TraceKind::ParseError, layer);
  e.role = role;
  e.attempt = attempt;
  e.detail = err.what();
  trace.add(std::move(e));
}

}  // namespace

// Configuration --------------------------------------------------------------

std::vector<std::string> default_anomaly_questions() {
  return {
      "Is anyone holding or using a weapon such as a gun, knife or club? Describe it.",
      "Is anyone hitting, kicking, pushing or otherwise physically attacking another person?",
      "Is anyone taking property that is not theirs, or forcing their way into a building, "
      "vehicle or container?",
      "Is there any fire, smoke or explosion visible?",
      "Does anyone appear injured, in distress, fleeing or calling for help?",
      "Is any property being damaged or destroyed?",
  };
}

void SessionConfig::validate() const {
  if (anomaly_questions.empty()) {
    throw ConfigError("anomaly_questions.questions",
                      "the anomaly classification layer needs at least one question");
  }
  for (const auto& q : anomaly_questions) {
    if (one_line(q).empty()) throw ConfigError("anomaly_questions.questions", "empty question");
  }
  if (retry_limit < 1) throw ConfigError("session.retry_limit", "must be at least 1");
  if (max_branches < 2) throw ConfigError("session.max_branches", "must be at least 2");
  if (budget.max_turns_per_layer < 1) {
    throw ConfigError("session.max_turns_per_layer", "must be at least 1");
  }
  if (budget.max_depth < 1) throw ConfigError("session.max_depth", "must be at least 1");
  if (budget.max_nodes_per_layer < 1) {
    throw ConfigError("session.max_nodes_per_layer", "must be at least 1");
  }
}

// Session --------------------------------------------------------------------

Session::Session(MediaRef video, SessionConfig config, AgentBackends backends)
    : video_(std::move(video)),
      config_(std::move(config)),
      backends_(std::move(backends)),
      trace_(config_.timestamps) {}

int Session::split_room(const SoTGraph& graph, LayerId layer, const BudgetState& budget) const {
  const int nodes = static_cast<int>(graph.tree(layer).size());
  return std::min(graph.max_branches(), budget.max_nodes_per_layer - nodes);
}

void Session::run_layer(SoTGraph& graph, LayerId layer) {
  const auto root = graph.root(layer);
  if (!root) {
    throw ConfigError("session.variant",
                      "layer " + std::string(to_string(layer)) + " has no root in the graph");
  }
  trace_.add(event(TraceKind::LayerStart, layer));

  BudgetState budget = config_.budget;
  budget.turns_used = 0;
  if (const auto& r = graph.node(*root); r.status == NodeStatus::Open && !r.answer) {
    answer_node(graph, *root, layer);
  }

  while (graph.node(*root).status != NodeStatus::Stopped) {
    const auto tree = graph.tree(layer);
    int deepest = 0;
    for (NodeId id : tree) deepest = std::max(deepest, graph.depth(id));
    std::optional<std::string> bound;
    if (budget.turns_left() <= 0) {
      bound = "max_turns_per_layer";
    } else if (static_cast<int>(tree.size()) >= budget.max_nodes_per_layer) {
      bound = "max_nodes_per_layer";
    } else if (deepest >= budget.max_depth) {
      bound = "max_depth";
    }
    if (bound) {
      auto e = event(TraceKind::BudgetExhausted, layer);
      e.detail = *bound;
      e.turns_used = budget.turns_used;
      trace_.add(std::move(e));
      break;
    }

    auto decision = decide(graph, layer, budget);
    ++turn_;
    ++budget.turns_used;
    if (!decision) {
      forced_stop(graph, layer, *root, "supervisor retries exhausted");
      continue;
    }
    execute(graph, layer, *decision, budget);
  }

  completed_.push_back(layer);
  auto end = event(TraceKind::LayerEnd, layer);
  end.turns_used = budget.turns_used;
  trace_.add(std::move(end));
}

std::optional<SupervisorDecision> Session::decide(const SoTGraph& graph, LayerId layer,
                                                  const BudgetState& budget) {
  const auto base = build_supervisor_prompt(graph, layer, budget, completed_);
  auto messages = base;
  for (int attempt = 1; attempt <= config_.retry_limit; ++attempt) {
    const auto reply =
        trace_.call(backends_.for_role(Role::Supervisor), Role::Supervisor, messages, layer, attempt);
    try {
      auto decision = parse_supervisor_decision(reply, graph, layer);
      if (decision.op == EdgeOp::Split && split_room(graph, layer, budget) < 2) {
        throw AgentError(AgentErrc::IllegalOperation, "no node budget left for a split");
      }
      return decision;
    } catch (const AgentError& err) {
      parse_error(trace_, layer, Role::Supervisor, attempt, err);
      messages = with_parse_feedback(base, reply, err.what());
    }
  }
  return std::nullopt;
}

std::optional<DetectiveOutput> Session::ask_detective(const SoTGraph& graph, LayerId layer,
                                                      const SupervisorDecision& decision,
                                                      DetectiveMode mode, int branch_limit) {
  const auto context = graph.context_path(decision.target);
  const auto base = build_detective_prompt(decision.goal, context, mode, branch_limit);
  auto messages = base;
  for (int attempt = 1; attempt <= config_.retry_limit; ++attempt) {
    const auto reply =
        trace_.call(backends_.for_role(Role::Detective), Role::Detective, messages, layer, attempt);
    try {
      auto out = parse_detective_output(reply, mode, branch_limit);
      if (mode == DetectiveMode::Refine) {
        const auto& q = std::get<std::string>(out);
        const auto& n = graph.node(decision.target);
        if (q == n.question || std::find(n.question_history.begin(), n.question_history.end(),
                                         q) != n.question_history.end()) {
          throw AgentError(AgentErrc::MalformedOutput,
                           "the rewritten question repeats an earlier version");
        }
      }
      return out;
    } catch (const AgentError& err) {
      parse_error(trace_, layer, Role::Detective, attempt, err);
      messages = with_parse_feedback(base, reply, err.what());
    }
  }
  return std::nullopt;
}

void Session::answer_node(SoTGraph& graph, NodeId id, LayerId layer) {
  const auto base = build_witness_prompt(video_, graph.node(id).question);
  auto messages = base;
  std::string answer;
  for (int attempt = 1; attempt <= config_.retry_limit && answer.empty(); ++attempt) {
    auto reply =
        trace_.call(backends_.for_role(Role::Witness), Role::Witness, messages, layer, attempt);
    if (!one_line(reply).empty()) {
      answer = std::move(reply);
      break;
    }
    const AgentError err(AgentErrc::MalformedOutput, "empty answer");
    parse_error(trace_, layer, Role::Witness, attempt, err);
    messages = with_parse_feedback(base, reply, err.what());
  }
  if (answer.empty()) answer = kNoAnswer;

  graph.record_answer(id, answer);
  auto e = event(TraceKind::Answer, layer);
  e.target = id;
  e.answer = std::move(answer);
  trace_.add(std::move(e));
}

void Session::forced_stop(SoTGraph& graph, LayerId layer, NodeId target, const std::string& why) {
  graph.mark_stopped(target, turn_);
  auto e = event(TraceKind::ForcedStop, layer);
  e.op = EdgeOp::Stop;
  e.target = target;
  e.turn = turn_;
  e.detail = why;
  trace_.add(std::move(e));
}

void Session::execute(SoTGraph& graph, LayerId layer, const SupervisorDecision& decision,
                      const BudgetState& budget) {
  const NodeId target = decision.target;
  auto op = event(TraceKind::Operation, layer);
  op.op = decision.op;
  op.target = target;
  op.turn = turn_;
  op.detail = decision.goal;

  const auto needs_answer = [&] {
    const auto& n = graph.node(target);
    return n.status == NodeStatus::Open && !n.answer;
  };

  switch (decision.op) {
    case EdgeOp::Stop: {
      graph.mark_stopped(target, turn_);
      trace_.add(std::move(op));
      return;
    }
    case EdgeOp::Proceed: {
      if (needs_answer()) answer_node(graph, target, layer);
      auto out = ask_detective(graph, layer, decision, DetectiveMode::Proceed,
                               graph.max_branches());
      if (!out) return forced_stop(graph, layer, target, "detective retries exhausted");
      const auto& proposal = std::get<DetectiveProposal>(*out);
      const NodeId child = graph.add_child(target, proposal.selected_question(), turn_);
      op.nodes = {child};
      op.questions = {proposal.selected_question()};
      trace_.add(std::move(op));
      answer_node(graph, child, layer);
      return;
    }
    case EdgeOp::Refine: {
      auto out = ask_detective(graph, layer, decision, DetectiveMode::Refine, graph.max_branches());
      if (!out) return forced_stop(graph, layer, target, "detective retries exhausted");
      const auto& question = std::get<std::string>(*out);
      graph.refine_node(target, question, turn_);
      op.questions = {question};
      trace_.add(std::move(op));
      answer_node(graph, target, layer);
      return;
    }
    case EdgeOp::Split: {
      if (needs_answer()) answer_node(graph, target, layer);
      const int room = split_room(graph, layer, budget);
      auto out = ask_detective(graph, layer, decision, DetectiveMode::Split, room);
      if (!out) return forced_stop(graph, layer, target, "detective retries exhausted");
      const auto& branches = std::get<std::vector<std::string>>(*out);
      op.nodes = graph.split_node(target, branches, turn_);
      op.questions = branches;
      trace_.add(std::move(op));
      return;
    }
  }
}

std::vector<QaPair> Session::run_anomaly_layer(const SoTGraph& /*graph*/) {
  if (config_.anomaly_questions.empty()) {
    throw ConfigError("anomaly_questions.questions",
                      "the anomaly classification layer needs at least one question");
  }
  trace_.add(event(TraceKind::LayerStart, LayerId::Criminal));
  std::vector<QaPair> qa;
  for (const auto& question : config_.anomaly_questions) {
    auto answer = trace_.call(backends_.for_role(Role::Witness), Role::Witness,
                              build_witness_prompt(video_, question), LayerId::Criminal);
    auto e = event(TraceKind::AnomalyAnswer, LayerId::Criminal);
    e.questions = {question};
    e.answer = answer;
    trace_.add(std::move(e));
    qa.emplace_back(question, std::move(answer));
  }
  trace_.add(event(TraceKind::LayerEnd, LayerId::Criminal));
  return qa;
}

Classification Session::finalize(const SoTGraph& graph, const std::vector<QaPair>& anomaly_qa) {
  const auto base = build_classification_prompt(graph, anomaly_qa, config_.labels);
  auto messages = base;
  for (int attempt = 1; attempt <= config_.retry_limit; ++attempt) {
    const auto reply = trace_.call(backends_.for_role(Role::Supervisor), Role::Supervisor,
                                   messages, LayerId::Criminal, attempt);
    try {
      auto c = parse_classification(reply, config_.labels);
      auto e = event(TraceKind::Classification, LayerId::Criminal);
      e.detail = std::string(to_string(c.ad)) + "/" + c.ac;
      trace_.add(std::move(e));
      return c;
    } catch (const AgentError& err) {
      parse_error(trace_, LayerId::Criminal, Role::Supervisor, attempt, err);
      messages = with_parse_feedback(base, reply, err.what());
    }
  }
  Classification fallback{AdLabel::Normal, config_.labels.normal_label(),
                          std::string(kFallbackEvidence)};
  auto e = event(TraceKind::ForcedFallback, LayerId::Criminal);
  e.detail = "classification retries exhausted";
  trace_.add(std::move(e));
  return fallback;
}

// run_session ----------------------------------------------------------------

SessionResult run_session(const MediaRef& video, const SessionConfig& config,
                          const AgentBackends& backends) {
  config.validate();
  if (video.video_id.empty()) throw ConfigError("video_id", "empty video id");

  const auto layers = exploration_layers(config.variant);
  std::map<LayerId, std::string> seeds;
  for (LayerId l : layers) seeds[l] = std::string(layer_seed_question(l));
  SoTGraph graph = SoTGraph::create(layers, seeds, config.max_branches);

  Session session(video, config, backends);
  auto start = event(TraceKind::SessionStart);
  start.layers = layers;
  for (LayerId l : layers) {
    start.nodes.push_back(*graph.root(l));
    start.questions.push_back(seeds[l]);
  }
  start.detail = video.video_id;
  session.trace().add(std::move(start));

  std::string stage;
  try {
    for (LayerId l : layers) {
      stage = "layer " + std::string(to_string(l));
      session.run_layer(graph, l);
    }
    stage = "anomaly layer";
    auto qa = session.run_anomaly_layer(graph);
    stage = "classification";
    auto classification = session.finalize(graph, qa);

    SessionResult result;
    result.video_id = video.video_id;
    result.variant = std::string(to_string(config.variant));
    result.graph = std::move(graph);
    result.anomaly_qa = std::move(qa);
    result.classification = std::move(classification);
    result.trace = std::move(session.trace()).take();
    return result;
  } catch (const BackendError& e) {
    throw BackendError(e.code(), "video " + video.video_id + ", " + stage + ": " + e.what(),
                       e.http_status(), e.fixture_key());
  }
}

// Result serialization ---------------------------------------------------------

bool SessionResult::used_fallback() const {
  return std::any_of(trace.begin(), trace.end(),
                     [](const TraceEvent& e) { return e.kind == TraceKind::ForcedFallback; });
}

json SessionResult::to_json() const {
  json qa = json::array();
  for (const auto& [q, a] : anomaly_qa) qa.push_back({{"question", q}, {"answer", a}});
  json events = json::array();
  for (const auto& e : trace) events.push_back(coat::to_json(e));
  json c = nullptr;
  if (classification) {
    c = json{{"ad", to_string(classification->ad)},
             {"ac", classification->ac},
             {"evidence", classification->evidence}};
  }
  return json{{"version", kFormatVersion},
              {"video_id", video_id},
              {"variant", variant},
              {"graph", graph.to_json()},
              {"anomaly_qa", std::move(qa)},
              {"classification", std::move(c)},
              {"trace", std::move(events)}};
}

SessionResult SessionResult::from_json(const json& doc) {
  try {
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw GraphError(GraphErrc::CorruptTrace, "unsupported trace version");
    }
    SessionResult r;
    r.video_id = doc.at("video_id").get<std::string>();
    r.variant = doc.at("variant").get<std::string>();
    r.graph = SoTGraph::from_json(doc.at("graph"));
    for (const auto& qa : doc.at("anomaly_qa")) {
      r.anomaly_qa.emplace_back(qa.at("question").get<std::string>(),
                                qa.at("answer").get<std::string>());
    }
    if (const auto& c = doc.at("classification"); !c.is_null()) {
      auto ad = parse_ad_label(c.at("ad").get<std::string>());
      if (!ad) throw GraphError(GraphErrc::CorruptTrace, "bad AD label " + c.at("ad").dump());
      r.classification =
          Classification{*ad, c.at("ac").get<std::string>(), c.at("evidence").get<std::string>()};
    }
    for (const auto& e : doc.at("trace")) r.trace.push_back(trace_event_from_json(e));
    return r;
  } catch (const GraphError&) {
    throw;
  } catch (const std::exception& e) {
    throw GraphError(GraphErrc::CorruptTrace, e.what());
  }
}

std::string SessionResult::serialize() const { return to_json().dump(2) + "\n"; }

SessionResult SessionResult::deserialize(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw GraphError(GraphErrc::CorruptTrace, e.what());
  }
  return from_json(doc);
}

// Replay ---------------------------------------------------------------------

SoTGraph replay_graph(const SessionResult& result) {
  SoTGraph graph;
  for (const auto& e : result.trace) {
    switch (e.kind) {
      case TraceKind::SessionStart: {
        std::map<LayerId, std::string> seeds;
        for (std::size_t i = 0; i < e.layers.size() && i < e.questions.size(); ++i) {
          seeds[e.layers[i]] = e.questions[i];
        }
        graph = SoTGraph::create(e.layers, seeds, result.graph.max_branches());
        break;
      }
      case TraceKind::Operation: {
        const auto turn = e.turn.value_or(0);
        switch (e.op.value_or(EdgeOp::Stop)) {
          case EdgeOp::Proceed: graph.add_child(*e.target, e.questions.at(0), turn); break;
          case EdgeOp::Refine: graph.refine_node(*e.target, e.questions.at(0), turn); break;
          case EdgeOp::Split: graph.split_node(*e.target, e.questions, turn); break;
          case EdgeOp::Stop: graph.mark_stopped(*e.target, turn); break;
        }
        break;
      }
      case TraceKind::ForcedStop: graph.mark_stopped(*e.target, e.turn.value_or(0)); break;
      case TraceKind::Answer: graph.record_answer(*e.target, *e.answer); break;
      default: break;
    }
  }
  return graph;
}

}  // namespace coat
