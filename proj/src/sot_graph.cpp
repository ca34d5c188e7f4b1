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

#include "coat/sot_graph.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

namespace coat {

using nlohmann::json;

std::string to_string(NodeId id) { return "n" + std::to_string(id.value); }

std::optional<NodeId> parse_node_id(std::string_view text) {
  if (text.size() < 2 || text.front() != 'n') return std::nullopt;
  std::uint64_t value = 0;
  const auto* first = text.data() + 1;
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || value == 0) return std::nullopt;
  return NodeId{value};
}

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::Open: return "open";
    case NodeStatus::Answered: return "answered";
    case NodeStatus::Stopped: return "stopped";
  }
  return "?";
}

std::string_view to_string(EdgeOp op) {
  switch (op) {
    case EdgeOp::Proceed: return "proceed";
    case EdgeOp::Refine: return "refine";
    case EdgeOp::Split: return "split";
    case EdgeOp::Stop: return "stop";
  }
  return "?";
}

std::optional<EdgeOp> parse_edge_op(std::string_view text) {
  if (text == "proceed") return EdgeOp::Proceed;
  if (text == "refine") return EdgeOp::Refine;
  if (text == "split") return EdgeOp::Split;
  if (text == "stop") return EdgeOp::Stop;
  return std::nullopt;
}

std::string_view to_string(GraphErrc code) {
  switch (code) {
    case GraphErrc::DuplicateLayer: return "DuplicateLayer";
    case GraphErrc::MissingRoot: return "MissingRoot";
    case GraphErrc::UnknownNode: return "UnknownNode";
    case GraphErrc::NodeFrozen: return "NodeFrozen";
    case GraphErrc::TooFewBranches: return "TooFewBranches";
    case GraphErrc::TooManyBranches: return "TooManyBranches";
    case GraphErrc::AlreadyAnswered: return "AlreadyAnswered";
    case GraphErrc::EmptyAnswer: return "EmptyAnswer";
    case GraphErrc::RepeatedQuestion: return "RepeatedQuestion";
    case GraphErrc::StaleTurn: return "StaleTurn";
    case GraphErrc::CorruptTrace: return "CorruptTrace";
  }
  return "?";
}

SoTGraph SoTGraph::create(std::span<const LayerId> layers,
                          const std::map<LayerId, std::string>& root_questions,
                          int max_branches) {
  if (layers.empty()) throw GraphError(GraphErrc::MissingRoot, "no layers given");
  if (max_branches < 2) {
    throw GraphError(GraphErrc::TooFewBranches, "max_branches must be at least 2");
  }
  SoTGraph graph;
  graph.max_branches_ = max_branches;
  for (LayerId layer : layers) {
    if (graph.roots_.contains(layer)) {
      throw GraphError(GraphErrc::DuplicateLayer, std::string(to_string(layer)));
    }
    auto it = root_questions.find(layer);
    if (it == root_questions.end() || it->second.empty()) {
      throw GraphError(GraphErrc::MissingRoot,
                       "no root question for layer " + std::string(to_string(layer)));
    }
    graph.roots_[layer] = graph.allocate(layer, std::nullopt, it->second, 0);
    graph.layer_order_.push_back(layer);
  }
  return graph;
}

const ThoughtNode& SoTGraph::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw GraphError(GraphErrc::UnknownNode, to_string(id));
  return it->second;
}

ThoughtNode& SoTGraph::mutable_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw GraphError(GraphErrc::UnknownNode, to_string(id));
  return it->second;
}

ThoughtNode& SoTGraph::open_for_write(NodeId id) {
  auto& n = mutable_node(id);
  if (n.status == NodeStatus::Stopped) throw GraphError(GraphErrc::NodeFrozen, to_string(id));
  return n;
}

std::optional<NodeId> SoTGraph::root(LayerId layer) const {
  auto it = roots_.find(layer);
  if (it == roots_.end()) return std::nullopt;
  return it->second;
}

int SoTGraph::depth(NodeId id) const {
  int d = 0;
  for (auto cur = node(id).parent; cur; cur = node(*cur).parent) ++d;
  return d;
}

std::vector<NodeId> SoTGraph::tree(LayerId layer) const {
  std::vector<NodeId> out;
  auto r = root(layer);
  if (!r) return out;
  std::vector<NodeId> stack{*r};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& kids = node(cur).children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

NodeId SoTGraph::allocate(LayerId layer, std::optional<NodeId> parent, std::string question,
                          std::int64_t turn) {
  NodeId id{next_id_++};
  ThoughtNode n;
  n.id = id;
  n.layer = layer;
  n.question = std::move(question);
  n.parent = parent;
  n.turn = turn;
  nodes_.emplace(id, std::move(n));
  if (parent) mutable_node(*parent).children.push_back(id);
  return id;
}

void SoTGraph::log(std::int64_t turn, NodeId node, EdgeOp op) {
  events_.push_back(GraphEvent{turn, node, op});
}

namespace {

void check_turn(const std::vector<GraphEvent>& events, std::int64_t turn) {
  if (!events.empty() && turn < events.back().turn) {
    throw GraphError(GraphErrc::StaleTurn, "turn " + std::to_string(turn) +
                                               " precedes last logged turn " +
                                               std::to_string(events.back().turn));
  }
}

}  // namespace

NodeId SoTGraph::add_child(NodeId parent, std::string question, std::int64_t turn) {
  const auto& p = open_for_write(parent);
  check_turn(events_, turn);
  NodeId id = allocate(p.layer, parent, std::move(question), turn);
  log(turn, id, EdgeOp::Proceed);
  return id;
}

void SoTGraph::refine_node(NodeId id, std::string new_question, std::int64_t turn) {
  auto& n = open_for_write(id);
  if (new_question == n.question ||
      std::find(n.question_history.begin(), n.question_history.end(), new_question) !=
          n.question_history.end()) {
    throw GraphError(GraphErrc::RepeatedQuestion, to_string(id) + ": '" + new_question + "'");
  }
  check_turn(events_, turn);
  n.question_history.push_back(std::move(n.question));
  n.question = std::move(new_question);
  n.answer.reset();
  n.status = NodeStatus::Open;
  log(turn, id, EdgeOp::Refine);
}

std::vector<NodeId> SoTGraph::split_node(NodeId id, std::span<const std::string> branch_questions,
                                         std::int64_t turn) {
  const auto& n = open_for_write(id);
  if (branch_questions.size() < 2) {
    throw GraphError(GraphErrc::TooFewBranches,
                     std::to_string(branch_questions.size()) + " branch(es)");
  }
  if (branch_questions.size() > static_cast<std::size_t>(max_branches_)) {
    throw GraphError(GraphErrc::TooManyBranches,
                     std::to_string(branch_questions.size()) + " branches, limit " +
                         std::to_string(max_branches_));
  }
  check_turn(events_, turn);
  const LayerId layer = n.layer;
  std::vector<NodeId> created;
  created.reserve(branch_questions.size());
  for (const auto& q : branch_questions) {
    created.push_back(allocate(layer, id, q, turn));
    log(turn, created.back(), EdgeOp::Split);
  }
  return created;
}

void SoTGraph::mark_stopped(NodeId id, std::int64_t turn) {
  auto& n = mutable_node(id);
  if (n.status == NodeStatus::Stopped) return;
  check_turn(events_, turn);
  n.status = NodeStatus::Stopped;
  log(turn, id, EdgeOp::Stop);
}

void SoTGraph::record_answer(NodeId id, std::string answer) {
  auto& n = open_for_write(id);
  if (n.status == NodeStatus::Answered) {
    throw GraphError(GraphErrc::AlreadyAnswered, to_string(id));
  }
  if (answer.empty()) throw GraphError(GraphErrc::EmptyAnswer, to_string(id));
  n.answer = std::move(answer);
  n.status = NodeStatus::Answered;
}

std::vector<std::pair<std::string, std::optional<std::string>>> SoTGraph::context_path(
    NodeId id) const {
  std::vector<std::pair<std::string, std::optional<std::string>>> path;
  for (std::optional<NodeId> cur = id; cur; cur = node(*cur).parent) {
    const auto& n = node(*cur);
    path.emplace_back(n.question, n.answer);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Serialization -------------------------------------------------------------

namespace {

[[noreturn]] void corrupt(const std::string& what) {
  throw GraphError(GraphErrc::CorruptTrace, what);
}

NodeId id_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) corrupt(std::string("missing node id '") + key + "'");
  auto id = parse_node_id(j[key].get<std::string>());
  if (!id) corrupt("bad node id '" + j[key].get<std::string>() + "'");
  return *id;
}

NodeStatus parse_status(const std::string& s) {
  if (s == "open") return NodeStatus::Open;
  if (s == "answered") return NodeStatus::Answered;
  if (s == "stopped") return NodeStatus::Stopped;
  corrupt("bad status '" + s + "'");
}

}  // namespace

json SoTGraph::to_json() const {
  json doc;
  doc["version"] = kFormatVersion;
  doc["max_branches"] = max_branches_;
  doc["next_id"] = next_id_;

  json nodes = json::array();
  for (const auto& [id, n] : nodes_) {
    json j;
    j["id"] = to_string(id);
    j["layer"] = to_string(n.layer);
    j["question"] = n.question;
    j["answer"] = n.answer ? json(*n.answer) : json(nullptr);
    j["status"] = to_string(n.status);
    j["parent"] = n.parent ? json(to_string(*n.parent)) : json(nullptr);
    json kids = json::array();
    for (NodeId c : n.children) kids.push_back(to_string(c));
    j["children"] = std::move(kids);
    j["question_history"] = n.question_history;
    j["turn"] = n.turn;
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);

  json roots = json::array();
  for (LayerId layer : layer_order_) {
    roots.push_back({{"layer", to_string(layer)}, {"node", to_string(roots_.at(layer))}});
  }
  doc["roots"] = std::move(roots);

  json events = json::array();
  for (const auto& e : events_) {
    events.push_back({{"turn", e.turn}, {"node", to_string(e.node)}, {"op", to_string(e.op)}});
  }
  doc["events"] = std::move(events);
  return doc;
}

SoTGraph SoTGraph::from_json(const json& doc) {
  try {
    if (!doc.is_object()) corrupt("graph document is not an object");
    for (const char* key : {"version", "nodes", "roots", "events"}) {
      if (!doc.contains(key)) corrupt(std::string("missing key '") + key + "'");
    }
    if (doc["version"].get<int>() != kFormatVersion) {
      corrupt("unsupported version " + doc["version"].dump());
    }

    SoTGraph g;
    g.max_branches_ = doc.value("max_branches", kDefaultMaxBranches);
    if (g.max_branches_ < 2) corrupt("max_branches below 2");

    std::uint64_t max_seen = 0;
    for (const auto& j : doc.at("nodes")) {
      ThoughtNode n;
      n.id = id_field(j, "id");
      auto layer = parse_layer(j.at("layer").get<std::string>());
      if (!layer) corrupt("bad layer " + j.at("layer").dump());
      n.layer = *layer;
      n.question = j.at("question").get<std::string>();
      if (!j.at("answer").is_null()) n.answer = j.at("answer").get<std::string>();
      n.status = parse_status(j.at("status").get<std::string>());
      if (!j.at("parent").is_null()) n.parent = id_field(j, "parent");
      for (const auto& c : j.at("children")) {
        auto cid = parse_node_id(c.get<std::string>());
        if (!cid) corrupt("bad child id " + c.dump());
        n.children.push_back(*cid);
      }
      n.question_history = j.at("question_history").get<std::vector<std::string>>();
      n.turn = j.at("turn").get<std::int64_t>();
      if (std::find(n.question_history.begin(), n.question_history.end(), n.question) !=
          n.question_history.end()) {
        corrupt(to_string(n.id) + " has its current question in its history");
      }
      if (n.status == NodeStatus::Answered && (!n.answer || n.answer->empty())) {
        corrupt(to_string(n.id) + " is answered without an answer");
      }
      max_seen = std::max(max_seen, n.id.value);
      if (!g.nodes_.emplace(n.id, n).second) corrupt("duplicate node " + to_string(n.id));
    }

    for (const auto& r : doc.at("roots")) {
      auto layer = parse_layer(r.at("layer").get<std::string>());
      if (!layer) corrupt("bad root layer " + r.at("layer").dump());
      NodeId id = id_field(r, "node");
      if (!g.nodes_.contains(id) || g.nodes_.at(id).parent || g.nodes_.at(id).layer != *layer) {
        corrupt("root " + to_string(id) + " is not a root of layer " +
                std::string(to_string(*layer)));
      }
      if (!g.roots_.emplace(*layer, id).second) corrupt("duplicate root layer");
      g.layer_order_.push_back(*layer);
    }

    // Parent/child consistency: every child lists its parent, every non-root
    // appears in exactly one children list, and every parentless node is a root.
    std::map<NodeId, int> child_refs;
    for (const auto& [id, n] : g.nodes_) {
      for (NodeId c : n.children) {
        auto it = g.nodes_.find(c);
        if (it == g.nodes_.end() || it->second.parent != id) {
          corrupt("child link " + to_string(id) + " -> " + to_string(c) + " is inconsistent");
        }
        ++child_refs[c];
      }
    }
    for (const auto& [id, n] : g.nodes_) {
      if (n.parent) {
        if (child_refs[id] != 1) corrupt(to_string(id) + " is not listed once by its parent");
        if (g.nodes_.at(*n.parent).layer != n.layer) corrupt(to_string(id) + " crosses layers");
      } else if (!g.roots_.contains(n.layer) || g.roots_.at(n.layer) != id) {
        corrupt(to_string(id) + " has no parent but is not a root");
      }
    }
    // Parent links only point to existing nodes, so a cycle would leave some
    // node unreachable from the roots.
    std::size_t reachable = 0;
    for (LayerId layer : g.layer_order_) reachable += g.tree(layer).size();
    if (reachable != g.nodes_.size()) corrupt("graph is not a forest");

    std::int64_t last_turn = std::numeric_limits<std::int64_t>::min();
    for (const auto& e : doc.at("events")) {
      GraphEvent ev;
      ev.turn = e.at("turn").get<std::int64_t>();
      ev.node = id_field(e, "node");
      auto op = parse_edge_op(e.at("op").get<std::string>());
      if (!op) corrupt("bad op " + e.at("op").dump());
      ev.op = *op;
      if (!g.nodes_.contains(ev.node)) corrupt("event on unknown node " + to_string(ev.node));
      if (ev.turn < last_turn) corrupt("event turns decrease");
      last_turn = ev.turn;
      g.events_.push_back(ev);
    }

    g.next_id_ = doc.value("next_id", max_seen + 1);
    if (g.next_id_ <= max_seen) corrupt("next_id would reuse an existing id");
    return g;
  } catch (const GraphError&) {
    throw;
  } catch (const std::exception& e) {
    corrupt(e.what());
  }
}

std::string SoTGraph::serialize() const { return to_json().dump(2); }

SoTGraph SoTGraph::deserialize(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    corrupt(e.what());
  }
  return from_json(doc);
}

}  // namespace coat
