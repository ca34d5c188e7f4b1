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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coat/layer.hpp"

namespace coat {

/// Node identifier, unique within one graph and never reused. Renders as "n<k>".
struct NodeId {
  std::uint64_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

std::string to_string(NodeId id);
std::optional<NodeId> parse_node_id(std::string_view text);

enum class NodeStatus { Open, Answered, Stopped };

/// Graph operation. Proceed and Split events name the child they created (its
/// incoming edge); Refine and Stop events name the node they changed.
enum class EdgeOp { Proceed, Refine, Split, Stop };

std::string_view to_string(NodeStatus status);
std::string_view to_string(EdgeOp op);
std::optional<EdgeOp> parse_edge_op(std::string_view text);

struct ThoughtNode {
  NodeId id;
  LayerId layer = LayerId::Scenario;
  std::string question;
  std::optional<std::string> answer;
  NodeStatus status = NodeStatus::Open;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  std::vector<std::string> question_history;  ///< superseded versions, oldest first
  std::int64_t turn = 0;

  bool operator==(const ThoughtNode&) const = default;
};

struct GraphEvent {
  std::int64_t turn = 0;
  NodeId node;
  EdgeOp op = EdgeOp::Proceed;

  bool operator==(const GraphEvent&) const = default;
};

enum class GraphErrc {
  DuplicateLayer,
  MissingRoot,
  UnknownNode,
  NodeFrozen,
  TooFewBranches,
  TooManyBranches,
  AlreadyAnswered,
  EmptyAnswer,
  RepeatedQuestion,  ///< refine to the current or an earlier version
  StaleTurn,
  CorruptTrace,
};

std::string_view to_string(GraphErrc code);

class GraphError : public std::runtime_error {
 public:
  GraphError(GraphErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  GraphErrc code() const noexcept { return code_; }

 private:
  GraphErrc code_;
};

/// State-of-Thoughts memory: a forest of question/answer nodes, one tree per
/// layer, plus an ordered log of the operations applied to it.
///
/// Single writer. The graph is a plain value; copy it to hand it to another
/// thread.
class SoTGraph {
 public:
  static constexpr int kDefaultMaxBranches = 3;
  static constexpr int kFormatVersion = 1;

  /// Empty graph with no layers. Used by strategies that do not explore.
  SoTGraph() = default;

  /// One Open root per layer, in the order given.
  static SoTGraph create(std::span<const LayerId> layers,
                         const std::map<LayerId, std::string>& root_questions,
                         int max_branches = kDefaultMaxBranches);

  NodeId add_child(NodeId parent, std::string question, std::int64_t turn);
  /// Throws RepeatedQuestion if `new_question` is the current question or in
  /// the node's history.
  void refine_node(NodeId node, std::string new_question, std::int64_t turn);
  std::vector<NodeId> split_node(NodeId node, std::span<const std::string> branch_questions,
                                 std::int64_t turn);
  void mark_stopped(NodeId node, std::int64_t turn);
  void record_answer(NodeId node, std::string answer);

  /// (question, answer) pairs from the layer root down to `node`, root first.
  std::vector<std::pair<std::string, std::optional<std::string>>> context_path(NodeId node) const;

  const ThoughtNode& node(NodeId id) const;
  bool contains(NodeId id) const { return nodes_.contains(id); }
  std::optional<NodeId> root(LayerId layer) const;
  int depth(NodeId id) const;

  /// Ids of every node in `layer`'s tree, in pre-order (children in insertion order).
  std::vector<NodeId> tree(LayerId layer) const;

  const std::map<NodeId, ThoughtNode>& nodes() const { return nodes_; }
  const std::map<LayerId, NodeId>& roots() const { return roots_; }
  /// Layers in creation order.
  const std::vector<LayerId>& layers() const { return layer_order_; }
  const std::vector<GraphEvent>& events() const { return events_; }
  std::uint64_t next_id() const { return next_id_; }
  int max_branches() const { return max_branches_; }

  nlohmann::json to_json() const;
  static SoTGraph from_json(const nlohmann::json& doc);

  std::string serialize() const;
  static SoTGraph deserialize(std::string_view bytes);

  bool operator==(const SoTGraph&) const = default;

 private:
  ThoughtNode& mutable_node(NodeId id);
  ThoughtNode& open_for_write(NodeId id);
  NodeId allocate(LayerId layer, std::optional<NodeId> parent, std::string question,
                  std::int64_t turn);
  void log(std::int64_t turn, NodeId node, EdgeOp op);

  std::map<NodeId, ThoughtNode> nodes_;
  std::map<LayerId, NodeId> roots_;
  std::vector<LayerId> layer_order_;
  std::vector<GraphEvent> events_;
  std::uint64_t next_id_ = 1;
  int max_branches_ = kDefaultMaxBranches;
};

}  // namespace coat
