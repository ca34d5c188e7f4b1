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

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "coat/layer.hpp"
#include "coat/sot_graph.hpp"

namespace coat {

// Roles and messages ---------------------------------------------------------

/// Agent role. Only the Witness is shown the video.
enum class Role { Witness, Detective, Supervisor };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

enum class MessageRole { System, User, Assistant };

std::string_view to_string(MessageRole role);

enum class MediaKind { VideoFile, FrameDir, Url };

std::string_view to_string(MediaKind kind);
std::optional<MediaKind> parse_media_kind(std::string_view text);

/// Opaque reference to a video. The engine never decodes media.
struct MediaRef {
  std::string video_id;
  std::string uri;
  MediaKind kind = MediaKind::VideoFile;

  bool operator==(const MediaRef&) const = default;
};

struct Message {
  MessageRole role = MessageRole::User;
  std::string content;
  std::vector<MediaRef> media;  ///< only on User messages sent to the Witness

  bool operator==(const Message&) const = default;
};

using Messages = std::vector<Message>;

// Errors ---------------------------------------------------------------------

enum class AgentErrc {
  MalformedOutput,
  IllegalTarget,
  IllegalOperation,
  WrongCardinality,
  DuplicateCandidates,
  UnknownLabel,
  EmptyGoal,
  EmptyQuestion,
  InvalidLabelSet,
};

std::string_view to_string(AgentErrc code);

class AgentError : public std::runtime_error {
 public:
  AgentError(AgentErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  AgentErrc code() const noexcept { return code_; }

 private:
  AgentErrc code_;
};

// Labels ---------------------------------------------------------------------

/// Normal label plus ordered crime labels. Matching is case-insensitive and
/// always returns the canonical spelling.
class LabelSet {
 public:
  /// Throws AgentError(InvalidLabelSet) on empty or case-colliding labels.
  LabelSet(std::string normal_label, std::vector<std::string> crime_labels);

  /// "Normal" plus the 13 UCF-Crime categories.
  static LabelSet ucf_crime();

  const std::string& normal_label() const { return normal_; }
  const std::vector<std::string>& crime_labels() const { return crimes_; }

  /// Normal first, then crime labels in configured order. This is also the
  /// row/column order of every confusion matrix.
  std::vector<std::string> all() const;

  std::optional<std::string> canonical(std::string_view label) const;
  bool is_normal(std::string_view label) const;

  bool operator==(const LabelSet&) const = default;

 private:
  std::string normal_;
  std::vector<std::string> crimes_;
};

// Structured agent outputs -----------------------------------------------------

struct SupervisorDecision {
  EdgeOp op = EdgeOp::Stop;
  NodeId target;
  std::string goal;

  bool operator==(const SupervisorDecision&) const = default;
};

enum class DetectiveMode { Proceed, Refine, Split };

std::string_view to_string(DetectiveMode mode);

struct DetectiveProposal {
  std::array<std::string, 3> candidates;
  int selected = 0;  ///< zero-based
  std::string rationale;

  const std::string& selected_question() const { return candidates[selected]; }
  bool operator==(const DetectiveProposal&) const = default;
};

using DetectiveOutput = std::variant<DetectiveProposal, std::string, std::vector<std::string>>;

enum class AdLabel { Normal, Abnormal };

std::string_view to_string(AdLabel ad);
std::optional<AdLabel> parse_ad_label(std::string_view text);

struct Classification {
  AdLabel ad = AdLabel::Normal;
  std::string ac;
  std::string evidence;

  bool operator==(const Classification&) const = default;
};

/// Per-layer exploration limits and usage.
struct BudgetState {
  int max_turns_per_layer = 8;
  int max_depth = 5;
  int max_nodes_per_layer = 12;
  int turns_used = 0;

  int turns_left() const { return max_turns_per_layer - turns_used; }
  bool operator==(const BudgetState&) const = default;
};

// Grammars -------------------------------------------------------------------
//
// Replies are line-oriented `KEY: value` blocks. Parsers skip surrounding prose
// and use the first complete block.

std::string render_supervisor_decision(const SupervisorDecision& decision);

/// Validates the target against `graph`. When `layer` is given the target must
/// belong to that layer's tree.
SupervisorDecision parse_supervisor_decision(std::string_view text, const SoTGraph& graph,
                                             std::optional<LayerId> layer = std::nullopt);

std::string render_detective_proposal(const DetectiveProposal& proposal);
std::string render_detective_refinement(std::string_view question);
std::string render_detective_branches(std::span<const std::string> branches);

DetectiveProposal parse_detective_proposal(std::string_view text);
std::string parse_detective_refinement(std::string_view text);
std::vector<std::string> parse_detective_branches(std::string_view text, int max_branches);
DetectiveOutput parse_detective_output(std::string_view text, DetectiveMode mode,
                                       int max_branches = SoTGraph::kDefaultMaxBranches);

std::string render_classification(const Classification& c);

/// The AC line wins over a contradicting AD line; AD is recomputed from it.
Classification parse_classification(std::string_view text, const LabelSet& labels);

// Prompt builders ------------------------------------------------------------
//
// All builders are pure: identical inputs give byte-identical messages.

Messages build_supervisor_prompt(const SoTGraph& graph, LayerId layer, const BudgetState& budget,
                                 std::span<const LayerId> completed_layers = {});

/// `context` is the path from the layer root to the target, root first. In
/// Refine mode its last question is the one being rewritten. `branch_limit`
/// caps the number of Split branches requested.
Messages build_detective_prompt(
    std::string_view goal,
    std::span<const std::pair<std::string, std::optional<std::string>>> context,
    DetectiveMode mode, int branch_limit = SoTGraph::kDefaultMaxBranches);

Messages build_witness_prompt(const MediaRef& media, std::string_view question);

/// Final verdict prompt: answered exploration nodes per layer, then the
/// anomaly-focused Q/A.
Messages build_classification_prompt(
    const SoTGraph& graph, std::span<const std::pair<std::string, std::string>> anomaly_qa,
    const LabelSet& labels);

/// Appends the rejected reply and a correction request so a retry is a
/// different prompt from the original.
Messages with_parse_feedback(Messages messages, std::string_view rejected_reply,
                             std::string_view error);

/// Shared fragment describing the AD/AC/EVIDENCE block for a label set.
std::string classification_instructions(const LabelSet& labels);

/// One `KEY: value` reply line; keys are upper-case alphanumerics.
struct Directive {
  std::string key;
  std::string value;
};

std::optional<Directive> parse_directive(std::string_view line);

/// Collapses whitespace runs to one space and trims both ends.
std::string one_line(std::string_view text);

}  // namespace coat
