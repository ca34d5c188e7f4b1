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

#include "coat/agents.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

namespace coat {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<Directive> directive(std::string_view line) { return parse_directive(line); }

/// Non-blank lines of `text`, with `\r` stripped.
std::vector<std::string_view> content_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) out.push_back(line);
    start = end + 1;
  }
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Consecutive `<prefix>1`, `<prefix>2`, ... directives starting at `lines[i]`.
std::vector<std::string> numbered_run(const std::vector<std::string_view>& lines, std::size_t& i,
                                      std::string_view prefix) {
  std::vector<std::string> values;
  for (; i < lines.size(); ++i) {
    auto d = directive(lines[i]);
    if (!d || d->key.size() <= prefix.size() || d->key.compare(0, prefix.size(), prefix) != 0) {
      break;
    }
    auto n = parse_int(std::string_view(d->key).substr(prefix.size()));
    if (!n) break;
    if (*n != static_cast<int>(values.size()) + 1) {
      throw AgentError(AgentErrc::MalformedOutput,
                       "expected " + std::string(prefix) + std::to_string(values.size() + 1) +
                           ", got " + d->key);
    }
    if (d->value.empty()) throw AgentError(AgentErrc::MalformedOutput, d->key + " is empty");
    values.push_back(std::move(d->value));
  }
  return values;
}

std::optional<std::size_t> find_key(const std::vector<std::string_view>& lines, std::string_view key,
                                    std::size_t from = 0) {
  for (std::size_t i = from; i < lines.size(); ++i) {
    auto d = directive(lines[i]);
    if (d && d->key == key) return i;
  }
  return std::nullopt;
}

void require_distinct(const std::vector<std::string>& questions) {
  std::set<std::string> seen;
  for (const auto& q : questions) {
    if (!seen.insert(one_line(q)).second) {
      throw AgentError(AgentErrc::DuplicateCandidates, "'" + one_line(q) + "' appears twice");
    }
  }
}

std::string truncate(std::string text, std::size_t limit) {
  if (text.size() <= limit) return text;
  text.resize(limit);
  return text + "...";
}

}  // namespace

std::optional<Directive> parse_directive(std::string_view line) {
  line = trim(line);
  auto colon = line.find(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  auto key = trim(line.substr(0, colon));
  if (key.empty()) return std::nullopt;
  for (char c : key) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isupper(u) || std::isdigit(u))) return std::nullopt;
  }
  return Directive{std::string(key), std::string(trim(line.substr(colon + 1)))};
}

std::string one_line(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// Enumerations ---------------------------------------------------------------

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Witness: return "witness";
    case Role::Detective: return "detective";
    case Role::Supervisor: return "supervisor";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view text) {
  const auto t = lower(text);
  if (t == "witness") return Role::Witness;
  if (t == "detective") return Role::Detective;
  if (t == "supervisor") return Role::Supervisor;
  return std::nullopt;
}

std::string_view to_string(MessageRole role) {
  switch (role) {
    case MessageRole::System: return "system";
    case MessageRole::User: return "user";
    case MessageRole::Assistant: return "assistant";
  }
  return "?";
}

std::string_view to_string(MediaKind kind) {
  switch (kind) {
    case MediaKind::VideoFile: return "video_file";
    case MediaKind::FrameDir: return "frame_dir";
    case MediaKind::Url: return "url";
  }
  return "?";
}

std::optional<MediaKind> parse_media_kind(std::string_view text) {
  const auto t = lower(text);
  if (t == "video_file" || t == "videofile" || t == "video") return MediaKind::VideoFile;
  if (t == "frame_dir" || t == "framedir" || t == "frames") return MediaKind::FrameDir;
  if (t == "url") return MediaKind::Url;
  return std::nullopt;
}

std::string_view to_string(AgentErrc code) {
  switch (code) {
    case AgentErrc::MalformedOutput: return "MalformedOutput";
    case AgentErrc::IllegalTarget: return "IllegalTarget";
    case AgentErrc::IllegalOperation: return "IllegalOperation";
    case AgentErrc::WrongCardinality: return "WrongCardinality";
    case AgentErrc::DuplicateCandidates: return "DuplicateCandidates";
    case AgentErrc::UnknownLabel: return "UnknownLabel";
    case AgentErrc::EmptyGoal: return "EmptyGoal";
    case AgentErrc::EmptyQuestion: return "EmptyQuestion";
    case AgentErrc::InvalidLabelSet: return "InvalidLabelSet";
  }
  return "?";
}

std::string_view to_string(DetectiveMode mode) {
  switch (mode) {
    case DetectiveMode::Proceed: return "proceed";
    case DetectiveMode::Refine: return "refine";
    case DetectiveMode::Split: return "split";
  }
  return "?";
}

std::string_view to_string(AdLabel ad) { return ad == AdLabel::Normal ? "Normal" : "Abnormal"; }

std::optional<AdLabel> parse_ad_label(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "normal") return AdLabel::Normal;
  if (t == "abnormal") return AdLabel::Abnormal;
  return std::nullopt;
}

// Labels ---------------------------------------------------------------------

LabelSet::LabelSet(std::string normal_label, std::vector<std::string> crime_labels)
    : normal_(std::move(normal_label)), crimes_(std::move(crime_labels)) {
  std::set<std::string> seen;
  for (const auto& label : all()) {
    if (trim(label).empty() || trim(label).size() != label.size()) {
      throw AgentError(AgentErrc::InvalidLabelSet, "label '" + label + "' is empty or padded");
    }
    if (!seen.insert(lower(label)).second) {
      throw AgentError(AgentErrc::InvalidLabelSet, "label '" + label + "' is repeated");
    }
  }
  if (crimes_.empty()) throw AgentError(AgentErrc::InvalidLabelSet, "no crime labels");
}

LabelSet LabelSet::ucf_crime() {
  return LabelSet("Normal", {"Abuse", "Arrest", "Arson", "Assault", "Burglary", "Explosion",
                             "Fighting", "RoadAccidents", "Robbery", "Shooting", "Shoplifting",
                             "Stealing", "Vandalism"});
}

std::vector<std::string> LabelSet::all() const {
  std::vector<std::string> out;
  out.reserve(crimes_.size() + 1);
  out.push_back(normal_);
  out.insert(out.end(), crimes_.begin(), crimes_.end());
  return out;
}

std::optional<std::string> LabelSet::canonical(std::string_view label) const {
  const auto key = lower(trim(label));
  if (key == lower(normal_)) return normal_;
  for (const auto& c : crimes_) {
    if (lower(c) == key) return c;
  }
  return std::nullopt;
}

bool LabelSet::is_normal(std::string_view label) const {
  return lower(trim(label)) == lower(normal_);
}

// Supervisor grammar ---------------------------------------------------------

std::string render_supervisor_decision(const SupervisorDecision& d) {
  std::string out = "OPERATION: " + std::string(to_string(d.op)) + "\nTARGET: " +
                    to_string(d.target) + "\nGOAL:";
  if (!d.goal.empty()) out += " " + d.goal;
  return out;
}

SupervisorDecision parse_supervisor_decision(std::string_view text, const SoTGraph& graph,
                                             std::optional<LayerId> layer) {
  const auto lines = content_lines(text);
  std::optional<std::array<Directive, 3>> block;
  for (std::size_t i = 0; i + 2 < lines.size() && !block; ++i) {
    auto op = directive(lines[i]);
    if (!op || op->key != "OPERATION") continue;
    auto target = directive(lines[i + 1]);
    auto goal = directive(lines[i + 2]);
    if (target && target->key == "TARGET" && goal && goal->key == "GOAL") {
      block = std::array<Directive, 3>{*op, *target, *goal};
    }
  }
  if (!block) {
    throw AgentError(AgentErrc::MalformedOutput, "no OPERATION/TARGET/GOAL block");
  }
  const auto& [op_line, target_line, goal_line] = *block;

  auto op = parse_edge_op(lower(op_line.value));
  if (!op) throw AgentError(AgentErrc::MalformedOutput, "unknown operation '" + op_line.value + "'");
  auto target = parse_node_id(target_line.value);
  if (!target) {
    throw AgentError(AgentErrc::MalformedOutput, "bad target '" + target_line.value + "'");
  }
  if (*op != EdgeOp::Stop && goal_line.value.empty()) {
    throw AgentError(AgentErrc::MalformedOutput, "empty GOAL for " + op_line.value);
  }

  if (!graph.contains(*target)) {
    throw AgentError(AgentErrc::IllegalTarget, to_string(*target) + " does not exist");
  }
  const auto& node = graph.node(*target);
  if (node.status == NodeStatus::Stopped) {
    throw AgentError(AgentErrc::IllegalTarget, to_string(*target) + " is stopped");
  }
  if (layer && node.layer != *layer) {
    throw AgentError(AgentErrc::IllegalTarget, to_string(*target) + " belongs to layer " +
                                                   std::string(to_string(node.layer)));
  }
  // Follow-ups were derived from the current wording; rewriting it would
  // orphan their context.
  if (*op == EdgeOp::Refine && !node.children.empty()) {
    throw AgentError(AgentErrc::IllegalOperation,
                     "cannot refine " + to_string(*target) + ": it already has follow-ups");
  }
  return SupervisorDecision{*op, *target, goal_line.value};
}

// Detective grammar ----------------------------------------------------------

std::string render_detective_proposal(const DetectiveProposal& p) {
  std::string out;
  for (std::size_t i = 0; i < p.candidates.size(); ++i) {
    out += "Q" + std::to_string(i + 1) + ": " + p.candidates[i] + "\n";
  }
  out += "SELECT: " + std::to_string(p.selected + 1);
  if (!p.rationale.empty()) out += "\nRATIONALE: " + p.rationale;
  return out;
}

std::string render_detective_refinement(std::string_view question) {
  return "QR: " + std::string(question);
}

std::string render_detective_branches(std::span<const std::string> branches) {
  std::string out;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (i) out += "\n";
    out += "B" + std::to_string(i + 1) + ": " + branches[i];
  }
  return out;
}

DetectiveProposal parse_detective_proposal(std::string_view text) {
  const auto lines = content_lines(text);
  auto start = find_key(lines, "Q1");
  if (!start) throw AgentError(AgentErrc::MalformedOutput, "no Q1 line");
  std::size_t i = *start;
  auto questions = numbered_run(lines, i, "Q");
  if (questions.size() != 3) {
    throw AgentError(AgentErrc::WrongCardinality,
                     "expected 3 candidate questions, got " + std::to_string(questions.size()));
  }
  auto select = i < lines.size() ? directive(lines[i]) : std::nullopt;
  if (!select || select->key != "SELECT") {
    throw AgentError(AgentErrc::MalformedOutput, "SELECT line must follow Q3");
  }
  auto index = parse_int(select->value);
  if (!index || *index < 1 || *index > 3) {
    throw AgentError(AgentErrc::MalformedOutput, "SELECT must be 1, 2 or 3, got '" +
                                                     select->value + "'");
  }
  require_distinct(questions);

  DetectiveProposal out;
  std::copy(questions.begin(), questions.end(), out.candidates.begin());
  out.selected = *index - 1;
  if (i + 1 < lines.size()) {
    auto rationale = directive(lines[i + 1]);
    if (rationale && rationale->key == "RATIONALE") out.rationale = rationale->value;
  }
  return out;
}

std::string parse_detective_refinement(std::string_view text) {
  const auto lines = content_lines(text);
  for (auto line : lines) {
    auto d = directive(line);
    if (d && d->key == "QR" && !d->value.empty()) return d->value;
  }
  throw AgentError(AgentErrc::MalformedOutput, "no QR line");
}

std::vector<std::string> parse_detective_branches(std::string_view text, int max_branches) {
  const auto lines = content_lines(text);
  auto start = find_key(lines, "B1");
  if (!start) throw AgentError(AgentErrc::MalformedOutput, "no B1 line");
  std::size_t i = *start;
  auto branches = numbered_run(lines, i, "B");
  if (branches.size() < 2 || branches.size() > static_cast<std::size_t>(max_branches)) {
    throw AgentError(AgentErrc::WrongCardinality,
                     "expected 2.." + std::to_string(max_branches) + " branches, got " +
                         std::to_string(branches.size()));
  }
  require_distinct(branches);
  return branches;
}

DetectiveOutput parse_detective_output(std::string_view text, DetectiveMode mode, int max_branches) {
  switch (mode) {
    case DetectiveMode::Proceed: return parse_detective_proposal(text);
    case DetectiveMode::Refine: return parse_detective_refinement(text);
    case DetectiveMode::Split: return parse_detective_branches(text, max_branches);
  }
  throw AgentError(AgentErrc::MalformedOutput, "unknown mode");
}

// Classification grammar -----------------------------------------------------

std::string render_classification(const Classification& c) {
  std::string out = "AD: " + std::string(to_string(c.ad)) + "\nAC: " + c.ac;
  if (!c.evidence.empty()) out += "\nEVIDENCE: " + c.evidence;
  return out;
}

Classification parse_classification(std::string_view text, const LabelSet& labels) {
  const auto lines = content_lines(text);
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    auto ad = directive(lines[i]);
    if (!ad || ad->key != "AD") continue;
    auto ac = directive(lines[i + 1]);
    if (!ac || ac->key != "AC") continue;

    if (!parse_ad_label(ad->value)) {
      throw AgentError(AgentErrc::MalformedOutput, "AD must be Normal or Abnormal, got '" +
                                                       ad->value + "'");
    }
    if (ac->value.empty()) throw AgentError(AgentErrc::MalformedOutput, "empty AC");
    auto label = labels.canonical(ac->value);
    if (!label) throw AgentError(AgentErrc::UnknownLabel, "'" + ac->value + "'");

    Classification out;
    out.ac = *label;
    out.ad = labels.is_normal(*label) ? AdLabel::Normal : AdLabel::Abnormal;
    if (i + 2 < lines.size()) {
      auto evidence = directive(lines[i + 2]);
      if (evidence && evidence->key == "EVIDENCE") out.evidence = evidence->value;
    }
    return out;
  }
  throw AgentError(AgentErrc::MalformedOutput, "no AD/AC block");
}

// Prompts --------------------------------------------------------------------

namespace {

Message system(std::string content) { return Message{MessageRole::System, std::move(content), {}}; }
Message user(std::string content) { return Message{MessageRole::User, std::move(content), {}}; }

std::string node_summary(const SoTGraph& graph, NodeId id) {
  const auto& n = graph.node(id);
  std::string line = "- " + to_string(id) + " (depth " + std::to_string(graph.depth(id)) + ", " +
                     std::string(to_string(n.status)) + ") Q: " + one_line(n.question);
  if (n.answer) line += " | A: " + truncate(one_line(*n.answer), 300);
  if (!n.question_history.empty()) {
    line += " | refined " + std::to_string(n.question_history.size()) + "x";
  }
  return line;
}

}  // namespace

Messages build_supervisor_prompt(const SoTGraph& graph, LayerId layer, const BudgetState& budget,
                                 std::span<const LayerId> completed_layers) {
  const auto tree = graph.tree(layer);
  int deepest = 0;
  for (NodeId id : tree) deepest = std::max(deepest, graph.depth(id));
  const int node_count = static_cast<int>(tree.size());
  const int branch_room =
      std::min(graph.max_branches(), budget.max_nodes_per_layer - node_count);
  const bool exhausted = budget.turns_left() <= 0 || node_count >= budget.max_nodes_per_layer ||
                         deepest >= budget.max_depth;

  std::ostringstream sys;
  sys << "You are the Supervisor of a surveillance-video investigation. You manage a tree of "
         "question-answer nodes about one video and decide how the exploration continues. A "
         "Detective writes the questions and a Witness who can see the video answers them.\n\n"
         "Operations:\n"
         "- proceed: the Detective proposes three follow-up questions to the target node and "
         "keeps the most relevant one.\n"
         "- refine: the Detective rewrites the target node's question using the context "
         "gathered so far. Only nodes without follow-ups can be refined.\n"
         "- split: the Detective divides the target node into 2 to "
      << graph.max_branches()
      << " branch questions.\n"
         "- stop: the target node is fully explored. Stopping the layer root ends the layer.\n\n"
         "Reply with exactly these three lines:\n"
         "OPERATION: proceed|refine|split|stop\n"
         "TARGET: n<k>\n"
         "GOAL: <exploration goal for the Detective; may be empty for stop>";

  std::ostringstream usr;
  usr << "Current layer: " << to_string(layer) << " " << layer_theme(layer) << "\n";
  if (!completed_layers.empty()) {
    usr << "Completed layers:\n";
    for (LayerId done : completed_layers) {
      const auto done_tree = graph.tree(done);
      int answered = 0;
      for (NodeId id : done_tree) answered += graph.node(id).answer ? 1 : 0;
      usr << "- " << to_string(done) << " " << layer_theme(done) << ": " << done_tree.size()
          << " nodes, " << answered << " answered.";
      if (auto r = graph.root(done); r && graph.node(*r).answer) {
        usr << " Root answer: " << truncate(one_line(*graph.node(*r).answer), 200);
      }
      usr << "\n";
    }
  }
  usr << "Budget: " << std::max(0, budget.turns_left()) << " of " << budget.max_turns_per_layer
      << " turns left; " << node_count << " of " << budget.max_nodes_per_layer
      << " nodes used; depth limit " << budget.max_depth << ".\n";
  if (exhausted) {
    usr << "Budget exhausted: the only legal operation is stop.\n";
  } else if (branch_room < 2) {
    usr << "Split is not available: too few nodes left in the budget.\n";
  } else {
    usr << "Split may create at most " << branch_room << " branches.\n";
  }

  usr << "Open nodes:\n";
  for (NodeId id : tree) {
    if (graph.node(id).status != NodeStatus::Stopped) usr << node_summary(graph, id) << "\n";
  }
  bool any_stopped = false;
  for (NodeId id : tree) {
    if (graph.node(id).status != NodeStatus::Stopped) continue;
    if (!any_stopped) usr << "Stopped nodes:\n";
    any_stopped = true;
    usr << node_summary(graph, id) << "\n";
  }
  usr << "Choose the next operation.";

  return {system(sys.str()), user(usr.str())};
}

Messages build_detective_prompt(
    std::string_view goal,
    std::span<const std::pair<std::string, std::optional<std::string>>> context,
    DetectiveMode mode, int branch_limit) {
  if (trim(goal).empty()) throw AgentError(AgentErrc::EmptyGoal, "detective goal is empty");

  std::ostringstream sys;
  sys << "You are the Detective in a surveillance-video investigation. You cannot see the "
         "video; a Witness who can see it answers your questions. Write clear, specific "
         "questions that can be answered from the footage.\n\n";
  switch (mode) {
    case DetectiveMode::Proceed:
      sys << "Propose exactly three distinct follow-up questions and select the one most "
             "relevant to the goal. Reply with exactly these lines:\n"
             "Q1: <question>\nQ2: <question>\nQ3: <question>\nSELECT: <1, 2 or 3>\n"
             "RATIONALE: <optional, one line>";
      break;
    case DetectiveMode::Refine:
      sys << "Rewrite the question you are given using the context gathered so far so that "
             "it better serves the goal. Reply with exactly one line:\nQR: <rewritten question>";
      break;
    case DetectiveMode::Split:
      sys << "Divide the question you are given into between 2 and " << branch_limit
          << " branch questions that each explore a different aspect. Reply with one line "
             "per branch:\nB1: <question>\nB2: <question>\n...";
      break;
  }

  std::ostringstream usr;
  usr << "Exploration goal: " << goal << "\n\nContext (root first):\n";
  if (context.empty()) usr << "(none)\n";
  for (std::size_t i = 0; i < context.size(); ++i) {
    usr << (i + 1) << ". Q: " << context[i].first << "\n   A: "
        << (context[i].second ? *context[i].second : std::string("(not answered yet)")) << "\n";
  }
  const std::string last = context.empty() ? std::string() : context.back().first;
  switch (mode) {
    case DetectiveMode::Proceed:
      usr << "\nAsk follow-up questions to the last question above.";
      break;
    case DetectiveMode::Refine:
      usr << "\nQuestion to rewrite: " << last;
      break;
    case DetectiveMode::Split:
      usr << "\nQuestion to divide: " << last << "\nWrite at most " << branch_limit
          << " branches.";
      break;
  }
  return {system(sys.str()), user(usr.str())};
}

Messages build_witness_prompt(const MediaRef& media, std::string_view question) {
  if (trim(question).empty()) throw AgentError(AgentErrc::EmptyQuestion, "witness question is empty");
  Message ask = user(std::string(question));
  ask.media.push_back(media);
  return {system("You are the Witness. You are watching a surveillance video. Answer the "
                 "question using only what is visible in the footage. Describe literally and "
                 "concretely; do not speculate about anything you cannot see."),
          std::move(ask)};
}

std::string classification_instructions(const LabelSet& labels) {
  std::string out =
      "Reply with exactly these lines:\n"
      "AD: Normal|Abnormal\n"
      "AC: <one label from the list>\n"
      "EVIDENCE: <one-line summary of the decisive evidence>\n"
      "Labels: ";
  const auto all = labels.all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i) out += ", ";
    out += all[i];
  }
  out += "\nAC must be " + labels.normal_label() + " exactly when AD is Normal.";
  return out;
}

Messages build_classification_prompt(
    const SoTGraph& graph, std::span<const std::pair<std::string, std::string>> anomaly_qa,
    const LabelSet& labels) {
  std::string sys =
      "You are the Supervisor of a surveillance-video investigation. Weigh all of the evidence "
      "below, including the answers to the anomaly-focused questions, and classify the "
      "video.\n\n" +
      classification_instructions(labels);

  std::ostringstream usr;
  usr << "Exploration findings:\n";
  for (LayerId layer : graph.layers()) {
    usr << "[" << to_string(layer) << "] " << layer_theme(layer) << "\n";
    bool any = false;
    for (NodeId id : graph.tree(layer)) {
      const auto& n = graph.node(id);
      if (!n.answer) continue;
      any = true;
      const std::string indent(static_cast<std::size_t>(graph.depth(id)) * 2, ' ');
      usr << indent << "- Q: " << n.question << "\n" << indent << "  A: " << *n.answer << "\n";
    }
    if (!any) usr << "(no answered questions)\n";
  }
  usr << "\nAnomaly-focused questions:\n";
  for (std::size_t i = 0; i < anomaly_qa.size(); ++i) {
    usr << (i + 1) << ". Q: " << anomaly_qa[i].first << "\n   A: " << anomaly_qa[i].second << "\n";
  }
  usr << "\nClassify the video.";
  return {system(std::move(sys)), user(usr.str())};
}

Messages with_parse_feedback(Messages messages, std::string_view rejected_reply,
                             std::string_view error) {
  messages.push_back(Message{MessageRole::Assistant, std::string(rejected_reply), {}});
  messages.push_back(user("Your previous reply could not be used (" + std::string(error) +
                          "). Reply again using exactly the required line format."));
  return messages;
}

}  // namespace coat
