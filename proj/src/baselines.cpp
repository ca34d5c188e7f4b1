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

#include "coat/baselines.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <sstream>

namespace coat {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

Message system(std::string content) { return Message{MessageRole::System, std::move(content), {}}; }

Message user_with_video(std::string content, const MediaRef& video) {
  return Message{MessageRole::User, std::move(content), {video}};
}

void note_parse_error(Trace& trace, Role role, int attempt, const std::exception& err) {
  TraceEvent e;
  e.kind = TraceKind::ParseError;
  e.role = role;
  e.attempt = attempt;
  e.detail = err.what();
  trace.add(std::move(e));
}

/// Shared retry/fallback loop for every classification reply.
Classification classify(ModelBackend& backend, Role role, const Messages& base,
                        const LabelSet& labels, Trace& trace, int retry_limit) {
  auto messages = base;
  for (int attempt = 1; attempt <= retry_limit; ++attempt) {
    const auto reply = trace.call(backend, role, messages, std::nullopt, attempt);
    try {
      auto c = parse_classification(reply, labels);
      TraceEvent e;
      e.kind = TraceKind::Classification;
      e.detail = std::string(to_string(c.ad)) + "/" + c.ac;
      trace.add(std::move(e));
      return c;
    } catch (const AgentError& err) {
      note_parse_error(trace, role, attempt, err);
      messages = with_parse_feedback(base, reply, err.what());
    }
  }
  TraceEvent e;
  e.kind = TraceKind::ForcedFallback;
  e.detail = "classification retries exhausted";
  trace.add(std::move(e));
  return Classification{AdLabel::Normal, labels.normal_label(), std::string(kFallbackEvidence)};
}

constexpr std::string_view kWitnessClassifier =
    "You are watching a surveillance video. Decide whether it shows a normal situation or an "
    "anomaly, and which category it belongs to.\n\n";

std::string numbered(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)\n";
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += std::to_string(i + 1) + ". " + items[i] + "\n";
  }
  return out;
}

constexpr std::array<std::string_view, 4> kPerspectives{
    "the physical setting and the objects in it",
    "the people and what each of them is doing",
    "the interactions between the people",
    "the order of events and anything unusual",
};

std::string perspective(int k) {
  if (k < static_cast<int>(kPerspectives.size())) return std::string(kPerspectives[k]);
  return "an independent overall reading (pass " + std::to_string(k + 1) + ")";
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Direct: return "direct";
    case Strategy::CoT: return "cot";
    case Strategy::ToT: return "tot";
    case Strategy::IoT: return "iot";
    case Strategy::LCoT: return "lcot";
    case Strategy::Coat: return "coat";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  const auto t = lower(text);
  if (t == "direct" || t == "baseline") return Strategy::Direct;
  if (t == "cot") return Strategy::CoT;
  if (t == "tot") return Strategy::ToT;
  if (t == "iot") return Strategy::IoT;
  if (t == "lcot") return Strategy::LCoT;
  if (t == "coat") return Strategy::Coat;
  return std::nullopt;
}

void BaselineConfig::validate() const {
  if (tot_breadth < 1) throw ConfigError("baselines.tot_breadth", "must be at least 1");
  if (tot_depth < 1) throw ConfigError("baselines.tot_depth", "must be at least 1");
  if (iot_max_iters < 1) throw ConfigError("baselines.iot_max_iters", "must be at least 1");
  if (lcot_layers < 1) throw ConfigError("baselines.lcot_layers", "must be at least 1");
  if (strategy == Strategy::LCoT && lcot_layers < 2) {
    throw ConfigError("baselines.lcot_layers", "lcot needs at least 2 layers");
  }
  if (retry_limit < 1) throw ConfigError("session.retry_limit", "must be at least 1");
}

std::string render_score(int score) { return "SCORE: " + std::to_string(score); }

int parse_score(std::string_view text) {
  for (auto line : split_lines(text)) {
    auto d = parse_directive(line);
    if (!d || d->key != "SCORE") continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(d->value.data(), d->value.data() + d->value.size(), v);
    if (ec != std::errc{} || ptr != d->value.data() + d->value.size() || v < 1 || v > 10) {
      throw AgentError(AgentErrc::MalformedOutput, "SCORE must be an integer 1-10, got '" +
                                                       d->value + "'");
    }
    return v;
  }
  throw AgentError(AgentErrc::MalformedOutput, "no SCORE line");
}

std::optional<std::string> parse_guide_reply(std::string_view text) {
  for (auto line : split_lines(text)) {
    if (one_line(line) == "DONE") return std::nullopt;
    auto d = parse_directive(line);
    if (d && d->key == "QN" && !d->value.empty()) return d->value;
  }
  throw AgentError(AgentErrc::MalformedOutput, "expected 'QN: <question>' or 'DONE'");
}

// Strategies -----------------------------------------------------------------

Classification run_direct(const MediaRef& video, const AgentBackends& backends,
                          const LabelSet& labels, Trace& trace, int retry_limit) {
  const Messages prompt{
      system(std::string(kWitnessClassifier) + classification_instructions(labels)),
      user_with_video("Classify this video.", video)};
  return classify(backends.for_role(Role::Witness), Role::Witness, prompt, labels, trace,
                  retry_limit);
}

Classification run_cot(const MediaRef& video, const AgentBackends& backends,
                       const LabelSet& labels, Trace& trace, int retry_limit) {
  const Messages prompt{
      system(std::string(kWitnessClassifier) + classification_instructions(labels)),
      user_with_video("Think step by step: first describe what happens in the video, then "
                      "reason about whether any of it is criminal, and only then give your "
                      "classification. End your reply with the classification lines.",
                      video)};
  return classify(backends.for_role(Role::Witness), Role::Witness, prompt, labels, trace,
                  retry_limit);
}

Classification run_tot(const MediaRef& video, const AgentBackends& backends,
                       const LabelSet& labels, const BaselineConfig& cfg, Trace& trace) {
  if (cfg.tot_breadth < 1 || cfg.tot_depth < 1) {
    throw ConfigError("baselines.tot_breadth", "tot breadth and depth must be at least 1");
  }
  std::vector<std::string> path;
  for (int level = 0; level < cfg.tot_depth; ++level) {
    std::vector<std::string> candidates;
    for (int i = 0; i < cfg.tot_breadth; ++i) {
      const Messages prompt{
          system("You are reasoning about a surveillance video one step at a time. Propose the "
                 "next reasoning step as one short paragraph grounded in what the video shows."),
          user_with_video("Reasoning so far:\n" + numbered(path) + "Propose candidate step " +
                              std::to_string(i + 1) + " of " + std::to_string(cfg.tot_breadth) +
                              " for step " + std::to_string(level + 1) + ".",
                          video)};
      candidates.push_back(
          trace.call(backends.for_role(Role::Witness), Role::Witness, prompt));
    }

    std::size_t best = 0;
    if (cfg.tot_breadth > 1) {
      std::vector<int> scores;
      for (const auto& candidate : candidates) {
        const Messages base{
            system("You evaluate reasoning about a surveillance video. Rate how much the "
                   "candidate step helps decide whether the video shows a crime and which one. "
                   "Reply with exactly one line:\nSCORE: <integer from 1 to 10>"),
            Message{MessageRole::User,
                    "Reasoning so far:\n" + numbered(path) + "Candidate step: " + candidate, {}}};
        auto messages = base;
        int score = 0;
        for (int attempt = 1; attempt <= cfg.retry_limit; ++attempt) {
          const auto reply = trace.call(backends.for_role(Role::Supervisor), Role::Supervisor,
                                        messages, std::nullopt, attempt);
          try {
            score = parse_score(reply);
            break;
          } catch (const AgentError& err) {
            note_parse_error(trace, Role::Supervisor, attempt, err);
            messages = with_parse_feedback(base, reply, err.what());
          }
        }
        scores.push_back(score);
      }
      best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) -
                                      scores.begin());
    }
    path.push_back(candidates[best]);
  }

  const Messages final_prompt{
      system(std::string(kWitnessClassifier) + classification_instructions(labels)),
      user_with_video("Reasoning path:\n" + numbered(path) +
                          "Using this reasoning and the video, classify it.",
                      video)};
  return classify(backends.for_role(Role::Witness), Role::Witness, final_prompt, labels, trace,
                  cfg.retry_limit);
}

Classification run_iot(const MediaRef& video, const AgentBackends& backends,
                       const LabelSet& labels, const BaselineConfig& cfg, Trace& trace) {
  if (cfg.iot_max_iters < 1) throw ConfigError("baselines.iot_max_iters", "must be at least 1");
  std::vector<std::string> evidence;
  for (int iter = 0; iter < cfg.iot_max_iters; ++iter) {
    const Messages base{
        system("You guide the investigation of a surveillance video by asking a Witness, who "
               "can see it, one probing question at a time. Reply with exactly one line:\n"
               "QN: <next question>\nor reply DONE when the evidence is sufficient to classify "
               "the video."),
        Message{MessageRole::User, "Evidence so far:\n" + numbered(evidence) + "Next step?", {}}};
    auto messages = base;
    std::optional<std::string> question;
    bool done = true;
    for (int attempt = 1; attempt <= cfg.retry_limit; ++attempt) {
      const auto reply = trace.call(backends.for_role(Role::Detective), Role::Detective,
                                    messages, std::nullopt, attempt);
      try {
        question = parse_guide_reply(reply);
        done = !question;
        break;
      } catch (const AgentError& err) {
        note_parse_error(trace, Role::Detective, attempt, err);
        messages = with_parse_feedback(base, reply, err.what());
      }
    }
    if (done) break;
    const auto answer = trace.call(backends.for_role(Role::Witness), Role::Witness,
                                   build_witness_prompt(video, *question));
    evidence.push_back("Q: " + *question + "\n   A: " + answer);
  }

  const Messages final_prompt{
      system(std::string(kWitnessClassifier) + classification_instructions(labels)),
      user_with_video("Evidence gathered so far:\n" + numbered(evidence) +
                          "Using this evidence and the video, classify it.",
                      video)};
  return classify(backends.for_role(Role::Witness), Role::Witness, final_prompt, labels, trace,
                  cfg.retry_limit);
}

Classification run_lcot(const MediaRef& video, const AgentBackends& backends,
                        const LabelSet& labels, const BaselineConfig& cfg, Trace& trace) {
  if (cfg.lcot_layers < 2) throw ConfigError("baselines.lcot_layers", "lcot needs at least 2 layers");
  std::vector<std::string> passes;
  for (int k = 0; k < cfg.lcot_layers; ++k) {
    const Messages prompt{
        system("You analyse a surveillance video from one assigned perspective. Describe what "
               "you observe from that perspective and say whether anything looks criminal."),
        user_with_video("Perspective " + std::to_string(k + 1) + " of " +
                            std::to_string(cfg.lcot_layers) + ": " + perspective(k) + ".",
                        video)};
    passes.push_back(trace.call(backends.for_role(Role::Witness), Role::Witness, prompt));
  }

  std::ostringstream usr;
  for (int k = 0; k < cfg.lcot_layers; ++k) {
    usr << "Analysis " << (k + 1) << " (" << perspective(k) << "):\n" << passes[k] << "\n\n";
  }
  usr << "List any inconsistencies between the analyses, then classify the video.";
  const Messages cross_check{
      system("Several independent analyses of the same surveillance video follow. Point out "
             "claims that contradict each other, discard the ones that are not supported, then "
             "classify the video.\n\n" +
             classification_instructions(labels)),
      Message{MessageRole::User, usr.str(), {}}};
  return classify(backends.for_role(Role::Supervisor), Role::Supervisor, cross_check, labels,
                  trace, cfg.retry_limit);
}

SessionResult run_baseline(const MediaRef& video, const AgentBackends& backends,
                           const LabelSet& labels, const BaselineConfig& cfg) {
  cfg.validate();
  Trace trace(cfg.timestamps);
  TraceEvent start;
  start.kind = TraceKind::SessionStart;
  start.detail = video.video_id;
  trace.add(std::move(start));

  Classification c;
  try {
    switch (cfg.strategy) {
      case Strategy::Direct: c = run_direct(video, backends, labels, trace, cfg.retry_limit); break;
      case Strategy::CoT: c = run_cot(video, backends, labels, trace, cfg.retry_limit); break;
      case Strategy::ToT: c = run_tot(video, backends, labels, cfg, trace); break;
      case Strategy::IoT: c = run_iot(video, backends, labels, cfg, trace); break;
      case Strategy::LCoT: c = run_lcot(video, backends, labels, cfg, trace); break;
      case Strategy::Coat:
        throw ConfigError("session.strategy", "coat is not a baseline; use run_session");
    }
  } catch (const BackendError& e) {
    throw BackendError(e.code(),
                       "video " + video.video_id + ", " + std::string(to_string(cfg.strategy)) +
                           ": " + e.what(),
                       e.http_status(), e.fixture_key());
  }

  SessionResult result;
  result.video_id = video.video_id;
  result.variant = std::string(to_string(cfg.strategy));
  result.classification = std::move(c);
  result.trace = std::move(trace).take();
  return result;
}

}  // namespace coat
