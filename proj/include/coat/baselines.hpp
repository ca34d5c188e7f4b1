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
#include <string>
#include <string_view>

#include "coat/agents.hpp"
#include "coat/backend.hpp"
#include "coat/session.hpp"
#include "coat/trace.hpp"

namespace coat {

/// Reasoning strategy. Coat is the multi-agent session; the rest are the
/// comparison baselines run against the same backends.
enum class Strategy { Direct, CoT, ToT, IoT, LCoT, Coat };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

struct BaselineConfig {
  Strategy strategy = Strategy::Direct;
  int tot_breadth = 3;
  int tot_depth = 2;
  int iot_max_iters = 4;
  int lcot_layers = 4;
  int retry_limit = 3;
  bool timestamps = false;

  /// Throws ConfigError.
  void validate() const;
};

// Every run_* sends its calls through `trace` and returns the parsed verdict,
// falling back to Normal (with a ForcedFallback event) after retry_limit
// unparseable replies.

/// One Witness call asking for the classification block.
Classification run_direct(const MediaRef& video, const AgentBackends& backends,
                          const LabelSet& labels, Trace& trace, int retry_limit = 3);

/// One Witness call told to reason step by step before the classification block.
Classification run_cot(const MediaRef& video, const AgentBackends& backends,
                       const LabelSet& labels, Trace& trace, int retry_limit = 3);

/// Per level: `tot_breadth` Witness proposals, each scored by the Supervisor
/// (`SCORE: <1-10>`; skipped when breadth is 1); the best extends the path
/// (ties go to the lowest index). A final Witness call classifies from the path.
Classification run_tot(const MediaRef& video, const AgentBackends& backends,
                       const LabelSet& labels, const BaselineConfig& cfg, Trace& trace);

/// The Detective guides (`QN: <question>` or `DONE`), the Witness answers;
/// the Witness classifies from the accumulated answers.
Classification run_iot(const MediaRef& video, const AgentBackends& backends,
                       const LabelSet& labels, const BaselineConfig& cfg, Trace& trace);

/// `lcot_layers` independent Witness passes from fixed perspectives, then a
/// Supervisor cross-check that classifies.
Classification run_lcot(const MediaRef& video, const AgentBackends& backends,
                        const LabelSet& labels, const BaselineConfig& cfg, Trace& trace);

/// Runs `cfg.strategy` (not Coat) and packages it like a CoAT session: empty
/// graph, no anomaly Q/A, variant set to the strategy name.
SessionResult run_baseline(const MediaRef& video, const AgentBackends& backends,
                           const LabelSet& labels, const BaselineConfig& cfg);

std::string render_score(int score);
/// Throws AgentError(MalformedOutput) unless a `SCORE:` line holds 1..10.
int parse_score(std::string_view text);

/// Either the next probe question or nullopt for DONE.
std::optional<std::string> parse_guide_reply(std::string_view text);

}  // namespace coat
