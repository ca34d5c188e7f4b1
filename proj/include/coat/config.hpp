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

#include <filesystem>
#include <map>
#include <string_view>

#include "coat/agents.hpp"
#include "coat/baselines.hpp"
#include "coat/http_backend.hpp"
#include "coat/session.hpp"

namespace coat {

/// Everything a TOML config file sets. Sections:
///   [backend]                 defaults shared by the three roles
///   [backend.witness|detective|supervisor]
///                             endpoint, model, temperature, max_tokens,
///                             timeout_ms, max_retries, retry_backoff_ms,
///                             api_key_env
///   [session]                 strategy, variant, max_turns_per_layer,
///                             max_depth, max_nodes_per_layer, retry_limit,
///                             max_branches, timestamps
///   [baselines]               tot_breadth, tot_depth, iot_max_iters, lcot_layers
///   [labels]                  normal, crimes (defaults to the UCF-Crime set)
///   [anomaly_questions]       questions (required)
///   [eval]                    ac_include_normal, workers
/// Unknown keys are rejected so typos do not silently fall back to defaults.
struct AppConfig {
  std::map<Role, BackendConfig> backends;  ///< roles with an endpoint and model
  Strategy strategy = Strategy::Coat;
  SessionConfig session;
  BaselineConfig baselines;
  bool ac_include_normal = true;
  int workers = 4;

  /// Throws ConfigError("backend.<role>.endpoint") when the role is not configured.
  const BackendConfig& backend(Role role) const;
};

/// Throws ConfigError naming the offending key.
AppConfig parse_config(std::string_view text);
AppConfig load_config(const std::filesystem::path& path);

}  // namespace coat
