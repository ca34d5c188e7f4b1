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

#include "coat/config.hpp"

#include <set>
#include <string>

#include <toml.hpp>

#include "coat/dataset.hpp"

namespace coat {

namespace {

void reject_unknown(const toml::table& table, const std::string& prefix,
                    const std::set<std::string>& allowed) {
  for (auto&& [key, node] : table) {
    const std::string k(key.str());
    if (!allowed.count(k)) {
      throw ConfigError(prefix.empty() ? k : prefix + "." + k, "unknown key");
    }
  }
}

const toml::table* section(const toml::table& root, const std::string& name) {
  auto* node = root.get(name);
  if (!node) return nullptr;
  auto* t = node->as_table();
  if (!t) throw ConfigError(name, "expected a table");
  return t;
}

template <typename T>
std::optional<T> get(const toml::table& t, const std::string& prefix, const char* key);

template <>
std::optional<std::int64_t> get(const toml::table& t, const std::string& prefix, const char* key) {
  auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (!node->is_integer()) throw ConfigError(prefix + "." + key, "expected an integer");
  return node->value<std::int64_t>();
}

template <>
std::optional<double> get(const toml::table& t, const std::string& prefix, const char* key) {
  auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (!node->is_number()) throw ConfigError(prefix + "." + key, "expected a number");
  return node->value<double>();
}

template <>
std::optional<bool> get(const toml::table& t, const std::string& prefix, const char* key) {
  auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (!node->is_boolean()) throw ConfigError(prefix + "." + key, "expected true or false");
  return node->value<bool>();
}

template <>
std::optional<std::string> get(const toml::table& t, const std::string& prefix, const char* key) {
  auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (!node->is_string()) throw ConfigError(prefix + "." + key, "expected a string");
  return node->value<std::string>();
}

template <>
std::optional<std::vector<std::string>> get(const toml::table& t, const std::string& prefix,
                                            const char* key) {
  auto* node = t.get(key);
  if (!node) return std::nullopt;
  auto* arr = node->as_array();
  if (!arr) throw ConfigError(prefix + "." + key, "expected an array of strings");
  std::vector<std::string> out;
  for (auto&& item : *arr) {
    if (!item.is_string()) throw ConfigError(prefix + "." + key, "expected an array of strings");
    out.push_back(*item.value<std::string>());
  }
  return out;
}

int get_int(const toml::table& t, const std::string& prefix, const char* key, int fallback) {
  auto v = get<std::int64_t>(t, prefix, key);
  if (!v) return fallback;
  if (*v < -1'000'000'000 || *v > 1'000'000'000) {
    throw ConfigError(prefix + "." + key, "out of range");
  }
  return static_cast<int>(*v);
}

const std::set<std::string> kBackendKeys{"endpoint",   "model",       "temperature",
                                         "max_tokens", "timeout_ms",  "max_retries",
                                         "retry_backoff_ms", "api_key_env"};

void apply_backend(const toml::table& t, const std::string& prefix, BackendConfig& cfg) {
  if (auto v = get<std::string>(t, prefix, "endpoint")) cfg.endpoint_url = *v;
  if (auto v = get<std::string>(t, prefix, "model")) cfg.model_name = *v;
  if (auto v = get<double>(t, prefix, "temperature")) cfg.temperature = *v;
  cfg.max_tokens = get_int(t, prefix, "max_tokens", cfg.max_tokens);
  cfg.timeout = std::chrono::milliseconds(
      get_int(t, prefix, "timeout_ms", static_cast<int>(cfg.timeout.count())));
  cfg.max_retries = get_int(t, prefix, "max_retries", cfg.max_retries);
  cfg.retry_backoff = std::chrono::milliseconds(
      get_int(t, prefix, "retry_backoff_ms", static_cast<int>(cfg.retry_backoff.count())));
  if (auto v = get<std::string>(t, prefix, "api_key_env")) cfg.api_key_env = *v;
}

void validate_backend(const BackendConfig& cfg, const std::string& prefix) {
  if (cfg.endpoint_url.empty()) throw ConfigError(prefix + ".endpoint", "missing");
  if (cfg.model_name.empty()) throw ConfigError(prefix + ".model", "missing");
  if (cfg.max_tokens < 1) throw ConfigError(prefix + ".max_tokens", "must be positive");
  if (cfg.timeout.count() < 1) throw ConfigError(prefix + ".timeout_ms", "must be positive");
  if (cfg.max_retries < 0) throw ConfigError(prefix + ".max_retries", "must not be negative");
  if (cfg.retry_backoff.count() < 0) {
    throw ConfigError(prefix + ".retry_backoff_ms", "must not be negative");
  }
}

void load_backends(const toml::table& root, AppConfig& out) {
  auto* backend = section(root, "backend");
  if (!backend) return;
  BackendConfig defaults;
  std::set<std::string> allowed = kBackendKeys;
  allowed.insert({"witness", "detective", "supervisor"});
  reject_unknown(*backend, "backend", allowed);
  apply_backend(*backend, "backend", defaults);

  for (auto role : {Role::Witness, Role::Detective, Role::Supervisor}) {
    const std::string name(to_string(role));
    const std::string prefix = "backend." + name;
    auto* t = section(*backend, name);
    if (!t) {
      throw ConfigError(prefix, "missing; all three roles need a backend section");
    }
    reject_unknown(*t, prefix, kBackendKeys);
    BackendConfig cfg = defaults;
    apply_backend(*t, prefix, cfg);
    validate_backend(cfg, prefix);
    out.backends.emplace(role, std::move(cfg));
  }
}

void load_session(const toml::table& root, AppConfig& out) {
  auto* t = section(root, "session");
  if (!t) return;
  const std::string p = "session";
  reject_unknown(*t, p,
                 {"strategy", "variant", "max_turns_per_layer", "max_depth",
                  "max_nodes_per_layer", "retry_limit", "max_branches", "timestamps"});
  if (auto v = get<std::string>(*t, p, "strategy")) {
    auto s = parse_strategy(*v);
    if (!s) throw ConfigError("session.strategy", "unknown strategy '" + *v + "'");
    out.strategy = *s;
  }
  if (auto v = get<std::string>(*t, p, "variant")) {
    auto var = parse_variant(*v);
    if (!var) throw ConfigError("session.variant", "unknown variant '" + *v + "'");
    out.session.variant = *var;
  }
  auto& b = out.session.budget;
  b.max_turns_per_layer = get_int(*t, p, "max_turns_per_layer", b.max_turns_per_layer);
  b.max_depth = get_int(*t, p, "max_depth", b.max_depth);
  b.max_nodes_per_layer = get_int(*t, p, "max_nodes_per_layer", b.max_nodes_per_layer);
  out.session.retry_limit = get_int(*t, p, "retry_limit", out.session.retry_limit);
  out.session.max_branches = get_int(*t, p, "max_branches", out.session.max_branches);
  if (auto v = get<bool>(*t, p, "timestamps")) out.session.timestamps = *v;
}

void load_baselines(const toml::table& root, AppConfig& out) {
  auto* t = section(root, "baselines");
  if (!t) return;
  const std::string p = "baselines";
  reject_unknown(*t, p, {"tot_breadth", "tot_depth", "iot_max_iters", "lcot_layers"});
  auto& b = out.baselines;
  b.tot_breadth = get_int(*t, p, "tot_breadth", b.tot_breadth);
  b.tot_depth = get_int(*t, p, "tot_depth", b.tot_depth);
  b.iot_max_iters = get_int(*t, p, "iot_max_iters", b.iot_max_iters);
  b.lcot_layers = get_int(*t, p, "lcot_layers", b.lcot_layers);
}

void load_labels(const toml::table& root, AppConfig& out) {
  auto* t = section(root, "labels");
  if (!t) return;
  reject_unknown(*t, "labels", {"normal", "crimes"});
  auto normal = get<std::string>(*t, "labels", "normal");
  if (!normal) throw ConfigError("labels.normal", "missing");
  auto crimes = get<std::vector<std::string>>(*t, "labels", "crimes");
  if (!crimes) throw ConfigError("labels.crimes", "missing");
  try {
    out.session.labels = LabelSet(*normal, *crimes);
  } catch (const AgentError& e) {
    throw ConfigError("labels.crimes", e.what());
  }
}

void load_anomaly_questions(const toml::table& root, AppConfig& out) {
  auto* t = section(root, "anomaly_questions");
  if (!t) throw ConfigError("anomaly_questions.questions", "missing");
  reject_unknown(*t, "anomaly_questions", {"questions"});
  auto qs = get<std::vector<std::string>>(*t, "anomaly_questions", "questions");
  if (!qs) throw ConfigError("anomaly_questions.questions", "missing");
  out.session.anomaly_questions = std::move(*qs);
}

void load_eval(const toml::table& root, AppConfig& out) {
  auto* t = section(root, "eval");
  if (!t) return;
  reject_unknown(*t, "eval", {"ac_include_normal", "workers"});
  if (auto v = get<bool>(*t, "eval", "ac_include_normal")) out.ac_include_normal = *v;
  out.workers = get_int(*t, "eval", "workers", out.workers);
  if (out.workers < 1) throw ConfigError("eval.workers", "must be at least 1");
}

}  // namespace

const BackendConfig& AppConfig::backend(Role role) const {
  auto it = backends.find(role);
  if (it == backends.end()) {
    throw ConfigError("backend." + std::string(to_string(role)) + ".endpoint",
                      "missing; live backends need endpoint and model for every role");
  }
  return it->second;
}

AppConfig parse_config(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError("line " + std::to_string(e.source().begin.line),
                      std::string(e.description()));
  }
  reject_unknown(root, "",
                 {"backend", "session", "baselines", "labels", "anomaly_questions", "eval"});
  AppConfig out;
  load_backends(root, out);
  load_session(root, out);
  load_baselines(root, out);
  load_labels(root, out);
  load_anomaly_questions(root, out);
  load_eval(root, out);
  out.session.validate();
  out.baselines.retry_limit = out.session.retry_limit;
  out.baselines.timestamps = out.session.timestamps;
  out.baselines.validate();
  return out;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error&) {
    throw ConfigError("--config", "cannot read " + path.string());
  }
  return parse_config(text);
}

}  // namespace coat
