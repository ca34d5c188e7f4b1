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
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coat/agents.hpp"

namespace coat {

enum class BackendErrc { Timeout, HttpStatus, Transport, InvalidResponse, FixtureMiss, WriteFailed };

std::string_view to_string(BackendErrc code);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrc code, const std::string& what, int http_status = 0,
               std::string fixture_key = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        http_status_(http_status),
        fixture_key_(std::move(fixture_key)) {}

  BackendErrc code() const noexcept { return code_; }
  int http_status() const noexcept { return http_status_; }
  /// Computed fixture key for FixtureMiss, empty otherwise.
  const std::string& fixture_key() const noexcept { return fixture_key_; }

 private:
  BackendErrc code_;
  int http_status_;
  std::string fixture_key_;
};

/// One request/response model endpoint. Implementations must allow
/// concurrent complete() calls.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  /// Returns the model's text reply. Throws BackendError.
  virtual std::string complete(Role role, std::span<const Message> messages) = 0;
};

/// Canonical rendering used for fixture keys: role tags, content with line
/// endings folded to `\n` and horizontal whitespace collapsed, and media video ids.
std::string normalize_prompt(std::span<const Message> messages);

/// Whitespace normalization applied to each message body.
std::string normalize_text(std::string_view text);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

/// `<role>:<sha256>` of the normalized prompt; the Witness key also covers the
/// video id.
std::string fixture_key(Role role, std::span<const Message> messages);

/// Hash recorded in traces for every backend call.
std::string prompt_hash(std::span<const Message> messages);

/// Fallback rule for replies that were not recorded byte-for-byte. Matches on
/// role, optionally the video id, and a case-insensitive substring or regex
/// over the last user message.
struct FixturePattern {
  Role role = Role::Witness;
  std::optional<std::string> video_id;
  std::optional<std::string> contains;
  std::optional<std::string> regex;
  std::string response;

  bool matches(Role r, std::span<const Message> messages) const;
  bool operator==(const FixturePattern&) const = default;
};

/// Exact replies keyed by fixture_key, then pattern fallbacks in order.
/// Lookups are thread-safe; writers must not race with readers.
class FixtureStore {
 public:
  std::optional<std::string> lookup(Role role, std::span<const Message> messages) const;

  void put(const std::string& key, std::string response) { entries_[key] = std::move(response); }
  void add_pattern(FixturePattern pattern) { patterns_.push_back(std::move(pattern)); }

  const std::map<std::string, std::string>& entries() const { return entries_; }
  const std::vector<FixturePattern>& patterns() const { return patterns_; }

  nlohmann::json to_json() const;
  static FixtureStore from_json(const nlohmann::json& doc);

  /// Throws BackendError(WriteFailed).
  void save(const std::filesystem::path& path) const;
  /// Throws std::runtime_error when the file is unreadable or malformed.
  static FixtureStore load(const std::filesystem::path& path);

  bool operator==(const FixtureStore&) const = default;

 private:
  std::map<std::string, std::string> entries_;
  std::vector<FixturePattern> patterns_;
};

/// Replays a fixture store. Never touches the network.
class ScriptedBackend : public ModelBackend {
 public:
  explicit ScriptedBackend(std::shared_ptr<const FixtureStore> store) : store_(std::move(store)) {}

  std::string complete(Role role, std::span<const Message> messages) override;

 private:
  std::shared_ptr<const FixtureStore> store_;
};

/// Forwards to a live backend and stores every reply under its fixture key.
class RecordingBackend : public ModelBackend {
 public:
  RecordingBackend(std::shared_ptr<ModelBackend> live, std::shared_ptr<FixtureStore> store)
      : live_(std::move(live)), store_(std::move(store)) {}

  std::string complete(Role role, std::span<const Message> messages) override;

  /// Snapshot of the store, taken under the recording lock.
  FixtureStore snapshot() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::shared_ptr<ModelBackend> live_;
  std::shared_ptr<FixtureStore> store_;
  mutable std::mutex mutex_;
};

/// Performs one live call and persists the reply into `store`.
std::string record(ModelBackend& live, FixtureStore& store, Role role,
                   std::span<const Message> messages);

/// The backend serving each agent role. Roles may share one backend.
struct AgentBackends {
  std::shared_ptr<ModelBackend> witness;
  std::shared_ptr<ModelBackend> detective;
  std::shared_ptr<ModelBackend> supervisor;

  ModelBackend& for_role(Role role) const;
  static AgentBackends shared(std::shared_ptr<ModelBackend> backend);
};

}  // namespace coat
