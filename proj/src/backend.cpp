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

#include "coat/backend.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <regex>

namespace coat {

using nlohmann::json;

std::string_view to_string(BackendErrc code) {
  switch (code) {
    case BackendErrc::Timeout: return "Timeout";
    case BackendErrc::HttpStatus: return "HttpStatus";
    case BackendErrc::Transport: return "Transport";
    case BackendErrc::InvalidResponse: return "InvalidResponse";
    case BackendErrc::FixtureMiss: return "FixtureMiss";
    case BackendErrc::WriteFailed: return "WriteFailed";
  }
  return "?";
}

// Normalization and keys -------------------------------------------------------

std::string normalize_text(std::string_view text) {
  std::vector<std::string> lines(1);
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      c = '\n';
    }
    if (c == '\n') {
      lines.emplace_back();
      pending_space = false;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\f' || c == '\v') {
      pending_space = !lines.back().empty();
      continue;
    }
    if (pending_space) lines.back().push_back(' ');
    pending_space = false;
    lines.back().push_back(c);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::size_t first = 0;
  while (first < lines.size() && lines[first].empty()) ++first;

  std::string out;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (i != first) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

std::string normalize_prompt(std::span<const Message> messages) {
  std::string out;
  for (const auto& m : messages) {
    out += "<|";
    out += to_string(m.role);
    out += "|>\n";
    out += normalize_text(m.content);
    out.push_back('\n');
    for (const auto& media : m.media) out += "<|media|> " + media.video_id + "\n";
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

const MediaRef* first_media(std::span<const Message> messages) {
  for (const auto& m : messages) {
    if (!m.media.empty()) return &m.media.front();
  }
  return nullptr;
}

const Message* last_user(std::span<const Message> messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == MessageRole::User) return &*it;
  }
  return nullptr;
}

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string prompt_hash(std::span<const Message> messages) {
  return sha256_hex(normalize_prompt(messages));
}

std::string fixture_key(Role role, std::span<const Message> messages) {
  std::string material = normalize_prompt(messages);
  if (role == Role::Witness) {
    const auto* media = first_media(messages);
    material += "<|video|> " + (media ? media->video_id : std::string()) + "\n";
  }
  return std::string(to_string(role)) + ":" + sha256_hex(material);
}

// Fixtures -------------------------------------------------------------------

bool FixturePattern::matches(Role r, std::span<const Message> messages) const {
  if (r != role) return false;
  if (video_id) {
    const auto* media = first_media(messages);
    if (!media || media->video_id != *video_id) return false;
  }
  const auto* ask = last_user(messages);
  const std::string text = ask ? ask->content : std::string();
  if (contains && lower(text).find(lower(*contains)) == std::string::npos) return false;
  if (regex) {
    const std::regex re(*regex, std::regex::ECMAScript | std::regex::icase);
    if (!std::regex_search(text, re)) return false;
  }
  return true;
}

std::optional<std::string> FixtureStore::lookup(Role role, std::span<const Message> messages) const {
  if (auto it = entries_.find(fixture_key(role, messages)); it != entries_.end()) {
    return it->second;
  }
  for (const auto& p : patterns_) {
    if (p.matches(role, messages)) return p.response;
  }
  return std::nullopt;
}

json FixtureStore::to_json() const {
  json patterns = json::array();
  for (const auto& p : patterns_) {
    json j{{"role", to_string(p.role)}, {"response", p.response}};
    if (p.video_id) j["video_id"] = *p.video_id;
    if (p.contains) j["contains"] = *p.contains;
    if (p.regex) j["regex"] = *p.regex;
    patterns.push_back(std::move(j));
  }
  return json{{"version", 1}, {"entries", entries_}, {"patterns", std::move(patterns)}};
}

FixtureStore FixtureStore::from_json(const json& doc) {
  if (!doc.is_object()) throw std::runtime_error("fixture document is not an object");
  FixtureStore store;
  if (doc.contains("entries")) {
    for (const auto& [key, value] : doc.at("entries").items()) {
      store.entries_[key] = value.get<std::string>();
    }
  }
  if (doc.contains("patterns")) {
    for (const auto& j : doc.at("patterns")) {
      FixturePattern p;
      auto role = parse_role(j.at("role").get<std::string>());
      if (!role) throw std::runtime_error("fixture pattern has unknown role " + j.at("role").dump());
      p.role = *role;
      if (j.contains("video_id")) p.video_id = j.at("video_id").get<std::string>();
      if (j.contains("contains")) p.contains = j.at("contains").get<std::string>();
      if (j.contains("regex")) {
        p.regex = j.at("regex").get<std::string>();
        std::regex check(*p.regex);  // reject bad expressions at load time
      }
      p.response = j.at("response").get<std::string>();
      store.patterns_.push_back(std::move(p));
    }
  }
  return store;
}

void FixtureStore::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw BackendError(BackendErrc::WriteFailed, "cannot open " + tmp.string());
    out << to_json().dump(2) << "\n";
    if (!out) throw BackendError(BackendErrc::WriteFailed, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw BackendError(BackendErrc::WriteFailed, path.string() + ": " + ec.message());
}

FixtureStore FixtureStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read fixtures " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed fixtures " + path.string() + ": " + e.what());
  }
}

// Backends -------------------------------------------------------------------

std::string ScriptedBackend::complete(Role role, std::span<const Message> messages) {
  if (auto reply = store_->lookup(role, messages)) return *reply;
  const auto key = fixture_key(role, messages);
  throw BackendError(BackendErrc::FixtureMiss, "no fixture for key " + key, 0, key);
}

std::string record(ModelBackend& live, FixtureStore& store, Role role,
                   std::span<const Message> messages) {
  std::string reply = live.complete(role, messages);
  store.put(fixture_key(role, messages), reply);
  return reply;
}

std::string RecordingBackend::complete(Role role, std::span<const Message> messages) {
  std::string reply = live_->complete(role, messages);
  const auto key = fixture_key(role, messages);
  std::lock_guard lock(mutex_);
  store_->put(key, reply);
  return reply;
}

FixtureStore RecordingBackend::snapshot() const {
  std::lock_guard lock(mutex_);
  return *store_;
}

void RecordingBackend::save(const std::filesystem::path& path) const { snapshot().save(path); }

ModelBackend& AgentBackends::for_role(Role role) const {
  const auto& ptr = role == Role::Witness     ? witness
                    : role == Role::Detective ? detective
                                              : supervisor;
  if (!ptr) throw std::logic_error("no backend configured for " + std::string(to_string(role)));
  return *ptr;
}

AgentBackends AgentBackends::shared(std::shared_ptr<ModelBackend> backend) {
  return AgentBackends{backend, backend, backend};
}

}  // namespace coat
