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

#include <httplib.h>

#include "coat/http_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <thread>

namespace coat {

using nlohmann::json;

namespace {

bool has_suffix(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_frame_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".webp" || ext == ".bmp";
}

json media_parts(const MediaRef& media) {
  json parts = json::array();
  if (media.kind == MediaKind::FrameDir) {
    std::error_code ec;
    std::vector<std::filesystem::path> frames;
    if (std::filesystem::is_directory(media.uri, ec)) {
      for (const auto& entry : std::filesystem::directory_iterator(media.uri, ec)) {
        if (entry.is_regular_file() && is_frame_file(entry.path())) frames.push_back(entry.path());
      }
      std::sort(frames.begin(), frames.end());
    }
    if (frames.empty()) {
      parts.push_back({{"type", "image_url"}, {"image_url", {{"url", media.uri}}}});
    }
    for (const auto& f : frames) {
      const auto url = "file://" + std::filesystem::absolute(f).string();
      parts.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    }
    return parts;
  }
  std::string url = media.uri;
  if (media.kind == MediaKind::VideoFile && url.find("://") == std::string::npos) {
    url = "file://" + std::filesystem::absolute(url).string();
  }
  parts.push_back({{"type", "video_url"}, {"video_url", {{"url", url}}}});
  return parts;
}

}  // namespace

json chat_completion_request(const BackendConfig& config, std::span<const Message> messages) {
  json wire = json::array();
  for (const auto& m : messages) {
    json msg{{"role", to_string(m.role)}};
    if (m.media.empty()) {
      msg["content"] = m.content;
    } else {
      json content = json::array();
      for (const auto& media : m.media) {
        for (auto& part : media_parts(media)) content.push_back(std::move(part));
      }
      content.push_back({{"type", "text"}, {"text", m.content}});
      msg["content"] = std::move(content);
    }
    wire.push_back(std::move(msg));
  }
  return json{{"model", config.model_name},
              {"messages", std::move(wire)},
              {"temperature", config.temperature},
              {"max_tokens", config.max_tokens}};
}

std::string chat_completion_content(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw BackendError(BackendErrc::InvalidResponse, std::string("response is not JSON: ") + e.what());
  }
  const auto* content = [&]() -> const json* {
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
      return nullptr;
    }
    const auto& choice = doc["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content")) return nullptr;
    return &choice["message"]["content"];
  }();
  if (!content || !content->is_string()) {
    throw BackendError(BackendErrc::InvalidResponse, "no choices[0].message.content in response");
  }
  return content->get<std::string>();
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  const auto& url = config_.endpoint_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint_url must include a scheme: '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  std::string base = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();
  if (has_suffix(base, "/chat/completions")) {
    path_ = base;
  } else if (has_suffix(base, "/v1")) {
    path_ = base + "/chat/completions";
  } else {
    path_ = base + "/v1/chat/completions";
  }
}

std::string HttpBackend::complete(Role /*role*/, std::span<const Message> messages) {
  if (messages.empty()) throw std::invalid_argument("complete() needs at least one message");
  const std::string body = chat_completion_request(config_, messages).dump();

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto timeout_us =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - timeout_s);

  for (int attempt = 0;; ++attempt) {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_s.count(), timeout_us.count());
    client.set_read_timeout(timeout_s.count(), timeout_us.count());
    client.set_write_timeout(timeout_s.count(), timeout_us.count());

    auto res = client.Post(path_, headers, body, "application/json");
    std::optional<BackendError> failure;
    if (!res) {
      const auto err = res.error();
      const bool timed_out =
          err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      failure.emplace(timed_out ? BackendErrc::Timeout : BackendErrc::Transport,
                      origin_ + path_ + ": " + httplib::to_string(err));
    } else if (res->status >= 500) {
      failure.emplace(BackendErrc::HttpStatus,
                      origin_ + path_ + " returned " + std::to_string(res->status), res->status);
    } else if (res->status < 200 || res->status >= 300) {
      throw BackendError(BackendErrc::HttpStatus,
                         origin_ + path_ + " returned " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200),
                         res->status);
    } else {
      return chat_completion_content(res->body);
    }

    if (attempt >= config_.max_retries) throw *failure;
    std::this_thread::sleep_for(config_.retry_backoff * (1 << std::min(attempt, 10)));
  }
}

}  // namespace coat
