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

#include <chrono>
#include <string>

#include <json.hpp>

#include "coat/backend.hpp"

namespace coat {

struct BackendConfig {
  std::string endpoint_url;  ///< e.g. "http://127.0.0.1:8000" or ".../v1"
  std::string model_name;
  double temperature = 0.0;
  int max_tokens = 512;
  std::chrono::milliseconds timeout{120'000};
  int max_retries = 2;  ///< transport failures and 5xx only
  std::chrono::milliseconds retry_backoff{500};
  std::string api_key_env;  ///< name of the variable holding the bearer token

  bool operator==(const BackendConfig&) const = default;
};

/// Request body for `POST /v1/chat/completions`. Media references on user
/// messages become `video_url` / `image_url` content parts ahead of the text.
nlohmann::json chat_completion_request(const BackendConfig& config,
                                       std::span<const Message> messages);

/// Extracts `choices[0].message.content`. Throws BackendError(InvalidResponse).
std::string chat_completion_content(std::string_view body);

/// OpenAI-compatible chat-completions client. Stateless between calls, so
/// concurrent complete() calls are safe.
class HttpBackend : public ModelBackend {
 public:
  explicit HttpBackend(BackendConfig config);

  std::string complete(Role role, std::span<const Message> messages) override;

  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
  std::string origin_;  ///< scheme://host[:port]
  std::string path_;    ///< full request path
};

}  // namespace coat
