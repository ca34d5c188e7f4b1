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

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "coat/backend.hpp"
#include "coat/dataset.hpp"

namespace httplib {
class Server;
}

namespace coat::testing {

/// In-process chat-completions server answering from a fixture store. The
/// role comes from the request's model name and each media URL is mapped
/// back to the manifest entry whose uri it ends with.
class StubServer {
 public:
  StubServer(std::shared_ptr<const FixtureStore> store, std::map<std::string, Role> models,
             std::vector<ManifestEntry> videos);
  ~StubServer();

  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  /// The next `count` requests get `status` with an error body.
  void fail_next(int count, int status);
  /// The next `count` requests sleep this long before answering.
  void delay_next(int count, std::chrono::milliseconds delay);
  /// The next `count` requests get a 200 whose body is `body` verbatim.
  void garble_next(int count, std::string body);

  int requests() const { return requests_.load(); }
  std::string last_authorization() const;

 private:
  std::shared_ptr<const FixtureStore> store_;
  std::map<std::string, Role> models_;
  std::vector<ManifestEntry> videos_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mutex_;
  int fail_count_ = 0;
  int fail_status_ = 500;
  int delay_count_ = 0;
  std::chrono::milliseconds delay_{0};
  int garble_count_ = 0;
  std::string garble_body_;
  std::string last_auth_;
  std::atomic<int> requests_{0};
};

}  // namespace coat::testing
