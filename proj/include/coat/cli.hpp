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

#include <iosfwd>
#include <string>
#include <vector>

namespace coat {

/// Process exit codes of the `coat` tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,          ///< bad flags, unreadable files, anything unexpected
  kExitBackend = 2,        ///< BackendError (the fixture key is echoed on a miss)
  kExitConfig = 3,         ///< ConfigInvalid
  kExitManifest = 4,       ///< ManifestInvalid, bad predictions or missing gold labels
  kExitUnknownBaseline = 5,
};

/// Runs one `coat` command line. `args` excludes the program name. Normal
/// output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coat
