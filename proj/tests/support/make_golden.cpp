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

// Regenerates data/golden: records the synthetic world into fixtures.json,
// then replays those fixtures to write the expected traces and predictions.
// Run after any intentional change to prompts, grammars or the trace format.

#include <iostream>

#include "golden.hpp"
#include "synthetic_world.hpp"

using namespace coat;
using namespace coat::testing;

int main() {
  const auto dir = golden_dir();
  const auto cfg = golden_config();
  const auto manifest = synthetic_manifest(6);
  write_file(dir / "manifest.jsonl", synthetic_manifest_jsonl(3));
  write_file(dir / "manifest6.jsonl", synthetic_manifest_jsonl(6));

  auto store = std::make_shared<FixtureStore>();
  auto recorder = std::make_shared<RecordingBackend>(
      std::make_shared<SyntheticWorld>(synthetic_videos()), store);
  const auto recording = AgentBackends::shared(recorder);
  for (const auto& row : golden_rows()) {
    for (const auto& e : manifest) run_golden(row, e.media(), cfg, recording);
  }
  recorder->save(dir / "fixtures.json");

  const auto replay = AgentBackends::shared(std::make_shared<ScriptedBackend>(golden_fixtures()));
  std::filesystem::remove_all(dir / "expected");
  for (const auto& row : golden_rows()) {
    std::vector<PredictionRecord> predictions;
    for (const auto& e : manifest) {
      const auto result = run_golden(row, e.media(), cfg, replay);
      write_file(expected_trace_path(row, e.video_id), result.serialize());
      predictions.push_back(make_prediction(result));
    }
    write_file(expected_predictions_path(row), predictions_jsonl(predictions));
  }
  std::cout << "fixtures: " << recorder->snapshot().entries().size() << " entries\n";
  return 0;
}
