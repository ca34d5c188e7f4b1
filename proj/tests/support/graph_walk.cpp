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

#include "graph_walk.hpp"

#include <algorithm>
#include <map>

#include "graph_oracle.hpp"

namespace coat::testing {

namespace {

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

std::string random_text(std::mt19937_64& rng, const char* prefix) {
  static const std::vector<std::string> words{"who", "is", "near", "the", "door", "red",
                                              "car", "\xc3\xa9t\xc3\xa9", "  spaced ", "a\nb"};
  std::string out = prefix;
  const int n = std::uniform_int_distribution<int>(1, 5)(rng);
  for (int i = 0; i < n; ++i) out += " " + pick(rng, words);
  return out;
}

}  // namespace

WalkStats random_walk(std::mt19937_64& rng, int length, SoTGraph* final_graph,
                      int roundtrip_every) {
  WalkStats stats;
  auto fail = [&](const std::string& what) { stats.violations.push_back(what); };

  std::vector<LayerId> all{LayerId::Scenario, LayerId::Entity, LayerId::Social, LayerId::Event};
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::uniform_int_distribution<std::size_t>(1, 4)(rng));
  std::map<LayerId, std::string> seeds;
  for (auto l : all) seeds[l] = "seed " + std::string(to_string(l));
  const int max_branches = std::uniform_int_distribution<int>(2, 4)(rng);
  auto g = SoTGraph::create(all, seeds, max_branches);

  std::int64_t turn = 0;
  std::uint64_t question_counter = 0;
  for (int step = 0; step < length; ++step) {
    const auto before = g;
    std::vector<NodeId> ids;
    for (const auto& [id, n] : g.nodes()) ids.push_back(id);
    NodeId target = pick(rng, ids);
    if (std::uniform_int_distribution<int>(0, 19)(rng) == 0) target = NodeId{g.next_id() + 7};
    if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) ++turn;
    std::int64_t use_turn = turn;
    const bool stale = turn > 0 && std::uniform_int_distribution<int>(0, 24)(rng) == 0;
    if (stale) use_turn = turn - 1;

    const int op = std::uniform_int_distribution<int>(0, 5)(rng);
    const bool known = g.contains(target);
    const bool stopped = known && g.node(target).status == NodeStatus::Stopped;
    bool expect_ok = known;
    try {
      switch (op) {
        case 0: {
          // Unique question text keeps refine from hitting RepeatedQuestion by chance.
          auto q = random_text(rng, ("q" + std::to_string(++question_counter)).c_str());
          expect_ok = expect_ok && !stopped && !(stale && !g.events().empty() &&
                                                 g.events().back().turn > use_turn);
          g.add_child(target, q, use_turn);
          break;
        }
        case 1: {
          const bool repeat = known && std::uniform_int_distribution<int>(0, 9)(rng) == 0;
          auto q = repeat ? g.node(target).question
                          : random_text(rng, ("r" + std::to_string(++question_counter)).c_str());
          expect_ok = expect_ok && !stopped && !repeat &&
                      !(stale && !g.events().empty() && g.events().back().turn > use_turn);
          g.refine_node(target, q, use_turn);
          break;
        }
        case 2: {
          const int k = std::uniform_int_distribution<int>(0, max_branches + 1)(rng);
          std::vector<std::string> qs;
          for (int i = 0; i < k; ++i) {
            qs.push_back(random_text(rng, ("b" + std::to_string(++question_counter)).c_str()));
          }
          expect_ok = expect_ok && !stopped && k >= 2 && k <= max_branches &&
                      !(stale && !g.events().empty() && g.events().back().turn > use_turn);
          g.split_node(target, qs, use_turn);
          break;
        }
        case 3: {
          // Stopping is rarer so trees grow.
          if (std::uniform_int_distribution<int>(0, 2)(rng) != 0) continue;
          expect_ok = expect_ok && (stopped || !(stale && !g.events().empty() &&
                                                 g.events().back().turn > use_turn));
          g.mark_stopped(target, use_turn);
          break;
        }
        default: {
          const bool empty = std::uniform_int_distribution<int>(0, 9)(rng) == 0;
          expect_ok = expect_ok && !stopped && !empty && !g.node(target).answer;
          g.record_answer(target, empty ? "" : random_text(rng, "ans"));
          break;
        }
      }
      if (!expect_ok) fail("step " + std::to_string(step) + ": invalid op accepted");
      ++stats.applied;
    } catch (const GraphError& e) {
      if (expect_ok) fail("step " + std::to_string(step) + ": valid op refused: " + e.what());
      if (!(g == before)) fail("step " + std::to_string(step) + ": refused op changed the graph");
      ++stats.rejected;
    }

    for (auto& v : graph_violations(g)) fail("step " + std::to_string(step) + ": " + v);
    for (auto& v : transition_violations(before, g)) fail("step " + std::to_string(step) + ": " + v);

    // History length equals the number of Refine events on the node.
    std::map<NodeId, std::size_t> refines;
    for (const auto& e : g.events()) refines[e.node] += e.op == EdgeOp::Refine;
    for (const auto& [id, n] : g.nodes()) {
      if (n.question_history.size() != refines[id]) fail(to_string(id) + ": history/refine mismatch");
    }

    if (roundtrip_every > 0 && step % roundtrip_every == 0) {
      if (!(SoTGraph::deserialize(g.serialize()) == g)) fail("round trip differs");
    }
  }
  if (!(SoTGraph::deserialize(g.serialize()) == g)) fail("final round trip differs");
  if (final_graph) *final_graph = std::move(g);
  return stats;
}

}  // namespace coat::testing
