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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coat {

/// Themed reasoning stage. The four exploration layers run in declaration
/// order; Criminal is the terminal anomaly-question stage and never owns a
/// tree in the reasoning graph.
enum class LayerId { Scenario, Entity, Social, Event, Criminal };

/// Ablation variant: one exploration layer, or all four in order.
enum class Variant { L1, L2, L3, L4, Joint };

/// Short stable token used in JSON and prompts ("L1" ... "L4", "Criminal").
std::string_view to_string(LayerId layer);
std::optional<LayerId> parse_layer(std::string_view text);

/// Human-readable theme, e.g. "scenario understanding (location, time and scene objects)".
std::string_view layer_theme(LayerId layer);

/// Fixed seed question asked at the root of each exploration layer.
std::string_view layer_seed_question(LayerId layer);

/// Lower-case CLI token: "l1" ... "l4", "joint".
std::string_view to_string(Variant variant);
std::optional<Variant> parse_variant(std::string_view text);

/// Exploration layers for a variant, in execution order. Never contains Criminal.
std::vector<LayerId> exploration_layers(Variant variant);

}  // namespace coat
