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

#include "coat/layer.hpp"

#include <algorithm>
#include <cctype>

namespace coat {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(LayerId layer) {
  switch (layer) {
    case LayerId::Scenario: return "L1";
    case LayerId::Entity: return "L2";
    case LayerId::Social: return "L3";
    case LayerId::Event: return "L4";
    case LayerId::Criminal: return "Criminal";
  }
  return "?";
}

std::optional<LayerId> parse_layer(std::string_view text) {
  const auto t = lower(text);
  if (t == "l1" || t == "l1_scenario") return LayerId::Scenario;
  if (t == "l2" || t == "l2_entity") return LayerId::Entity;
  if (t == "l3" || t == "l3_social") return LayerId::Social;
  if (t == "l4" || t == "l4_event") return LayerId::Event;
  if (t == "criminal") return LayerId::Criminal;
  return std::nullopt;
}

std::string_view layer_theme(LayerId layer) {
  switch (layer) {
    case LayerId::Scenario:
      return "scenario understanding (location, time and scene objects)";
    case LayerId::Entity:
      return "entity extraction (people grouping, demographics and clothing)";
    case LayerId::Social:
      return "social context (proxemics, gestures and social roles)";
    case LayerId::Event:
      return "event understanding (actions, spatiotemporal information, causality and "
             "abnormality cues)";
    case LayerId::Criminal:
      return "anomaly classification (predefined anomaly-focused questions)";
  }
  return "";
}

std::string_view layer_seed_question(LayerId layer) {
  switch (layer) {
    case LayerId::Scenario:
      return "Describe the scene: where is this taking place, what time of day does it "
             "appear to be, and which objects are visible?";
    case LayerId::Entity:
      return "Who appears in the video? Describe how the people are grouped, their "
             "apparent demographics and their clothing.";
    case LayerId::Social:
      return "How are the people positioned relative to each other, what gestures do "
             "they make, and what social roles do they seem to have?";
    case LayerId::Event:
      return "What actions happen in the video, when and where do they occur, what "
             "causes them, and is anything out of the ordinary?";
    case LayerId::Criminal:
      return "";
  }
  return "";
}

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::L1: return "l1";
    case Variant::L2: return "l2";
    case Variant::L3: return "l3";
    case Variant::L4: return "l4";
    case Variant::Joint: return "joint";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view text) {
  const auto t = lower(text);
  if (t == "l1") return Variant::L1;
  if (t == "l2") return Variant::L2;
  if (t == "l3") return Variant::L3;
  if (t == "l4") return Variant::L4;
  if (t == "joint") return Variant::Joint;
  return std::nullopt;
}

std::vector<LayerId> exploration_layers(Variant variant) {
  switch (variant) {
    case Variant::L1: return {LayerId::Scenario};
    case Variant::L2: return {LayerId::Entity};
    case Variant::L3: return {LayerId::Social};
    case Variant::L4: return {LayerId::Event};
    case Variant::Joint:
      return {LayerId::Scenario, LayerId::Entity, LayerId::Social, LayerId::Event};
  }
  return {};
}

}  // namespace coat
