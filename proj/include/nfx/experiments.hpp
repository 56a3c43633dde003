// SPDX-License-Identifier: Apache-2.0
//
// nfx: near-field XL-MIMO channel modelling, estimation and precoding
// Copyright (C) 2026 The nfx authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "nfx/dataset_io.hpp"
#include "nfx/estimator.hpp"
#include "nfx/geometry.hpp"
#include "nfx/channel.hpp"
#include "nfx/pilot.hpp"
#include "nfx/precoder.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace nfx::experiments {

using Json = nlohmann::ordered_json;

/// Complete default configuration. It doubles as the schema: keys absent
/// here are rejected, and value types must match.
Json default_config();

struct Validation {
  Json config;                           // defaults merged with the input
  std::vector<std::string> diagnostics;  // "path: message"
  bool ok() const { return diagnostics.empty(); }
};

/// Pure validation of config text. An empty text yields the defaults.
Validation validate_config(const std::string& text, const std::vector<std::string>& overrides = {});

/// Applies "dotted.path=value"; the value is parsed as JSON, falling back to a string.
void apply_override(Json& cfg, const std::string& assignment);

// Typed views of a validated config. Module validation failures surface as
// ConfigError prefixed with the offending field path.
CarrierConfig carrier_from(const Json& cfg);
ArrayLayout layout_from(const Json& node, const CarrierConfig& carrier, const std::string& path = "layout");
PilotConfig pilot_from(const Json& cfg);
SceneConfig scene_from(const Json& cfg);
SolverConfig solver_from(const Json& cfg);
WmmseOptions wmmse_from(const Json& cfg);

struct ExperimentInfo {
  std::string name;
  std::string description;
};

const std::vector<ExperimentInfo>& list_experiments();

/// Runs the experiment named in the config, writes CSVs and manifest.json to
/// the output directory and returns the manifest.
Json run(const Json& cfg);

}  // namespace nfx::experiments
