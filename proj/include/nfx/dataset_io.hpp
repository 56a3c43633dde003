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

#include "nfx/channel.hpp"
#include "nfx/pilot.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nfx {

// Binary containers shared with the offline trainer. All multi-byte fields
// are little-endian; channel samples are float32. docs/formats.md has the
// byte layouts.

struct Dataset {
  ArrayLayout layout;
  std::vector<ChannelRealization> records;
};

/// Writes an NFDS1 file plus a `<path>.json` manifest sidecar.
void export_dataset(const std::string& path, const ArrayLayout& layout,
                    const std::vector<ChannelRealization>& records);
Dataset import_dataset(const std::string& path);

/// NFMI1 container of whitened measurement instances.
void write_measurements(const std::string& path, const std::vector<MeasurementInstance>& instances);
std::vector<MeasurementInstance> read_measurements(const std::string& path);

struct Prediction {
  std::uint64_t instance_id = 0;
  CVec h;
};

/// NFPR1 container of channel predictions keyed by instance id.
void write_predictions(const std::string& path, int antenna_count, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions(const std::string& path);

}  // namespace nfx
