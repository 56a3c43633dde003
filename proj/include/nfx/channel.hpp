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

#include "nfx/geometry.hpp"

#include <vector>

namespace nfx {

/// Per-path visibility over `bits.size()` contiguous antenna blocks (storage
/// order). A block of M / bits.size() elements is either fully seen or not.
struct VisibilityMask {
  std::vector<bool> bits;

  static VisibilityMask all_visible(int subarray_count) { return {std::vector<bool>(subarray_count, true)}; }
  int subarray_count() const { return static_cast<int>(bits.size()); }
  /// 0/1 vector of length m. Throws ConfigError when the block count does not divide m.
  RVec expand(int m) const;
  bool any() const;
};

struct Scatterer {
  Vec3 position = Vec3::Zero();
  double extra_gain = 1.0;  // A
  cplx alpha{1.0, 0.0};     // small-scale fading
};

/// visibility[0] belongs to the LoS path, visibility[l + 1] to scatterers[l].
struct Scene {
  SourcePoint user;
  std::vector<Scatterer> scatterers;
  std::vector<VisibilityMask> visibility;

  void validate(int m) const;
};

struct ChannelRealization {
  CVec h;
  Scene scene;
};

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
};

struct SceneConfig {
  Box user_box{{5.0, -50.0, 0.0}, {50.0, 50.0, 4.0}};
  std::vector<Box> scatterer_boxes = default_scatterer_boxes();
  int min_scatterers = 1;
  int max_scatterers = 3;
  double visibility_probability = 0.8;
  bool mask_los = true;
  /// Antennas per visibility block (a 6 x 4 subarray by default).
  int visibility_block = 24;
  double extra_gain = 1.0;

  static std::vector<Box> default_scatterer_boxes();
  void validate() const;
};

CVec los_channel(const ArrayLayout& layout, const SourcePoint& user);

/// Two-hop path: per-antenna spherical term from the scatterer times the
/// scalar user-to-scatterer factor exp(-j k r_us) / r_us.
CVec nlos_component(const ArrayLayout& layout, const SourcePoint& user, const Scatterer& scatterer);

CVec apply_visibility(const CVec& h, const VisibilityMask& mask);

ChannelRealization assemble_channel(const ArrayLayout& layout, const Scene& scene);

Scene sample_scene(const SceneConfig& cfg, int antenna_count, Rng& rng);

}  // namespace nfx
