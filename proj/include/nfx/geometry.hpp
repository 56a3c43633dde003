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

#include "nfx/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nfx {

/// Carrier and element spacing. Spacing defaults to half a wavelength.
struct CarrierConfig {
  double frequency_hz = 6.8e9;
  double wavelength = kSpeedOfLight / 6.8e9;
  double spacing = kSpeedOfLight / 6.8e9 / 2.0;

  static CarrierConfig from_frequency(double frequency_hz, double spacing_in_wavelengths = 0.5);
  double wavenumber() const { return 2.0 * kPi / wavelength; }
  void validate() const;
};

enum class ArrayVariant : std::uint8_t {
  ula = 0,
  upa = 1,
  uniform_curved = 2,
  uniform_cylindrical = 3,
  modular_cylindrical = 4,
};

std::string to_string(ArrayVariant v);
ArrayVariant array_variant_from_string(const std::string& s);

/// Declarative antenna placement. Linear and curved 2-D arrays use
/// horizontal_count = M and vertical_count = 1. Non-modular layouts carry
/// tiles = 1 and tile_spacing = horizontal_count.
struct ArrayLayout {
  ArrayVariant variant = ArrayVariant::ula;
  int horizontal_count = 1;  // M_h
  int vertical_count = 1;    // M_v
  double theta = 0.0;        // curvature angle, radians
  int tiles = 1;             // I
  double tile_spacing = 1.0; // S, in units of the element spacing
  CarrierConfig carrier;
  /// Optional per-element power gain U_m. Empty means isotropic (U_m = 1).
  std::vector<double> element_gain;

  static ArrayLayout ula(int m, const CarrierConfig& c = {});
  static ArrayLayout upa(int m_h, int m_v, const CarrierConfig& c = {});
  static ArrayLayout uniform_curved(int m, double theta, const CarrierConfig& c = {});
  static ArrayLayout uniform_cylindrical(int m_h, int m_v, double theta, const CarrierConfig& c = {});
  static ArrayLayout modular_cylindrical(int m_h, int m_v, double theta, int tiles, double tile_spacing,
                                         const CarrierConfig& c = {});

  int size() const { return horizontal_count * vertical_count; }
  int per_tile() const { return horizontal_count / tiles; }
  bool is_modular() const { return variant == ArrayVariant::modular_cylindrical; }
  bool is_planar_2d() const { return variant == ArrayVariant::ula || variant == ArrayVariant::uniform_curved; }
  /// Horizontal arc length L (2-D) or L_h (cylindrical / modular), meters.
  double horizontal_length() const;
  /// Vertical extent (M_v - 1) d, meters.
  double vertical_length() const;
  /// Arc radius L/theta; +inf for flat layouts.
  double radius() const;
  double element_gain_at(int m) const;

  /// Throws ConfigError when any invariant is violated.
  void validate() const;
};

/// Signed half-integer indices of one element.
struct AntennaIndex {
  double tile = 0.0;
  double horizontal = 0.0;
  double vertical = 0.0;
};

/// Source location relative to the array centre.
struct SourcePoint {
  double r = 1.0;
  double azimuth = 0.0;
  double elevation = kPi / 2.0;

  static SourcePoint planar(double r, double azimuth) { return {r, azimuth, kPi / 2.0}; }
  static SourcePoint from_cartesian(const Vec3& u);
  Vec3 direction() const;
  Vec3 cartesian() const { return r * direction(); }
};

enum class DistanceOrder { exact, far_field, near_field };

/// Element indices in storage order: vertical row outermost, then tile, then
/// the element within the tile. Horizontal positions along a row are
/// therefore monotone in arc angle.
std::vector<AntennaIndex> antenna_indices(const ArrayLayout& layout);

/// Arc angle of every element along its row, in storage order.
std::vector<double> element_arc_angles(const ArrayLayout& layout);

/// Element positions (3 x M), storage order as antenna_indices.
Eigen::Matrix3Xd antenna_positions(const ArrayLayout& layout);

RVec element_distance(const ArrayLayout& layout, const SourcePoint& source, DistanceOrder order);

/// max_m (2 pi / lambda) (near_field - far_field), radians.
double taylor_phase_error(const ArrayLayout& layout, const SourcePoint& source);

}  // namespace nfx
