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

#include "nfx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nfx {

CarrierConfig CarrierConfig::from_frequency(double frequency_hz, double spacing_in_wavelengths) {
  CarrierConfig c;
  c.frequency_hz = frequency_hz;
  c.wavelength = kSpeedOfLight / frequency_hz;
  c.spacing = spacing_in_wavelengths * c.wavelength;
  c.validate();
  return c;
}

void CarrierConfig::validate() const {
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) throw ConfigError("carrier frequency must be > 0");
  if (!(wavelength > 0.0)) throw ConfigError("wavelength must be > 0");
  if (!(spacing > 0.0)) throw ConfigError("element spacing must be > 0");
}

std::string to_string(ArrayVariant v) {
  switch (v) {
    case ArrayVariant::ula: return "ula";
    case ArrayVariant::upa: return "upa";
    case ArrayVariant::uniform_curved: return "uniform_curved";
    case ArrayVariant::uniform_cylindrical: return "uniform_cylindrical";
    case ArrayVariant::modular_cylindrical: return "modular_cylindrical";
  }
  return "unknown";
}

ArrayVariant array_variant_from_string(const std::string& s) {
  if (s == "ula") return ArrayVariant::ula;
  if (s == "upa") return ArrayVariant::upa;
  if (s == "uniform_curved") return ArrayVariant::uniform_curved;
  if (s == "uniform_cylindrical") return ArrayVariant::uniform_cylindrical;
  if (s == "modular_cylindrical") return ArrayVariant::modular_cylindrical;
  throw ConfigError("unknown array variant '" + s + "'");
}

ArrayLayout ArrayLayout::ula(int m, const CarrierConfig& c) {
  ArrayLayout l;
  l.variant = ArrayVariant::ula;
  l.horizontal_count = m;
  l.tile_spacing = m;
  l.carrier = c;
  l.validate();
  return l;
}

ArrayLayout ArrayLayout::upa(int m_h, int m_v, const CarrierConfig& c) {
  ArrayLayout l;
  l.variant = ArrayVariant::upa;
  l.horizontal_count = m_h;
  l.vertical_count = m_v;
  l.tile_spacing = m_h;
  l.carrier = c;
  l.validate();
  return l;
}

ArrayLayout ArrayLayout::uniform_curved(int m, double theta, const CarrierConfig& c) {
  ArrayLayout l;
  l.variant = ArrayVariant::uniform_curved;
  l.horizontal_count = m;
  l.theta = theta;
  l.tile_spacing = m;
  l.carrier = c;
  l.validate();
  return l;
}

ArrayLayout ArrayLayout::uniform_cylindrical(int m_h, int m_v, double theta, const CarrierConfig& c) {
  ArrayLayout l;
  l.variant = ArrayVariant::uniform_cylindrical;
  l.horizontal_count = m_h;
  l.vertical_count = m_v;
  l.theta = theta;
  l.tile_spacing = m_h;
  l.carrier = c;
  l.validate();
  return l;
}

ArrayLayout ArrayLayout::modular_cylindrical(int m_h, int m_v, double theta, int tiles, double tile_spacing,
                                             const CarrierConfig& c) {
  ArrayLayout l;
  l.variant = ArrayVariant::modular_cylindrical;
  l.horizontal_count = m_h;
  l.vertical_count = m_v;
  l.theta = theta;
  l.tiles = tiles;
  l.tile_spacing = tile_spacing;
  l.carrier = c;
  l.validate();
  return l;
}

double ArrayLayout::horizontal_length() const {
  const double span = (tiles - 1) * tile_spacing + static_cast<double>(per_tile()) - 1.0;
  return span * carrier.spacing;
}

double ArrayLayout::vertical_length() const { return (vertical_count - 1) * carrier.spacing; }

double ArrayLayout::radius() const {
  if (theta == 0.0) return std::numeric_limits<double>::infinity();
  return horizontal_length() / theta;
}

double ArrayLayout::element_gain_at(int m) const {
  return element_gain.empty() ? 1.0 : element_gain[static_cast<std::size_t>(m)];
}

void ArrayLayout::validate() const {
  carrier.validate();
  if (horizontal_count < 1 || vertical_count < 1) throw ConfigError("array must have at least one element");
  if (!(theta >= 0.0 && theta <= kPi)) throw ConfigError("curvature angle must lie in [0, pi]");
  switch (variant) {
    case ArrayVariant::ula:
      if (vertical_count != 1 || theta != 0.0 || tiles != 1) throw ConfigError("ula requires M_v = 1, theta = 0, I = 1");
      break;
    case ArrayVariant::upa:
      if (theta != 0.0 || tiles != 1) throw ConfigError("upa requires theta = 0 and I = 1");
      break;
    case ArrayVariant::uniform_curved:
      if (vertical_count != 1 || tiles != 1) throw ConfigError("uniform_curved requires M_v = 1 and I = 1");
      break;
    case ArrayVariant::uniform_cylindrical:
      if (tiles != 1) throw ConfigError("uniform_cylindrical requires I = 1");
      break;
    case ArrayVariant::modular_cylindrical:
      if (tiles < 1) throw ConfigError("tile count I must be a positive integer");
      if (horizontal_count % tiles != 0)
        throw ConfigError("tile count I = " + std::to_string(tiles) + " must divide M_h = " +
                          std::to_string(horizontal_count));
      if (tile_spacing < static_cast<double>(horizontal_count / tiles))
        throw ConfigError("tile spacing S must be >= M_h / I so tiles do not overlap");
      break;
  }
  if (!element_gain.empty()) {
    if (static_cast<int>(element_gain.size()) != size()) throw ConfigError("element gain table must have M entries");
    for (double g : element_gain)
      if (!(g >= 0.0)) throw ConfigError("element gains must be non-negative");
  }
}

SourcePoint SourcePoint::from_cartesian(const Vec3& u) {
  SourcePoint s;
  s.r = u.norm();
  if (s.r == 0.0) throw DegenerateGeometry("source at the array origin");
  s.azimuth = std::atan2(u.y(), u.x());
  s.elevation = std::acos(std::clamp(u.z() / s.r, -1.0, 1.0));
  return s;
}

Vec3 SourcePoint::direction() const {
  const double se = std::sin(elevation);
  return {se * std::cos(azimuth), se * std::sin(azimuth), std::cos(elevation)};
}

std::vector<AntennaIndex> antenna_indices(const ArrayLayout& layout) {
  const int per_tile = layout.per_tile();
  std::vector<AntennaIndex> out;
  out.reserve(static_cast<std::size_t>(layout.size()));
  for (int v = 0; v < layout.vertical_count; ++v) {
    for (int t = 0; t < layout.tiles; ++t) {
      for (int h = 0; h < per_tile; ++h) {
        AntennaIndex idx;
        idx.vertical = v - (layout.vertical_count - 1) / 2.0;
        idx.tile = t - (layout.tiles - 1) / 2.0;
        idx.horizontal = h - (per_tile - 1) / 2.0;
        out.push_back(idx);
      }
    }
  }
  return out;
}

namespace {

// Arc coordinate of an element along its row, in units of d.
double arc_units(const ArrayLayout& layout, const AntennaIndex& idx) {
  return idx.tile * layout.tile_spacing + idx.horizontal;
}

double arc_span_units(const ArrayLayout& layout) {
  return (layout.tiles - 1) * layout.tile_spacing + layout.per_tile() - 1.0;
}

}  // namespace

std::vector<double> element_arc_angles(const ArrayLayout& layout) {
  const auto idx = antenna_indices(layout);
  const double span = arc_span_units(layout);
  std::vector<double> out(idx.size(), 0.0);
  if (layout.theta == 0.0 || span == 0.0) return out;
  for (std::size_t m = 0; m < idx.size(); ++m) out[m] = layout.theta * arc_units(layout, idx[m]) / span;
  return out;
}

Eigen::Matrix3Xd antenna_positions(const ArrayLayout& layout) {
  layout.validate();
  const auto idx = antenna_indices(layout);
  const double d = layout.carrier.spacing;
  const double span = arc_span_units(layout);
  Eigen::Matrix3Xd p(3, static_cast<Eigen::Index>(idx.size()));
  const bool flat = layout.theta == 0.0 || span == 0.0;
  const double radius = flat ? 0.0 : layout.horizontal_length() / layout.theta;
  for (std::size_t m = 0; m < idx.size(); ++m) {
    const double s = arc_units(layout, idx[m]);
    const double z = idx[m].vertical * d;
    const auto col = static_cast<Eigen::Index>(m);
    if (flat) {
      p.col(col) << 0.0, s * d, z;
    } else {
      const double angle = layout.theta * s / span;
      const double half = std::sin(angle / 2.0);
      // R (cos a - 1) written as -2 R sin^2(a/2) to avoid cancellation at small theta.
      p.col(col) << -2.0 * radius * half * half, radius * std::sin(angle), z;
    }
  }
  return p;
}

RVec element_distance(const ArrayLayout& layout, const SourcePoint& source, DistanceOrder order) {
  if (!(source.r > 0.0)) throw ContractViolation("source range must be > 0");
  if (order != DistanceOrder::exact && layout.is_modular())
    throw UnsupportedVariant("Taylor-approximated distances are not defined for modular_cylindrical layouts");
  const Eigen::Matrix3Xd p = antenna_positions(layout);
  const Vec3 dir = source.direction();
  const Eigen::Index n = p.cols();
  RVec out(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double proj = dir.dot(p.col(m));
    const double norm2 = p.col(m).squaredNorm();
    switch (order) {
      case DistanceOrder::exact: out(m) = (source.r * dir - p.col(m)).norm(); break;
      case DistanceOrder::far_field: out(m) = source.r - proj; break;
      case DistanceOrder::near_field: out(m) = source.r - proj + (norm2 - proj * proj) / (2.0 * source.r); break;
    }
  }
  return out;
}

double taylor_phase_error(const ArrayLayout& layout, const SourcePoint& source) {
  if (layout.is_modular()) throw UnsupportedVariant("taylor_phase_error requires a non-modular layout");
  if (!(source.r > 0.0)) throw ContractViolation("source range must be > 0");
  // near_field - far_field is the second-order term alone; evaluate it directly.
  const Eigen::Matrix3Xd p = antenna_positions(layout);
  const Vec3 dir = source.direction();
  double worst = 0.0;
  for (Eigen::Index m = 0; m < p.cols(); ++m) {
    const double proj = dir.dot(p.col(m));
    worst = std::max(worst, p.col(m).squaredNorm() - proj * proj);
  }
  return layout.carrier.wavenumber() * worst / (2.0 * source.r);
}

}  // namespace nfx
