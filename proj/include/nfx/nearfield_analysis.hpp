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

#include <functional>
#include <limits>
#include <optional>

namespace nfx {

struct Direction {
  double azimuth = 0.0;
  double elevation = kPi / 2.0;
};

enum class RayleighBranch { general_max, normal_closed_form, side_closed_form };

struct RayleighReport {
  Direction direction;
  double theoretical = 0.0;
  std::optional<double> effective;
  RayleighBranch branch = RayleighBranch::general_max;
};

/// 8 max_m (|p_m|^2 - (u.p_m)^2) / lambda: the range at which the largest
/// second-order phase term over the aperture equals pi/8. Valid for every
/// variant, including modular arrays.
double rayleigh_general_max(const ArrayLayout& layout, const Direction& dir);

/// (2/lambda) (D_n^2 + ((M_v-1) d)^2) with projected aperture D_n = 2R sin(theta/2).
double rayleigh_normal_closed_form(const ArrayLayout& layout);

/// (2/lambda) (D_s^2 + ((M_v-1) d)^2) with projected aperture D_s = 2R (1 - cos(theta/2)).
double rayleigh_side_closed_form(const ArrayLayout& layout);

/// Theoretical Rayleigh distance, dispatching to the closed forms for the
/// normal (azimuth 0) and side (azimuth +-pi/2) directions in the horizontal
/// plane and to the general maximum otherwise.
RayleighReport theoretical_rayleigh(const ArrayLayout& layout, const Direction& dir);

/// 0.5 * integral of r_ray(phi)^2 over [lo, hi] by composite Simpson.
/// `intervals` is rounded up to the next even number.
double near_field_area(const ArrayLayout& layout, double azimuth_lo = -kPi / 2, double azimuth_hi = kPi / 2,
                       int intervals = 1024);
double near_field_area(const std::function<double(double)>& rayleigh_of_azimuth, double azimuth_lo,
                       double azimuth_hi, int intervals = 1024);

enum class GainBranch { exact, second_order };

struct GainQuery {
  double r1 = 1.0;
  double r2 = std::numeric_limits<double>::infinity();
  Direction direction;
};

/// |a^H(r1) a(r2)| with unit-norm near-field steering vectors. r = +inf
/// selects the planar-wave steering vector.
double beamfocusing_gain(const ArrayLayout& layout, const GainQuery& query, GainBranch branch = GainBranch::exact);

struct EffectiveRayleighOptions {
  double threshold = 0.95;
  /// Scan bounds; non-positive values select defaults (one wavelength and
  /// 100x the flat-aperture Rayleigh distance).
  double r_min = 0.0;
  double r_max = 0.0;
  int scan_points = 2048;
  double relative_tolerance = 1e-4;
  GainBranch branch = GainBranch::exact;
};

class EffectiveRayleighNotFound : public NotFound {
 public:
  EffectiveRayleighNotFound(double r_min, double r_max);
  double r_min;
  double r_max;
};

/// Range at which the planar-wave beam first loses `threshold` of the matched
/// gain when scanning from far to near.
double effective_rayleigh(const ArrayLayout& layout, const Direction& dir, const EffectiveRayleighOptions& opt = {});

/// beta = k (R^2 / (2 r1) - R^2 / (2 r2)) for the curved-array gain expansion.
double jacobi_anger_beta(const ArrayLayout& layout, double r1, double r2);

/// Doubly truncated Bessel-series evaluation (orders -N..N) of the
/// second-order beamfocusing gain of a uniform curved array.
double jacobi_anger_gain(double beta, double azimuth, int element_count, double theta, int truncation_order);

}  // namespace nfx
