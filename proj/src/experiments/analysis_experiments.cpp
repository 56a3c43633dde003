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

#include "internal.hpp"

#include "nfx/nearfield_analysis.hpp"

#include <cmath>

namespace nfx::experiments {

namespace {

std::optional<double> try_effective(const ArrayLayout& layout, const Direction& dir, double threshold) {
  EffectiveRayleighOptions opt;
  opt.threshold = threshold;
  try {
    return effective_rayleigh(layout, dir, opt);
  } catch (const NotFound&) {
    return std::nullopt;
  }
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

void run_rayleigh_vs_theta(Context& ctx) {
  const auto& p = ctx.section("rayleigh_vs_theta");
  const int m = p.at("antennas").get<int>();
  const bool effective = p.at("effective").get<bool>();
  const double threshold = p.at("threshold").get<double>();
  const CarrierConfig carrier = carrier_from(ctx.cfg);
  const auto thetas = theta_grid(p.at("theta_points").get<int>(), false);
  const double ula = rayleigh_normal_closed_form(ArrayLayout::ula(m, carrier));

  struct Row {
    double normal, side;
    std::optional<double> eff_normal, eff_side;
  };
  std::vector<Row> rows(thetas.size());
  parallel_for(thetas.size(), ctx.threads, [&](std::size_t i) {
    const auto layout = ArrayLayout::uniform_curved(m, thetas[i], carrier);
    Row r;
    r.normal = theoretical_rayleigh(layout, Direction{0.0}).theoretical;
    r.side = theoretical_rayleigh(layout, Direction{kPi / 2.0}).theoretical;
    if (effective) {
      r.eff_normal = try_effective(layout, Direction{0.0}, threshold);
      r.eff_side = try_effective(layout, Direction{kPi / 2.0}, threshold);
    }
    rows[i] = r;
  });

  CsvTable t{{"theta_rad", "normal_theoretical_m", "side_theoretical_m", "normal_effective_m", "side_effective_m",
              "ula_rayleigh_m"},
             {}};
  bool normal_dec = true, side_inc = true;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    t.add({num(thetas[i]), num(rows[i].normal), num(rows[i].side), opt_num(rows[i].eff_normal),
           opt_num(rows[i].eff_side), num(ula)});
    if (i > 0) {
      normal_dec = normal_dec && rows[i].normal < rows[i - 1].normal;
      side_inc = side_inc && rows[i].side > rows[i - 1].side;
    }
  }
  ctx.write("rayleigh_vs_theta.csv", t);
  ctx.summary["normal_strictly_decreasing"] = normal_dec;
  ctx.summary["side_strictly_increasing"] = side_inc;
  ctx.summary["ula_rayleigh_m"] = ula;
}

void run_nearfield_area(Context& ctx) {
  const auto& p = ctx.section("nearfield_area");
  const int m = p.at("antennas").get<int>();
  const int quad = p.at("quadrature_points").get<int>();
  const CarrierConfig carrier = carrier_from(ctx.cfg);
  const auto thetas = theta_grid(p.at("theta_points").get<int>(), true);

  std::vector<double> area(thetas.size());
  parallel_for(thetas.size(), ctx.threads, [&](std::size_t i) {
    area[i] = near_field_area(ArrayLayout::uniform_curved(m, thetas[i], carrier), -kPi / 2.0, kPi / 2.0, quad);
  });
  CsvTable t{{"theta_rad", "area_m2"}, {}};
  std::size_t best = 0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    t.add({num(thetas[i]), num(area[i])});
    if (area[i] > area[best]) best = i;
  }
  ctx.write("nearfield_area.csv", t);
  ctx.summary["argmax_theta_rad"] = thetas[best];
  ctx.summary["max_area_m2"] = area[best];
  ctx.summary["interior_maximum"] = best > 0 && best + 1 < thetas.size();

  const int az_points = std::max(2, p.at("azimuth_points").get<int>());
  CsvTable curves{{"theta_rad", "azimuth_rad", "rayleigh_m"}, {}};
  for (double theta : {0.0, kPi / 4.0, kPi / 2.0, 3.0 * kPi / 4.0, kPi}) {
    const auto layout = ArrayLayout::uniform_curved(m, theta, carrier);
    for (int j = 0; j < az_points; ++j) {
      const double phi = -kPi / 2.0 + kPi * j / (az_points - 1);
      curves.add({num(theta), num(phi), num(theoretical_rayleigh(layout, Direction{phi}).theoretical)});
    }
  }
  ctx.write("rayleigh_vs_azimuth.csv", curves);
}

void run_boundary_cloud_3d(Context& ctx) {
  const auto& p = ctx.section("boundary_cloud_3d");
  const int na = std::max(2, p.at("azimuth_points").get<int>());
  const int ne = std::max(1, p.at("elevation_points").get<int>());
  const ArrayLayout layout = base_layout(ctx);
  CsvTable t{{"azimuth_rad", "elevation_rad", "rayleigh_m", "x_m", "y_m", "z_m"}, {}};
  for (int e = 0; e < ne; ++e) {
    const double elevation = kPi * (e + 1) / (ne + 1);
    for (int a = 0; a < na; ++a) {
      const double azimuth = -kPi / 2.0 + kPi * a / (na - 1);
      const double r = rayleigh_general_max(layout, Direction{azimuth, elevation});
      const Vec3 u = SourcePoint{r, azimuth, elevation}.cartesian();
      t.add({num(azimuth), num(elevation), num(r), num(u.x()), num(u.y()), num(u.z())});
    }
  }
  ctx.write("boundary_cloud_3d.csv", t);
  ctx.summary["layout"] = to_string(layout.variant);
  ctx.summary["points"] = na * ne;
}

}  // namespace nfx::experiments
