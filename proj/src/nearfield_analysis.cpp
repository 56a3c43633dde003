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

#include "nfx/nearfield_analysis.hpp"

#include "nfx/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nfx {

namespace {

constexpr double kDirectionTol = 1e-12;

double vertical_term(const ArrayLayout& layout) {
  const double v = layout.vertical_length();
  return v * v;
}

bool in_horizontal_plane(const Direction& dir) { return std::abs(dir.elevation - kPi / 2.0) < kDirectionTol; }

// Phase kappa * (r^(m) - r) of every element, with r = inf meaning the
// planar-wave limit. The constant r is dropped since it cancels in |a^H a|.
RVec relative_phase(const Eigen::Matrix3Xd& p, const Vec3& dir, double r, double kappa, GainBranch branch) {
  RVec out(p.cols());
  for (Eigen::Index m = 0; m < p.cols(); ++m) {
    const double proj = dir.dot(p.col(m));
    const double norm2 = p.col(m).squaredNorm();
    double delta;
    if (std::isinf(r)) {
      delta = -proj;
    } else if (branch == GainBranch::second_order) {
      delta = -proj + (norm2 - proj * proj) / (2.0 * r);
    } else {
      const double dist = (r * dir - p.col(m)).norm();
      delta = (norm2 - 2.0 * r * proj) / (dist + r);
    }
    out(m) = kappa * delta;
  }
  return out;
}

cplx j_power(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

double rayleigh_general_max(const ArrayLayout& layout, const Direction& dir) {
  const Eigen::Matrix3Xd p = antenna_positions(layout);
  const Vec3 u = SourcePoint{1.0, dir.azimuth, dir.elevation}.direction();
  double worst = 0.0;
  for (Eigen::Index m = 0; m < p.cols(); ++m) {
    const double proj = u.dot(p.col(m));
    worst = std::max(worst, p.col(m).squaredNorm() - proj * proj);
  }
  return 8.0 * worst / layout.carrier.wavelength;
}

double rayleigh_normal_closed_form(const ArrayLayout& layout) {
  layout.validate();
  const double aperture =
      layout.theta == 0.0 ? layout.horizontal_length() : 2.0 * layout.radius() * std::sin(layout.theta / 2.0);
  return 2.0 / layout.carrier.wavelength * (aperture * aperture + vertical_term(layout));
}

double rayleigh_side_closed_form(const ArrayLayout& layout) {
  layout.validate();
  double aperture = 0.0;
  if (layout.theta > 0.0) {
    const double s = std::sin(layout.theta / 4.0);
    aperture = 4.0 * layout.radius() * s * s;  // 2R (1 - cos(theta/2))
  }
  return 2.0 / layout.carrier.wavelength * (aperture * aperture + vertical_term(layout));
}

RayleighReport theoretical_rayleigh(const ArrayLayout& layout, const Direction& dir) {
  RayleighReport rep;
  rep.direction = dir;
  if (in_horizontal_plane(dir) && std::abs(dir.azimuth) < kDirectionTol) {
    rep.branch = RayleighBranch::normal_closed_form;
    rep.theoretical = rayleigh_normal_closed_form(layout);
  } else if (in_horizontal_plane(dir) && std::abs(std::abs(dir.azimuth) - kPi / 2.0) < kDirectionTol) {
    rep.branch = RayleighBranch::side_closed_form;
    rep.theoretical = rayleigh_side_closed_form(layout);
  } else {
    rep.branch = RayleighBranch::general_max;
    rep.theoretical = rayleigh_general_max(layout, dir);
  }
  return rep;
}

double near_field_area(const std::function<double(double)>& rayleigh_of_azimuth, double azimuth_lo,
                       double azimuth_hi, int intervals) {
  if (azimuth_hi <= azimuth_lo) return 0.0;
  const int n = std::max(2, intervals + (intervals % 2));
  const double h = (azimuth_hi - azimuth_lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = rayleigh_of_azimuth(azimuth_lo + i * h);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * r * r;
  }
  return 0.5 * acc * h / 3.0;
}

double near_field_area(const ArrayLayout& layout, double azimuth_lo, double azimuth_hi, int intervals) {
  if (azimuth_lo < -kPi / 2.0 - kDirectionTol || azimuth_hi > kPi / 2.0 + kDirectionTol)
    throw ContractViolation("near-field area azimuth range must lie within [-pi/2, pi/2]");
  // The closed-form branches agree with the general maximum, so the integrand
  // uses the general expression throughout.
  return near_field_area([&](double phi) { return rayleigh_general_max(layout, Direction{phi}); }, azimuth_lo,
                         azimuth_hi, intervals);
}

double beamfocusing_gain(const ArrayLayout& layout, const GainQuery& query, GainBranch branch) {
  if (!(query.r1 > 0.0) || !(query.r2 > 0.0)) throw ContractViolation("gain ranges must be > 0");
  if (branch == GainBranch::second_order && layout.is_modular())
    throw UnsupportedVariant("second-order gain is not defined for modular_cylindrical layouts");
  const Eigen::Matrix3Xd p = antenna_positions(layout);
  const Vec3 dir = SourcePoint{1.0, query.direction.azimuth, query.direction.elevation}.direction();
  const double kappa = layout.carrier.wavenumber();
  const RVec ph1 = relative_phase(p, dir, query.r1, kappa, branch);
  const RVec ph2 = relative_phase(p, dir, query.r2, kappa, branch);
  cplx acc{0.0, 0.0};
  for (Eigen::Index m = 0; m < p.cols(); ++m) acc += std::polar(1.0, ph1(m) - ph2(m));
  return std::min(1.0, std::abs(acc) / static_cast<double>(p.cols()));
}

EffectiveRayleighNotFound::EffectiveRayleighNotFound(double lo, double hi)
    : NotFound("effective Rayleigh threshold never exceeded within scan bounds [" + std::to_string(lo) + ", " +
               std::to_string(hi) + "] m"),
      r_min(lo),
      r_max(hi) {}

double effective_rayleigh(const ArrayLayout& layout, const Direction& dir, const EffectiveRayleighOptions& opt) {
  if (!(opt.threshold > 0.0 && opt.threshold < 1.0)) throw ContractViolation("threshold must lie in (0, 1)");
  const double flat_aperture2 = layout.horizontal_length() * layout.horizontal_length() + vertical_term(layout);
  const double r_min = opt.r_min > 0.0 ? opt.r_min : layout.carrier.wavelength;
  const double r_max = opt.r_max > 0.0 ? opt.r_max : std::max(100.0 * 2.0 * flat_aperture2 / layout.carrier.wavelength,
                                                               10.0 * r_min);
  if (r_max <= r_min) throw ContractViolation("effective Rayleigh scan requires r_min < r_max");
  const int n = std::max(2, opt.scan_points);

  auto gain = [&](double r) {
    return beamfocusing_gain(layout, GainQuery{r, std::numeric_limits<double>::infinity(), dir}, opt.branch);
  };
  const double log_lo = std::log(r_min);
  const double log_hi = std::log(r_max);
  auto grid = [&](int i) { return std::exp(log_hi - (log_hi - log_lo) * i / (n - 1)); };

  if (gain(r_max) <= opt.threshold) throw EffectiveRayleighNotFound(r_min, r_max);
  double above = r_max;  // last range with gain > threshold
  int i = 1;
  for (; i < n; ++i) {
    const double r = grid(i);
    if (gain(r) <= opt.threshold) break;
    above = r;
  }
  if (i == n) return r_min;
  double below = grid(i);
  while ((above - below) / above > opt.relative_tolerance) {
    const double mid = std::sqrt(above * below);
    if (gain(mid) > opt.threshold)
      above = mid;
    else
      below = mid;
  }
  return above;
}

double jacobi_anger_beta(const ArrayLayout& layout, double r1, double r2) {
  const double radius = layout.radius();
  if (std::isinf(radius)) return 0.0;
  const double inv1 = std::isinf(r1) ? 0.0 : 1.0 / (2.0 * r1);
  const double inv2 = std::isinf(r2) ? 0.0 : 1.0 / (2.0 * r2);
  return layout.carrier.wavenumber() * radius * radius * (inv1 - inv2);
}

double jacobi_anger_gain(double beta, double azimuth, int element_count, double theta, int truncation_order) {
  if (truncation_order < 1) throw ContractViolation("truncation order must be >= 1");
  if (element_count < 1) throw ContractViolation("element count must be >= 1");
  const int n_max = truncation_order;
  const auto ja = bessel_j_sequence(n_max, -beta / 2.0);
  const auto jb = bessel_j_sequence(n_max, 2.0 * std::sin(azimuth) * beta);
  auto jn = [](const std::vector<double>& seq, int n) {
    const double v = seq[static_cast<std::size_t>(std::abs(n))];
    return (n < 0 && (std::abs(n) % 2 == 1)) ? -v : v;
  };

  // Array factor S(q) = (1/M) sum_m exp(j q theta_m) for q = 2 n1 - n2.
  const int q_max = 3 * n_max;
  std::vector<cplx> array_factor(static_cast<std::size_t>(2 * q_max + 1));
  for (int q = -q_max; q <= q_max; ++q) {
    cplx acc{0.0, 0.0};
    for (int m = 0; m < element_count; ++m) {
      const double idx = m - (element_count - 1) / 2.0;
      const double angle = element_count > 1 ? idx * theta / (element_count - 1) : 0.0;
      acc += std::polar(1.0, q * angle);
    }
    array_factor[static_cast<std::size_t>(q + q_max)] = acc / static_cast<double>(element_count);
  }

  cplx total{0.0, 0.0};
  for (int n1 = -n_max; n1 <= n_max; ++n1) {
    const double a = jn(ja, n1);
    if (a == 0.0) continue;
    for (int n2 = -n_max; n2 <= n_max; ++n2) {
      const double b = jn(jb, n2);
      if (b == 0.0) continue;
      const cplx phase = std::polar(1.0, n2 * (kPi / 2.0 + azimuth) - 2.0 * n1 * azimuth);
      total += j_power(n1 + n2) * a * b * phase * array_factor[static_cast<std::size_t>(2 * n1 - n2 + q_max)];
    }
  }
  return std::abs(total);
}

}  // namespace nfx
