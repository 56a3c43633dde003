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

#include "doctest.h"
#include "helpers.hpp"

#include "nfx/nearfield_analysis.hpp"

#include <cmath>

using namespace nfx;
using nfx::test::rel_err;

namespace {

// Brute force |a(r)^H a(inf)| / M from exact element distances.
double gain_oracle(const ArrayLayout& l, double r, const Direction& dir) {
  const Vec3 u = SourcePoint{1.0, dir.azimuth, dir.elevation}.direction();
  const Eigen::Matrix3Xd p = antenna_positions(l);
  const double k = l.carrier.wavenumber();
  cplx acc{0.0, 0.0};
  for (Eigen::Index m = 0; m < p.cols(); ++m) {
    const double exact = (r * u - p.col(m)).norm();
    const double far = r - u.dot(p.col(m));
    acc += std::polar(1.0, -k * (exact - far));
  }
  return std::abs(acc) / static_cast<double>(p.cols());
}

// Direct gain sum over the centred curved-array angles.
double jacobi_anger_direct(double beta, double phi, int m_count, double theta) {
  cplx acc{0.0, 0.0};
  for (int m = 0; m < m_count; ++m) {
    const double tm = (m - (m_count - 1) / 2.0) * theta / (m_count - 1);
    const double s = std::sin(phi) + std::sin(tm - phi);
    acc += std::polar(1.0, beta * s * s);
  }
  return std::abs(acc) / m_count;
}

}  // namespace

TEST_SUITE("nearfield") {

TEST_CASE("ula Rayleigh distance is 2 L^2 / lambda") {
  const auto l = ArrayLayout::ula(128);
  const double expect = 2.0 * std::pow(l.horizontal_length(), 2) / l.carrier.wavelength;
  CHECK(rel_err(theoretical_rayleigh(l, Direction{0.0}).theoretical, expect) < 1e-12);
  CHECK(expect == doctest::Approx(355.54).epsilon(1e-4));
  const auto c = ArrayLayout::uniform_curved(128, 1e-6);
  CHECK(rel_err(theoretical_rayleigh(c, Direction{0.0}).theoretical, expect) < 1e-4);
}

TEST_CASE("closed forms agree with the general maximum") {
  for (double theta : {0.3, kPi / 2, 2.0, kPi}) {
    for (const auto& l : {ArrayLayout::uniform_curved(128, theta), ArrayLayout::uniform_cylindrical(32, 8, theta)}) {
      const auto n = theoretical_rayleigh(l, Direction{0.0});
      const auto s = theoretical_rayleigh(l, Direction{kPi / 2});
      CHECK(n.branch == RayleighBranch::normal_closed_form);
      CHECK(s.branch == RayleighBranch::side_closed_form);
      CHECK(rel_err(n.theoretical, rayleigh_general_max(l, Direction{0.0})) < 1e-9);
      // The side maximum sits at the arc end points, offset by half an element from the exact edge.
      CHECK(rel_err(s.theoretical, rayleigh_general_max(l, Direction{kPi / 2})) < 1e-9);
    }
  }
  const auto l = ArrayLayout::uniform_curved(128, kPi / 2);
  CHECK(theoretical_rayleigh(l, Direction{0.0}).theoretical == doctest::Approx(288.19).epsilon(1e-4));
  CHECK(theoretical_rayleigh(l, Direction{kPi / 2}).theoretical == doctest::Approx(49.45).epsilon(1e-3));
  CHECK(theoretical_rayleigh(l, Direction{0.7}).branch == RayleighBranch::general_max);
}

TEST_CASE("normal Rayleigh decreases and side increases with curvature") {
  const std::vector<ArrayLayout (*)(double)> makers{
      [](double t) { return ArrayLayout::uniform_curved(128, t); },
      [](double t) { return ArrayLayout::uniform_cylindrical(32, 4, t); },
      [](double t) { return ArrayLayout::modular_cylindrical(32, 4, t, 4, 12.0); },
  };
  for (auto make : makers) {
    double prev_n = 1e300, prev_s = -1.0;
    for (int i = 1; i <= 32; ++i) {
      const auto l = make(kPi * i / 32);
      const double n = theoretical_rayleigh(l, Direction{0.0}).theoretical;
      const double s = theoretical_rayleigh(l, Direction{kPi / 2}).theoretical;
      CHECK(n < prev_n);
      CHECK(s > prev_s);
      prev_n = n;
      prev_s = s;
    }
  }
}

TEST_CASE("Rayleigh distance is symmetric in azimuth") {
  const auto l = ArrayLayout::uniform_curved(64, 1.1);
  for (double phi : {0.2, 0.9, 1.4})
    CHECK(rel_err(rayleigh_general_max(l, Direction{phi}), rayleigh_general_max(l, Direction{-phi})) < 1e-9);
}

TEST_CASE("near-field area of a ula matches the closed form") {
  // For a ula, r(phi) = 2 L^2 cos^2(phi) / lambda, so the area is (3 pi / 16) (2 L^2 / lambda)^2.
  const auto l = ArrayLayout::ula(64);
  const double r0 = 2.0 * std::pow(l.horizontal_length(), 2) / l.carrier.wavelength;
  CHECK(rel_err(near_field_area(l), 3.0 * kPi / 16.0 * r0 * r0) < 1e-6);
  CHECK_THROWS_AS(near_field_area(l, -2.0, 0.0), ContractViolation);
}

TEST_CASE("gain matches the brute-force oracle") {
  for (const auto& l : {ArrayLayout::uniform_curved(64, 1.0), ArrayLayout::modular_cylindrical(16, 2, 1.5, 4, 6.0)}) {
    for (double r : {0.5, 2.0, 10.0}) {
      const Direction dir{0.3, 1.4};
      CHECK(beamfocusing_gain(l, GainQuery{r, INFINITY, dir}) == doctest::Approx(gain_oracle(l, r, dir)).epsilon(1e-9));
    }
  }
  const auto l = ArrayLayout::ula(16);
  CHECK(beamfocusing_gain(l, GainQuery{5.0, 5.0, {}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(beamfocusing_gain(ArrayLayout::modular_cylindrical(8, 1, 1.0, 2, 4.0), GainQuery{}, GainBranch::second_order),
                  UnsupportedVariant);
}

TEST_CASE("effective Rayleigh agrees with a dense scan") {
  const auto l = ArrayLayout::uniform_curved(64, 1.0);
  const Direction dir{0.0};
  const double eff = effective_rayleigh(l, dir);
  // Outermost crossing on a fine log grid from far to near.
  double crossing = 0.0;
  const double lo = std::log(l.carrier.wavelength), hi = std::log(200.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double r = std::exp(hi - (hi - lo) * i / (n - 1));
    if (gain_oracle(l, r, dir) <= 0.95) {
      crossing = r;
      break;
    }
  }
  REQUIRE(crossing > 0.0);
  CHECK(rel_err(eff, crossing) < 0.01);
  CHECK(beamfocusing_gain(l, GainQuery{eff * 1.01, INFINITY, dir}) > 0.95);
}

TEST_CASE("effective Rayleigh reports an unreachable threshold") {
  EffectiveRayleighOptions opt;
  opt.r_min = 0.01;
  opt.r_max = 0.02;
  CHECK_THROWS_AS(effective_rayleigh(ArrayLayout::ula(128), Direction{0.0}, opt), EffectiveRayleighNotFound);
}

TEST_CASE("Jacobi-Anger series matches the direct sum") {
  const int m = 64;
  for (double theta : {0.5, kPi / 2, kPi}) {
    for (double beta : {0.1, 0.5, 1.0, 1.5}) {
      for (double phi = -1.5; phi <= 1.5; phi += 0.25) {
        CHECK(std::abs(jacobi_anger_gain(beta, phi, m, theta, 12) - jacobi_anger_direct(beta, phi, m, theta)) < 1e-3);
      }
    }
  }
  CHECK(jacobi_anger_beta(ArrayLayout::ula(8), 1.0, 2.0) == 0.0);
}

TEST_CASE("phase error at the Rayleigh distance is pi / 8") {
  for (const auto& l : {ArrayLayout::ula(64), ArrayLayout::upa(16, 8), ArrayLayout::uniform_curved(96, 1.7),
                        ArrayLayout::uniform_cylindrical(24, 6, 2.5)}) {
    for (double phi : {0.0, 0.4, kPi / 2, -1.1}) {
      for (double el : {kPi / 2, 1.1}) {
        const Direction dir{phi, el};
        const double r = theoretical_rayleigh(l, dir).theoretical;
        if (r == 0.0) continue;
        CHECK(std::abs(taylor_phase_error(l, SourcePoint{r, phi, el}) - kPi / 8) < 1e-6);
      }
    }
  }
}

TEST_CASE("gain is symmetric in its two ranges") {
  const auto l = ArrayLayout::uniform_cylindrical(16, 4, 1.2);
  for (double phi : {0.0, 0.5, -1.0}) {
    const GainQuery a{3.0, 11.0, Direction{phi}}, b{11.0, 3.0, Direction{phi}};
    CHECK(beamfocusing_gain(l, a) == beamfocusing_gain(l, b));
  }
}

TEST_CASE("a vanishing threshold returns the near scan bound") {
  EffectiveRayleighOptions opt;
  opt.threshold = 1e-9;
  const auto l = ArrayLayout::uniform_curved(32, 1.0);
  CHECK(effective_rayleigh(l, Direction{0.0}, opt) == doctest::Approx(l.carrier.wavelength));
}

TEST_CASE("effective Rayleigh of a 32-element arc matches a 10^4-point scan") {
  const auto l = ArrayLayout::uniform_curved(32, kPi / 2);
  const double eff = effective_rayleigh(l, Direction{0.0});
  const double lo = std::log(l.carrier.wavelength), hi = std::log(100.0 * 2.0 * std::pow(l.horizontal_length(), 2) / l.carrier.wavelength);
  double crossing = 0.0, previous = std::exp(hi);
  for (int i = 0; i < 10000; ++i) {
    const double r = std::exp(hi - (hi - lo) * i / 9999.0);
    if (gain_oracle(l, r, Direction{0.0}) <= 0.95) {
      crossing = previous;
      break;
    }
    previous = r;
  }
  REQUIRE(crossing > 0.0);
  CHECK(rel_err(eff, crossing) < 0.01);
}

TEST_CASE("Jacobi-Anger limits") {
  CHECK(jacobi_anger_gain(0.0, 0.3, 64, kPi / 2, 12) == doctest::Approx(1.0));
  // Near broadside with many elements only the J0 term survives.
  for (double beta : {0.5, 2.0, 4.0})
    CHECK(jacobi_anger_gain(beta, 1e-9, 4096, kPi, 20) == doctest::Approx(std::abs(std::cyl_bessel_j(0.0, beta / 2))).epsilon(2e-3));
  const auto l = ArrayLayout::uniform_curved(64, kPi / 2);
  const double beta = jacobi_anger_beta(l, 10.0, 50.0);
  const double direct = beamfocusing_gain(l, GainQuery{10.0, 50.0, Direction{0.2}}, GainBranch::second_order);
  CHECK(std::abs(jacobi_anger_gain(beta, 0.2, 64, kPi / 2, 12) - direct) < 1e-3);
}

}
