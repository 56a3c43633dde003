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

#include "nfx/theory.hpp"

#include <cmath>

using namespace nfx;
using nfx::test::rel_err;

namespace {

// MMSE of a Bernoulli-Gaussian scalar in complex Gaussian noise by composite
// Simpson over s = |v|^2, written from the component densities.
double bg_mmse_oracle(double tau2, double rho, double sx2) {
  const double a = sx2 + tau2;
  const double upper = 80.0 * a;
  const int n = 400000;
  const double h = upper / n;
  auto integrand = [&](double s) {
    const double on = rho * std::exp(-s / a) / a;
    const double off = (1.0 - rho) * std::exp(-s / tau2) / tau2;
    const double g = on / (on + off) * sx2 / a;
    return g * g * s * (on + off);
  };
  double acc = integrand(0.0) + integrand(upper);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  return rho * sx2 - acc * h / 3.0;
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("bg mmse matches an independent quadrature") {
  for (double rho : {0.05, 0.1, 0.5}) {
    for (double tau2 : {1e-3, 0.05, 0.5, 4.0}) {
      const double oracle = bg_mmse_oracle(tau2, rho, 1.0);
      CHECK(std::abs(bg_mmse(tau2, rho, 1.0) - oracle) < 1e-9 * rho + 1e-7 * oracle);
    }
  }
  CHECK(bg_mmse(0.3, 1.0, 2.0) == doctest::Approx(2.0 * 0.3 / 2.3));
  CHECK(bg_mmse(0.0, 0.1, 1.0) == 0.0);
}

TEST_CASE("bg mmse is bounded by the prior power and increases with noise") {
  double prev = 0.0;
  for (double tau2 = 1e-3; tau2 < 100.0; tau2 *= 1.7) {
    const double m = bg_mmse(tau2, 0.1, 1.0);
    CHECK(m > prev);
    CHECK(m < 0.1);
    CHECK(m <= tau2);
    prev = m;
  }
}

TEST_CASE("empirical denoiser MSE agrees with bg mmse") {
  Rng rng = make_stream(1, 3);
  std::bernoulli_distribution on(0.1);
  std::vector<CVec> channels;
  for (int c = 0; c < 40; ++c) {
    CVec h = CVec::Zero(500);
    for (int i = 0; i < 500; ++i)
      if (on(rng)) h(i) = complex_normal(rng);
    channels.push_back(h);
  }
  const double emp = empirical_mse(BgMmseDenoiser(0.1, 1.0), channels, 0.2, 4, rng);
  CHECK(emp == doctest::Approx(bg_mmse(0.2, 0.1, 1.0)).epsilon(0.05));
}

TEST_CASE("state evolution of a linear denoiser has the closed-form fixed point") {
  // mse(tau2) = c tau2 gives tau2* = sigma^2 / (1 - c / delta).
  const auto se = state_evolution([](double t) { return 0.2 * t; }, 0.5, 0.1, 1.0, 500, "linear");
  CHECK(se.converged);
  CHECK(se.tau2_fixed == doctest::Approx(0.1 / (1.0 - 0.4)).epsilon(1e-7));
  for (std::size_t t = 1; t < se.tau2.size(); ++t) CHECK(se.tau2[t] <= se.tau2[t - 1]);
  const auto bad = state_evolution([](double t) { return 0.8 * t; }, 0.5, 0.1, 1.0, 200);
  CHECK(bad.diverged);
  CHECK_FALSE(bad.converged);
}

TEST_CASE("replica fixed point for a Gaussian prior solves the quadratic") {
  for (double delta : {0.3, 0.5, 2.0}) {
    for (double noise : {0.01, 0.1, 1.0}) {
      const double sx2 = 1.0;
      const double b = sx2 - noise - sx2 / delta;
      const double tau2 = 0.5 * (-b + std::sqrt(b * b + 4.0 * noise * sx2));
      const auto res = replica_fixed_point(BgPrior{1.0, sx2}, delta, noise);
      CHECK(rel_err(res.tau2, tau2) < 1e-9);
      CHECK(rel_err(res.mmse, sx2 * tau2 / (sx2 + tau2)) < 1e-9);
      CHECK_FALSE(res.multiple);
    }
  }
}

TEST_CASE("replica prediction equals state evolution with the MMSE denoiser") {
  for (double snr_db : {5.0, 10.0, 20.0}) {
    const BgPrior prior{0.1, 1.0};
    const double noise = prior.power() / (0.5 * db_to_linear(snr_db));
    const auto rep = replica_fixed_point(prior, 0.5, noise);
    const auto se =
        state_evolution([&](double t) { return bg_mmse(t, prior.rho, prior.sigma_x2); }, 0.5, noise, prior.power(), 5000);
    REQUIRE(se.converged);
    CHECK(rel_err(rep.tau2_high, se.tau2_fixed) < 1e-6);
  }
}

TEST_CASE("replica reports both fixed points when they differ") {
  // Very sparse prior, low sampling ratio and tiny noise: the classic two-phase region.
  const auto res = replica_fixed_point(BgPrior{0.2, 1.0}, 0.3, 1e-5);
  CHECK(res.tau2_low <= res.tau2_high);
  if (res.multiple) CHECK(res.tau2_high > res.tau2_low * 1.01);
}

}
