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

#include "nfx/estimator.hpp"
#include "nfx/theory.hpp"

#include <cmath>

using namespace nfx;
using nfx::test::max_abs_diff;

namespace {

CVec bg_vector(Rng& rng, int n, double rho, double sx2) {
  std::bernoulli_distribution on(rho);
  CVec h = CVec::Zero(n);
  for (int i = 0; i < n; ++i)
    if (on(rng)) h(i) = complex_normal(rng, sx2);
  if (h.norm() == 0.0) h(0) = complex_normal(rng, sx2);
  return h;
}

MeasurementInstance gaussian_instance(std::uint64_t seed, int m, int rows, double noise_var) {
  Rng rng = make_stream(seed, 7);
  const CVec h = complex_normal_vector(rng, m);
  return iid_gaussian_instance(h, rows, noise_var, rng);
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("metrics") {
  const CVec h = CVec::LinSpaced(5, 1.0, 5.0).cast<cplx>();
  CHECK(metrics(h, h).nmse == 0.0);
  CHECK(metrics(cplx{0.0, 2.0} * h, h).rho == doctest::Approx(1.0));
  CHECK(metrics(CVec::Zero(5), h).nmse == doctest::Approx(1.0));
  CHECK_THROWS_AS(metrics(h, CVec::Zero(5)), ContractViolation);
}

TEST_CASE("ridge LS matches the augmented least-squares oracle") {
  const auto inst = gaussian_instance(1, 30, 20, 0.1);
  for (double ridge : {1e-3, 0.5, 10.0}) {
    CMat aug(50, 30);
    aug << inst.a, std::sqrt(ridge) * CMat::Identity(30, 30);
    CVec rhs = CVec::Zero(50);
    rhs.head(20) = inst.y;
    const CVec oracle = aug.colPivHouseholderQr().solve(rhs);
    CHECK(max_abs_diff(ls_estimate(inst, ridge), oracle) < 1e-9);
  }
  CHECK_THROWS_AS(ls_estimate(inst, 0.0), RankDeficient);
  CHECK_NOTHROW(ls_estimate(gaussian_instance(2, 10, 40, 0.1), 0.0));
}

TEST_CASE("LS error variance matches Monte Carlo noise propagation") {
  auto inst = gaussian_instance(3, 16, 24, 0.2);
  const double ridge = 0.05;
  Rng rng = make_stream(3, 8);
  double acc = 0.0;
  const int draws = 4000;
  for (int d = 0; d < draws; ++d) {
    inst.y = complex_normal_vector(rng, inst.rows(), inst.noise_var);
    acc += ls_estimate(inst, ridge).squaredNorm() / 16.0;
  }
  CHECK(acc / draws == doctest::Approx(ls_error_variance(inst, ridge)).epsilon(0.05));
}

TEST_CASE("gradient matches directional derivatives of the objective") {
  const auto inst = gaussian_instance(4, 24, 12, 0.1);
  const BgMmseDenoiser den(0.3, 1.0);
  Rng rng = make_stream(4, 8);
  const CVec h = complex_normal_vector(rng, 24);
  for (int trial = 0; trial < 5; ++trial) {
    const CVec w = complex_normal_vector(rng, 24);
    const double eps = 1e-6;
    const double fd = (gd_objective(inst, den, 0.7, h + eps * w, 0.2) - gd_objective(inst, den, 0.7, h - eps * w, 0.2)) /
                      (2.0 * eps);
    const double analytic = gd_gradient(inst, den, 0.7, h, 0.2).dot(w).real();
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("gradient descent without a prior decreases the residual") {
  const auto inst = gaussian_instance(5, 12, 30, 0.1);
  SolverConfig cfg;
  cfg.lambda = 0.0;
  cfg.iterations = 40;
  const auto rep = gradient_descent(inst, IdentityDenoiser{}, cfg);
  for (std::size_t i = 1; i < rep.residual_norms.size(); ++i)
    CHECK(rep.residual_norms[i] <= rep.residual_norms[i - 1] * (1.0 + 1e-12));
  CHECK_FALSE(rep.diverged);
  CHECK(rep.trajectory.size() == static_cast<std::size_t>(rep.iterations));
}

TEST_CASE("HQS with an identity prior reaches the least-squares solution") {
  const auto inst = gaussian_instance(6, 10, 30, 0.1);
  SolverConfig cfg;
  cfg.mu = 0.01;
  cfg.iterations = 400;
  const auto rep = pnp_hqs(inst, IdentityDenoiser{}, cfg);
  CHECK(max_abs_diff(rep.h, ls_estimate(inst, 0.0)) < 1e-6);
  CHECK(pnp_hqs(inst, ZeroDenoiser{}, cfg).h.norm() == 0.0);
}

TEST_CASE("AMP recovers a sparse vector at high SNR") {
  Rng rng = make_stream(7, 1);
  const CVec h = bg_vector(rng, 256, 0.1, 1.0);
  const auto inst = iid_gaussian_instance(h, 160, 1e-6, rng);
  SolverConfig cfg;
  cfg.iterations = 60;
  const auto rep = amp(inst, BgMmseDenoiser(0.1, 1.0), cfg, rng);
  REQUIRE(rep.final_metrics);
  CHECK(rep.final_metrics->nmse < 1e-3);
  CHECK(rep.final_metrics->rho > 0.999);
}

TEST_CASE("AMP tracks state evolution") {
  const int m = 256, rows = 128;
  const double rho = 0.1, sx2 = 1.0, snr = db_to_linear(10.0);
  const double noise = rho * sx2 / (0.5 * snr);
  const BgMmseDenoiser den(rho, sx2);
  SolverConfig cfg;
  cfg.iterations = 30;
  std::vector<double> nmse;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng = make_stream(8, 1, static_cast<std::uint64_t>(trial));
    const CVec h = bg_vector(rng, m, rho, sx2);
    const auto inst = iid_gaussian_instance(h, rows, noise, rng);
    const auto rep = amp(inst, den, cfg, rng);
    nmse.push_back((rep.h - h).squaredNorm() / (m * rho * sx2));
  }
  const auto se = state_evolution([&](double t) { return bg_mmse(t, rho, sx2); }, 0.5, noise, rho * sx2, 200);
  CHECK(std::abs(linear_to_db(median(nmse)) - linear_to_db(se.mse_fixed / (rho * sx2))) < 1.0);
}

TEST_CASE("AMP flags a stalled residual") {
  const auto inst = gaussian_instance(9, 32, 16, 0.1);
  SolverConfig cfg;
  cfg.iterations = 50;
  Rng rng = make_stream(9, 2);
  const auto rep = amp(inst, ZeroDenoiser{}, cfg, rng);
  CHECK(rep.stalled);
  CHECK(rep.iterations < 50);
}

TEST_CASE("grid tuning picks the best value and breaks ties low") {
  std::vector<MeasurementInstance> val{gaussian_instance(10, 8, 16, 0.1)};
  const auto res = grid_tune([](double v, const MeasurementInstance& inst) -> CVec {
    return inst.truth * (1.0 + std::abs(std::log10(v) - 1.0));
  }, default_grid(), val);
  CHECK(res.best == doctest::Approx(10.0));
  const auto tie = grid_tune([](double, const MeasurementInstance& inst) -> CVec { return inst.truth; }, {3.0, 1.0, 2.0}, val);
  CHECK(tie.best == 1.0);
  CHECK(median({3.0, 1.0, 2.0, 10.0}) == 2.5);
}

TEST_CASE("solver configuration is validated") {
  SolverConfig cfg;
  cfg.damping = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}
