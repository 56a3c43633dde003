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

#include "nfx/denoiser.hpp"

#include <cmath>

using namespace nfx;
using nfx::test::max_abs_diff;

namespace {

// Posterior mean of a Bernoulli-Gaussian entry from the two component densities.
cplx bg_posterior_mean(cplx v, double rho, double sx2, double tau2) {
  const double a = sx2 + tau2;
  const double s = std::norm(v);
  const double on = rho * std::exp(-s / a) / a;
  const double off = (1.0 - rho) * std::exp(-s / tau2) / tau2;
  return on / (on + off) * (sx2 / a) * v;
}

CVec sample(Rng& rng, int n, double var) { return complex_normal_vector(rng, n, var); }

}  // namespace

TEST_SUITE("denoiser") {

TEST_CASE("soft threshold shrinks magnitudes") {
  const auto d = SoftThresholdDenoiser::fixed(1.0);
  CVec v(3);
  v << cplx{3.0, 4.0}, cplx{0.6, 0.0}, cplx{0.0, -2.0};
  const CVec out = d.denoise(v, 0.0);
  CHECK(std::abs(out(0) - cplx{2.4, 3.2}) < 1e-15);
  CHECK(out(1) == cplx{0.0, 0.0});
  CHECK(std::abs(out(2) - cplx{0.0, -1.0}) < 1e-15);
  CHECK(SoftThresholdDenoiser::adaptive(2.0).threshold(0.25) == doctest::Approx(1.0));
}

TEST_CASE("soft-threshold divergence matches the closed form and finite differences") {
  Rng rng = make_stream(1, 1);
  const auto d = SoftThresholdDenoiser::fixed(0.8);
  const CVec v = sample(rng, 400, 1.0);
  double expect = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 0.8) expect += 1.0 - 0.8 / (2.0 * std::abs(v(i)));
  expect /= 400.0;
  CHECK(d.analytic_divergence(v, 1.0)->real() == doctest::Approx(expect).epsilon(1e-12));
  DivergenceOptions opt;
  opt.epsilon = 1e-6;
  opt.draws = 400;
  const cplx mc = divergence_mc(d, v, 1.0, opt, rng);
  CHECK(std::abs(mc.real() - expect) < 0.03);
  CHECK(std::abs(mc.imag()) < 0.03);
}

TEST_CASE("bg gain equals the two-component posterior mean") {
  Rng rng = make_stream(2, 1);
  for (double rho : {0.05, 0.3, 0.9}) {
    for (double tau2 : {0.01, 0.3, 2.0}) {
      const BgMmseDenoiser d(rho, 1.5, tau2);
      const CVec v = sample(rng, 50, 1.5 + tau2);
      const CVec out = d.denoise(v, 123.0);  // fixed tau2 overrides the level
      for (Eigen::Index i = 0; i < v.size(); ++i)
        CHECK(std::abs(out(i) - bg_posterior_mean(v(i), rho, 1.5, tau2)) < 1e-12);
    }
  }
}

TEST_CASE("bg gain derivative matches finite differences") {
  const BgMmseDenoiser d(0.1, 1.0);
  for (double s : {0.01, 0.2, 1.0, 3.0}) {
    const double h = 1e-6;
    const double fd = (d.gain(s + h, 0.2).first - d.gain(s - h, 0.2).first) / (2.0 * h);
    CHECK(d.gain(s, 0.2).second == doctest::Approx(fd).epsilon(1e-6));
  }
  // Extreme evidence must not overflow the sigmoid.
  CHECK(std::isfinite(d.gain(1e6, 1e-4).first));
  CHECK(d.gain(0.0, 1e-8).first >= 0.0);
}

TEST_CASE("analytic divergences agree with Monte Carlo") {
  Rng rng = make_stream(3, 1);
  const BgMmseDenoiser bg(0.2, 1.0);
  const CVec v = sample(rng, 300, 0.5);
  DivergenceOptions opt;
  opt.epsilon = 1e-5;
  opt.draws = 300;
  const cplx mc = divergence_mc(bg, v, 0.3, opt, rng);
  CHECK(std::abs(mc - *bg.analytic_divergence(v, 0.3)) < 0.02);
  CHECK(*IdentityDenoiser{}.analytic_divergence(v, 1.0) == cplx{1.0, 0.0});
}

TEST_CASE("jacobian products match finite differences") {
  Rng rng = make_stream(4, 1);
  const CVec v = sample(rng, 64, 1.0);
  const CVec w = sample(rng, 64, 1.0);
  const BgMmseDenoiser bg(0.3, 1.0);
  const auto st = SoftThresholdDenoiser::adaptive(1.0);
  struct Fd final : Denoiser {
    const Denoiser* inner;
    std::string name() const override { return "fd"; }
    CVec denoise(const CVec& x, double n) const override { return inner->denoise(x, n); }
  };
  for (const Denoiser* d : std::initializer_list<const Denoiser*>{&bg, &st}) {
    Fd fd;
    fd.inner = d;
    CHECK(max_abs_diff(d->jacobian_vector_product(v, w, 0.4), fd.jacobian_vector_product(v, w, 0.4)) < 1e-5);
  }
}

TEST_CASE("denoisers handle empty and zero inputs") {
  const CVec empty(0);
  CHECK(SoftThresholdDenoiser::fixed(1.0).denoise(empty, 1.0).size() == 0);
  CHECK(ZeroDenoiser{}.denoise(CVec::Ones(4), 1.0).norm() == 0.0);
  CHECK_THROWS_AS(BgMmseDenoiser(0.0, 1.0), ContractViolation);
  CHECK_THROWS_AS(SoftThresholdDenoiser::fixed(-1.0), ContractViolation);
}

TEST_CASE("ls scale is the least-squares projection coefficient") {
  Rng rng = make_stream(5, 1);
  const CVec h = sample(rng, 20, 1.0);
  const cplx c{0.7, -1.3};
  CHECK(std::abs(ls_scale(h, c * h) - c) < 1e-13);
  CHECK(ls_scale(CVec::Zero(20), h) == cplx{0.0, 0.0});
}

}
