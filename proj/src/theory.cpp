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

#include "nfx/theory.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <sstream>

namespace nfx {

namespace {

double checked(const MseFunction& mse, double tau2) {
  const double v = mse(tau2);
  if (!std::isfinite(v) || v < 0.0) throw ContractViolation("MSE function returned a negative or non-finite value");
  return v;
}

}  // namespace

SECurve state_evolution(const MseFunction& mse, double delta, double noise_var, double energy, int iterations,
                        const std::string& denoiser) {
  if (!(delta > 0.0) || !(noise_var >= 0.0) || !(energy >= 0.0) || iterations < 1)
    throw ContractViolation("state evolution needs delta > 0, sigma^2 >= 0, energy >= 0, T >= 1");
  SECurve c;
  c.denoiser = denoiser;
  c.delta = delta;
  c.noise_var = noise_var;
  double tau2 = noise_var + energy / delta;
  c.tau2.push_back(tau2);
  c.mse.push_back(checked(mse, tau2));
  double prev_step = std::numeric_limits<double>::infinity();
  bool growing = false;
  for (int t = 0; t < iterations; ++t) {
    const double next = noise_var + c.mse.back() / delta;
    const double step = next - tau2;
    c.tau2.push_back(next);
    if (!std::isfinite(next) || next > 1e150) {
      c.diverged = true;
      break;
    }
    c.mse.push_back(checked(mse, next));
    growing = step > 0.0 && step >= prev_step * (1.0 - 1e-9);
    prev_step = step;
    const double rel = std::abs(step) / std::max(next, std::numeric_limits<double>::min());
    tau2 = next;
    if (rel < 1e-8) {
      c.converged = true;
      break;
    }
  }
  if (!c.converged && growing) c.diverged = true;
  c.tau2_fixed = c.tau2.back();
  c.mse_fixed = c.mse.size() == c.tau2.size() ? c.mse.back() : std::numeric_limits<double>::infinity();
  return c;
}

double empirical_mse(const Denoiser& denoiser, const std::vector<CVec>& channels, double tau2, int draws, Rng& rng) {
  if (channels.empty() || draws < 1) throw ContractViolation("empirical MSE needs channels and draws >= 1");
  double acc = 0.0;
  double count = 0.0;
  for (const auto& h : channels) {
    for (int d = 0; d < draws; ++d) {
      const CVec v = h + complex_normal_vector(rng, h.size(), tau2);
      acc += (denoiser.denoise(v, tau2) - h).squaredNorm() / static_cast<double>(h.size());
      count += 1.0;
    }
  }
  return acc / count;
}

double bg_mmse(double tau2, double rho, double sigma_x2) {
  if (!(tau2 >= 0.0) || !(rho > 0.0 && rho <= 1.0) || !(sigma_x2 > 0.0))
    throw ContractViolation("bg_mmse needs tau^2 >= 0, rho in (0, 1], sigma_x^2 > 0");
  if (tau2 == 0.0) return 0.0;
  const double a = sigma_x2 + tau2;
  if (rho >= 1.0) return sigma_x2 * tau2 / a;
  const BgMmseDenoiser den(rho, sigma_x2, tau2);
  // E|E[x|v]|^2 over |v|^2 = s, whose density is an exponential mixture.
  auto integrand = [&](double s) {
    const double g = den.gain(s, tau2).first;
    const double density = rho * std::exp(-s / a) / a + (1.0 - rho) * std::exp(-s / tau2) / tau2;
    return g * g * s * density;
  };
  boost::math::quadrature::exp_sinh<double> quad;
  double err = 0.0;
  const double energy = quad.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-12, &err);
  return std::max(0.0, rho * sigma_x2 - energy);
}

namespace {

double damped_fixed_point(const MseFunction& mmse, double start, double delta, double noise_var) {
  double tau2 = start;
  std::vector<double> trail;
  for (int it = 0; it < 10000; ++it) {
    const double target = noise_var + checked(mmse, tau2) / delta;
    const double next = 0.5 * tau2 + 0.5 * target;
    if (std::abs(next - tau2) <= 1e-13 * std::max(next, 1e-300)) return next;
    tau2 = next;
    trail.push_back(tau2);
  }
  std::ostringstream msg;
  msg << "replica fixed point did not converge in 10^4 iterations; last tau^2 values:";
  for (std::size_t i = trail.size() >= 5 ? trail.size() - 5 : 0; i < trail.size(); ++i) msg << ' ' << trail[i];
  throw NumericalError(msg.str());
}

}  // namespace

ReplicaResult replica_fixed_point(const MseFunction& mmse, double prior_power, double delta, double noise_var) {
  if (!(delta > 0.0) || !(noise_var > 0.0) || !(prior_power >= 0.0))
    throw ContractViolation("replica fixed point needs delta > 0, sigma^2 > 0, power >= 0");
  ReplicaResult r;
  r.tau2_low = damped_fixed_point(mmse, noise_var, delta, noise_var);
  r.tau2_high = damped_fixed_point(mmse, noise_var + prior_power / delta, delta, noise_var);
  r.multiple = std::abs(r.tau2_high - r.tau2_low) > 1e-6 * std::max(r.tau2_high, r.tau2_low);
  r.tau2 = std::max(r.tau2_low, r.tau2_high);
  r.mmse = mmse(r.tau2);
  return r;
}

ReplicaResult replica_fixed_point(const BgPrior& prior, double delta, double noise_var) {
  if (!(prior.rho > 0.0 && prior.rho <= 1.0) || !(prior.sigma_x2 > 0.0)) throw ContractViolation("invalid BG prior");
  return replica_fixed_point([&](double t) { return bg_mmse(t, prior.rho, prior.sigma_x2); }, prior.power(), delta,
                             noise_var);
}

}  // namespace nfx
