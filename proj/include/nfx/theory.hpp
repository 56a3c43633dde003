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

#include "nfx/denoiser.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nfx {

/// Per-component MSE of a denoiser as a function of the effective noise tau^2.
using MseFunction = std::function<double(double)>;

struct SECurve {
  std::string denoiser;
  double delta = 0.0;
  double noise_var = 0.0;
  std::vector<double> tau2;  // tau_0^2 .. tau_T^2
  std::vector<double> mse;   // mse(tau_t^2), same length as tau2
  double tau2_fixed = 0.0;
  double mse_fixed = 0.0;
  bool converged = false;
  /// Set when tau^2 keeps growing without slowing down (e.g. identity denoiser at delta <= 1).
  bool diverged = false;
};

/// tau_{t+1}^2 = sigma^2 + mse(tau_t^2) / delta from tau_0^2 = sigma^2 + energy / delta,
/// where energy = E||h||^2 / M. Stops after T steps or when |d tau^2| / tau^2 < 1e-8.
SECurve state_evolution(const MseFunction& mse, double delta, double noise_var, double energy, int iterations,
                        const std::string& denoiser = "");

/// Monte-Carlo M^{-1} ||R(h + tau w) - h||^2 averaged over channels and w ~ CN(0, I).
double empirical_mse(const Denoiser& denoiser, const std::vector<CVec>& channels, double tau2, int draws, Rng& rng);

/// Scalar MMSE of the Bernoulli-Gaussian prior in CN(0, tau^2) noise.
double bg_mmse(double tau2, double rho, double sigma_x2);

struct BgPrior {
  double rho = 0.1;
  double sigma_x2 = 1.0;
  double power() const { return rho * sigma_x2; }
};

struct ReplicaResult {
  double tau2 = 0.0;
  double mmse = 0.0;
  /// The two initializations reached different fixed points.
  bool multiple = false;
  double tau2_low = 0.0;   // fixed point reached from tau^2 = sigma^2
  double tau2_high = 0.0;  // fixed point reached from tau^2 = sigma^2 + power / delta
};

/// Damped (0.5) iteration of tau^2 = sigma^2 + mmse(tau^2) / delta from two
/// starting points; returns the larger-MSE fixed point.
ReplicaResult replica_fixed_point(const MseFunction& mmse, double prior_power, double delta, double noise_var);
ReplicaResult replica_fixed_point(const BgPrior& prior, double delta, double noise_var);

}  // namespace nfx
