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
#include "nfx/pilot.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nfx {

struct SolverConfig {
  int iterations = 50;
  double damping = 1.0;     // gamma
  double step = 0.0;        // xi; <= 0 selects 0.9 / sigma_max(A)^2
  double lambda = 1.0;      // regularizer weight (gradient descent)
  double mu = 1.0;          // HQS penalty
  double ls_ridge = 1e-3;   // lambda_LS
  DivergenceOptions divergence;
  bool analytic_divergence = true;  // use the closed form when the denoiser has one
  double stall_tolerance = 1e-6;
  int stall_window = 5;

  void validate() const;
};

struct Metrics {
  double nmse = 0.0;
  double rho = 0.0;
};

/// nmse = ||est - h||^2 / ||h||^2, rho = |est^H h| / (||est|| ||h||) (0 if est = 0).
Metrics metrics(const CVec& estimate, const CVec& truth);

struct EstimateReport {
  std::string solver;
  CVec h;
  std::vector<double> residual_norms;
  /// Per-iteration metrics against the instance ground truth, when known.
  std::vector<Metrics> trajectory;
  std::optional<Metrics> final_metrics;
  std::map<std::string, double> hyperparameters;
  int iterations = 0;
  bool diverged = false;  // gradient descent blow-up, stopped early
  bool stalled = false;   // residual stopped changing, stopped early
  bool failed = false;    // non-finite iterate; h holds the last finite state
};

/// (A^H A + ridge I)^{-1} A^H y by Cholesky. Throws RankDeficient when the
/// system is singular (only possible at ridge = 0).
CVec ls_estimate(const MeasurementInstance& inst, double ridge);

/// Per-component error variance of the ridge estimate, sigma^2 tr(W A^H A W^H) / M
/// with W = (A^H A + ridge I)^{-1}. Used as the noise level handed to denoisers.
double ls_error_variance(const MeasurementInstance& inst, double ridge);

CVec ae_ls(const MeasurementInstance& inst, const Denoiser& denoiser, double ridge);

/// 0.5 ||A h - y||^2 + 0.5 lambda ||h - R(h)||^2
double gd_objective(const MeasurementInstance& inst, const Denoiser& denoiser, double lambda, const CVec& h,
                    double noise_var);

/// Real-packed gradient A^H (A h - y) + lambda (I - J_R(h))^H (h - R(h)).
CVec gd_gradient(const MeasurementInstance& inst, const Denoiser& denoiser, double lambda, const CVec& h,
                 double noise_var);

EstimateReport gradient_descent(const MeasurementInstance& inst, const Denoiser& denoiser, const SolverConfig& cfg);

EstimateReport pnp_hqs(const MeasurementInstance& inst, const Denoiser& denoiser, const SolverConfig& cfg);

/// Denoiser-AMP with damping; starts from h = 0, r = y.
EstimateReport amp(const MeasurementInstance& inst, const Denoiser& denoiser, const SolverConfig& cfg, Rng& rng);

struct GridResult {
  double best = 0.0;
  std::vector<double> grid;
  std::vector<double> median_nmse;
};

/// Exhaustive search for the grid value with the smallest median NMSE over
/// `validation` (instances must carry ground truth). Ties go to the smaller value.
GridResult grid_tune(const std::function<CVec(double, const MeasurementInstance&)>& solver,
                     const std::vector<double>& grid, const std::vector<MeasurementInstance>& validation);

/// 1e-4, 1e-3, ..., 1e4
std::vector<double> default_grid();

double median(std::vector<double> v);

}  // namespace nfx
