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

#include "nfx/channel.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nfx {

// Downlink channels are passed as a K x M matrix H whose row k is h_k^H, so
// user k receives H.row(k) * x.

/// Sub-connected hybrid precoder: V_RF = diag(psi) T with T assigning
/// antennas [m M_s, (m + 1) M_s) to chain m.
struct HybridPrecoder {
  CVec psi;   // M unit-modulus phases
  CMat v_bb;  // M_RF x K

  int rf_chains() const { return static_cast<int>(v_bb.rows()); }
  int antennas() const { return static_cast<int>(psi.size()); }
  CMat analog() const;
  /// Max over chains of [V_BB V_BB^H]_mm.
  double max_chain_power() const;
};

/// M x M_RF 0/1 block assignment.
RMat structure_map(int antennas, int rf_chains);

/// Random phases and a digital part scaled so every chain transmits power P.
HybridPrecoder random_precoder(int antennas, int rf_chains, int users, double power, Rng& rng);

double sum_rate(const CMat& h, const HybridPrecoder& p, double noise_var, bool bits = true);

struct WmmseState {
  CVec u;
  RVec v;
  RVec e;
};

WmmseState update_uv(const CMat& h, const HybridPrecoder& p, double noise_var);

/// sum_k (v_k e_k - log v_k) with e_k evaluated at the state's u.
double wmmse_objective(const CMat& h, const HybridPrecoder& p, const WmmseState& s, double noise_var);

/// One sweep of closed-form per-chain updates of the rows of V_BB under
/// [V_BB V_BB^H]_mm <= P. `after_each` (optional) sees the precoder after every row.
void digital_update(const CMat& h, HybridPrecoder& p, const WmmseState& s, double power,
                    const std::function<void(const HybridPrecoder&)>& after_each = {});

/// Quadratic analog subproblem f0(psi) = psi^H F1 psi - 2 Re(psi^H b).
struct AnalogProblem {
  CMat f1;
  CVec b;  // conj(diag(F2))
  double lambda = 0.0;  // >= lambda_max(F1)

  static AnalogProblem build(const CMat& h, const HybridPrecoder& p, const WmmseState& s);
  double f0(const CVec& psi) const;
  /// Majorizer of f0 at psi0, tight at psi = psi0 for unit-modulus psi.
  double surrogate(const CVec& psi, const CVec& psi0) const;
  /// Closed-form surrogate minimizer exp(j angle((lambda I - F1) psi0 + b)).
  CVec step(const CVec& psi0) const;
};

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration, inflated
/// by the final residual norm so the result is an upper bound.
double lambda_max_upper(const CMat& a, double tol = 1e-8);

/// MM iterations on psi; returns the number of inner iterations used.
int analog_update_mm(const CMat& h, HybridPrecoder& p, const WmmseState& s, int inner_iters,
                     const std::function<void(const AnalogProblem&, const CVec&, const CVec&)>& after_each = {});

struct WmmseOptions {
  int outer_iterations = 50;
  int inner_iterations = 20;
  int digital_sweeps = 1;
  double tolerance = 1e-6;
  bool bits = true;
};

struct WmmseResult {
  HybridPrecoder best;
  double best_rate = 0.0;
  std::vector<double> rates;      // after every outer iteration (rate of the current iterate)
  std::vector<double> objective;  // after every block update
  int iterations = 0;
};

WmmseResult wmmse_solve(const CMat& h, const HybridPrecoder& init, double power, double noise_var,
                        const WmmseOptions& opt = {});

/// sigma_max / sigma_min of H with rows normalized to unit norm.
double normalized_condition_number(const CMat& h);

struct GeometryCandidate {
  double theta = 0.0;
  int tiles = 1;
  double spacing = 1.0;  // S in units of d
};

struct GeometrySearchConfig {
  int horizontal_count = 48;
  int vertical_count = 16;
  CarrierConfig carrier;
  /// Maximum horizontal arc length L_h,max in meters.
  double max_length = 0.0;
  int users = 10;
  int drops = 20;
  Box user_box{{5.0, -50.0, 0.0}, {50.0, 50.0, 4.0}};
  std::uint64_t seed = 1;
};

struct GeometryEvaluation {
  GeometryCandidate candidate;
  bool feasible = true;
  std::string reason;      // why the candidate was filtered
  double mean_condition = 0.0;
};

struct GeometryDesign {
  GeometryCandidate best;
  double mean_condition = 0.0;
  std::vector<GeometryEvaluation> evaluations;
};

/// Returns "" when the candidate meets the layout constraints.
std::string geometry_constraint_violation(const GeometryCandidate& c, const GeometrySearchConfig& cfg);

ArrayLayout candidate_layout(const GeometryCandidate& c, const GeometrySearchConfig& cfg);

/// User drops shared by every candidate (drop i uses stream (seed, i)).
std::vector<std::vector<SourcePoint>> draw_user_drops(const GeometrySearchConfig& cfg);

double mean_condition_number(const ArrayLayout& layout, const std::vector<std::vector<SourcePoint>>& drops);

/// Exhaustive search; ties go to smaller theta, then smaller S, then smaller I.
/// Throws ConfigError when no candidate is feasible.
GeometryDesign geometry_search(const std::vector<GeometryCandidate>& grid, const GeometrySearchConfig& cfg);

}  // namespace nfx
