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

#include "nfx/common.hpp"

#include <vector>

namespace nfx {

/// Uplink pilot phase. The tau pilot slots are split into tau / K blocks of
/// K slots, each observed through its own analog combiner.
struct PilotConfig {
  int users = 1;         // K
  int pilot_length = 1;  // tau, a multiple of K
  int rf_chains = 1;     // M_RF
  double noise_var = 1.0;
  /// Per-user transmit power. Empty means `power` for everyone.
  std::vector<double> powers;
  double power = 1.0;

  int blocks() const { return pilot_length / users; }
  int block_length() const { return users; }
  double power_of(int k) const;
  void validate(int antenna_count) const;
};

/// Sub-connected analog combiner: M_RF x M, row r has unit-modulus entries on
/// antennas [r M_s, (r + 1) M_s) and zeros elsewhere.
struct CombinerBlock {
  CMat v;
  int rf_chains() const { return static_cast<int>(v.rows()); }
};

CombinerBlock build_combiner(int antenna_count, int rf_chains, Rng& rng);

/// K x K orthonormal pilot matrix; row k is s_k^T (normalized DFT).
CMat pilot_matrix(int users);

struct UplinkObservation {
  std::vector<CombinerBlock> combiners;
  std::vector<CMat> received;  // per block, M_RF x K
  CMat pilots;                 // K x K
};

/// Y_b = V_b H diag(sqrt(K p_k)) S + V_b N_b with N_b entries CN(0, sigma^2).
/// H is M x K with user channels as columns.
UplinkObservation simulate_uplink(const CMat& channels, const std::vector<CombinerBlock>& combiners,
                                  const PilotConfig& cfg, Rng& rng);

/// Whitened compressed-sensing problem y = A h + n, n ~ CN(0, noise_var I).
/// A is rescaled to unit mean column norm; y and noise_var follow so the
/// unknown h keeps its original scale (column_scale records the factor).
struct MeasurementInstance {
  CMat a;
  CVec y;
  double noise_var = 0.0;
  double column_scale = 1.0;
  double delta = 0.0;  // rows / cols
  bool regularized = false;
  /// Ground-truth channel when known (empty otherwise).
  CVec truth;

  Eigen::Index rows() const { return a.rows(); }
  Eigen::Index cols() const { return a.cols(); }
};

MeasurementInstance despread_and_whiten(const UplinkObservation& obs, const PilotConfig& cfg, int user);

/// i.i.d. CN(0, 1/rows) operator, y = A h + CN(0, noise_var) noise.
MeasurementInstance iid_gaussian_instance(const CVec& h, Eigen::Index rows, double noise_var, Rng& rng);

/// Divides A and y by the mean column norm of A.
void normalize_columns(MeasurementInstance& inst);

}  // namespace nfx
