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

#include "nfx/pilot.hpp"

#include <cmath>

namespace nfx {

double PilotConfig::power_of(int k) const {
  if (powers.empty()) return power;
  return powers.at(static_cast<std::size_t>(k));
}

void PilotConfig::validate(int antenna_count) const {
  if (users < 1) throw ConfigError("pilot: K must be >= 1");
  if (pilot_length < users || pilot_length % users != 0) throw ConfigError("pilot: tau must be a positive multiple of K");
  if (rf_chains < 1 || antenna_count % rf_chains != 0) throw ConfigError("pilot: M_RF must divide M");
  if (!(noise_var > 0.0)) throw ConfigError("pilot: noise variance must be > 0");
  if (!powers.empty() && static_cast<int>(powers.size()) != users) throw ConfigError("pilot: need one power per user");
  for (int k = 0; k < users; ++k)
    if (!(power_of(k) > 0.0)) throw ConfigError("pilot: powers must be > 0");
}

CombinerBlock build_combiner(int antenna_count, int rf_chains, Rng& rng) {
  if (rf_chains < 1 || antenna_count % rf_chains != 0) throw ConfigError("M_RF must divide M");
  const int ms = antenna_count / rf_chains;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  CombinerBlock out{CMat::Zero(rf_chains, antenna_count)};
  for (int r = 0; r < rf_chains; ++r)
    for (int i = 0; i < ms; ++i) out.v(r, r * ms + i) = std::polar(1.0, phase(rng));
  return out;
}

CMat pilot_matrix(int users) {
  CMat s(users, users);
  const double norm = 1.0 / std::sqrt(static_cast<double>(users));
  for (int k = 0; k < users; ++k)
    for (int t = 0; t < users; ++t) s(k, t) = std::polar(norm, -2.0 * kPi * k * t / users);
  return s;
}

UplinkObservation simulate_uplink(const CMat& channels, const std::vector<CombinerBlock>& combiners,
                                  const PilotConfig& cfg, Rng& rng) {
  const int m = static_cast<int>(channels.rows());
  cfg.validate(m);
  if (channels.cols() != cfg.users) throw ShapeError("channel matrix must have K columns");
  if (static_cast<int>(combiners.size()) != cfg.blocks()) throw ShapeError("need one combiner per pilot block");
  UplinkObservation obs;
  obs.combiners = combiners;
  obs.pilots = pilot_matrix(cfg.users);
  RVec amp(cfg.users);
  for (int k = 0; k < cfg.users; ++k) amp(k) = std::sqrt(cfg.block_length() * cfg.power_of(k));
  const CMat signal = channels * amp.asDiagonal() * obs.pilots;
  for (const auto& c : combiners) {
    if (c.v.cols() != m || c.rf_chains() != cfg.rf_chains) throw ShapeError("combiner shape must be M_RF x M");
    CMat noise(m, cfg.block_length());
    for (Eigen::Index j = 0; j < noise.cols(); ++j) noise.col(j) = complex_normal_vector(rng, m, cfg.noise_var);
    obs.received.push_back(c.v * (signal + noise));
  }
  return obs;
}

void normalize_columns(MeasurementInstance& inst) {
  const double scale = inst.a.colwise().norm().mean();
  if (!(scale > 0.0)) throw NumericalError("measurement operator has zero columns");
  inst.a /= scale;
  inst.y /= scale;
  inst.noise_var /= scale * scale;
  inst.column_scale = scale;
}

MeasurementInstance despread_and_whiten(const UplinkObservation& obs, const PilotConfig& cfg, int user) {
  if (user < 0 || user >= cfg.users) throw ContractViolation("user index out of range");
  if (obs.combiners.empty() || obs.received.size() != obs.combiners.size())
    throw ShapeError("observation needs matching combiners and received blocks");
  const Eigen::Index mrf = obs.combiners.front().v.rows();
  const Eigen::Index m = obs.combiners.front().v.cols();
  const double gain = cfg.block_length() * cfg.power_of(user);
  const CVec s_conj = obs.pilots.row(user).conjugate().transpose();

  MeasurementInstance inst;
  inst.a.resize(mrf * static_cast<Eigen::Index>(obs.combiners.size()), m);
  inst.y.resize(inst.a.rows());
  for (std::size_t b = 0; b < obs.combiners.size(); ++b) {
    const CMat& v = obs.combiners[b].v;
    const CVec yb = obs.received[b] * s_conj / std::sqrt(gain);
    // Noise covariance of yb is sigma^2 V V^H / gain; whiten with its Cholesky factor.
    CMat cov = v * v.adjoint() / gain;
    Eigen::LLT<CMat> llt(cov);
    const double floor = 1e-12 * cov.trace().real() / static_cast<double>(mrf);
    if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().real().minCoeff() < std::sqrt(floor)) {
      cov.diagonal().array() += floor;
      llt.compute(cov);
      inst.regularized = true;
      if (llt.info() != Eigen::Success) throw NumericalError("combiner covariance is not positive definite");
    }
    const auto block = static_cast<Eigen::Index>(b) * mrf;
    inst.a.middleRows(block, mrf) = llt.matrixL().solve(v);
    inst.y.segment(block, mrf) = llt.matrixL().solve(yb);
  }
  inst.noise_var = cfg.noise_var;
  inst.delta = static_cast<double>(inst.a.rows()) / static_cast<double>(m);
  normalize_columns(inst);
  return inst;
}

MeasurementInstance iid_gaussian_instance(const CVec& h, Eigen::Index rows, double noise_var, Rng& rng) {
  MeasurementInstance inst;
  const Eigen::Index m = h.size();
  inst.a.resize(rows, m);
  for (Eigen::Index j = 0; j < m; ++j) inst.a.col(j) = complex_normal_vector(rng, rows, 1.0 / rows);
  inst.y = inst.a * h + complex_normal_vector(rng, rows, noise_var);
  inst.noise_var = noise_var;
  inst.delta = static_cast<double>(rows) / static_cast<double>(m);
  inst.truth = h;
  return inst;
}

}  // namespace nfx
