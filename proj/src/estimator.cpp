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

#include "nfx/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nfx {

void SolverConfig::validate() const {
  if (iterations < 1) throw ConfigError("solver: iterations must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("solver: damping must lie in (0, 1]");
  if (!(lambda >= 0.0)) throw ConfigError("solver: lambda must be >= 0");
  if (!(mu > 0.0)) throw ConfigError("solver: mu must be > 0");
  if (!(ls_ridge >= 0.0)) throw ConfigError("solver: ridge must be >= 0");
  if (!(divergence.epsilon > 0.0) || divergence.draws < 1) throw ConfigError("solver: invalid divergence options");
  if (stall_window < 1) throw ConfigError("solver: stall window must be >= 1");
}

Metrics metrics(const CVec& estimate, const CVec& truth) {
  const double tn = truth.norm();
  if (!(tn > 0.0)) throw ContractViolation("metrics need a non-zero ground truth");
  if (estimate.size() != truth.size()) throw ShapeError("estimate and truth lengths differ");
  Metrics m;
  m.nmse = (estimate - truth).squaredNorm() / (tn * tn);
  const double en = estimate.norm();
  m.rho = en > 0.0 ? std::min(1.0, std::abs(estimate.dot(truth)) / (en * tn)) : 0.0;
  return m;
}

namespace {

bool all_finite(const CVec& v) { return v.allFinite(); }

void score(EstimateReport& rep, const MeasurementInstance& inst) {
  if (inst.truth.size() > 0) rep.final_metrics = metrics(rep.h, inst.truth);
}

void track(EstimateReport& rep, const MeasurementInstance& inst, const CVec& h) {
  if (inst.truth.size() > 0) rep.trajectory.push_back(metrics(h, inst.truth));
}

double max_singular_value(const CMat& a) {
  Eigen::BDCSVD<CMat> svd(a);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

}  // namespace

CVec ls_estimate(const MeasurementInstance& inst, double ridge) {
  if (!(ridge >= 0.0)) throw ContractViolation("ridge must be >= 0");
  if (inst.y.size() != inst.a.rows()) throw ShapeError("y length must equal the operator's row count");
  CMat gram = inst.a.adjoint() * inst.a;
  gram.diagonal().array() += ridge;
  Eigen::LLT<CMat> llt(gram);
  bool singular = llt.info() != Eigen::Success;
  if (!singular && ridge == 0.0) {
    const RVec diag = llt.matrixL().toDenseMatrix().diagonal().real();
    singular = diag.minCoeff() <= 1e-7 * diag.maxCoeff();
  }
  if (singular) throw RankDeficient("normal equations are singular; use a ridge lambda_LS > 0");
  return llt.solve(inst.a.adjoint() * inst.y);
}

double ls_error_variance(const MeasurementInstance& inst, double ridge) {
  const Eigen::SelfAdjointEigenSolver<CMat> eig(inst.a.adjoint() * inst.a, Eigen::EigenvaluesOnly);
  const RVec& ev = eig.eigenvalues();
  const double floor = 1e-12 * std::max(ev.maxCoeff(), 0.0);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double l = std::max(ev(i), 0.0);
    if (l + ridge <= floor) continue;
    acc += l / ((l + ridge) * (l + ridge));
  }
  return inst.noise_var * acc / static_cast<double>(inst.a.cols());
}

CVec ae_ls(const MeasurementInstance& inst, const Denoiser& denoiser, double ridge) {
  return denoiser.denoise(ls_estimate(inst, ridge), ls_error_variance(inst, ridge));
}

double gd_objective(const MeasurementInstance& inst, const Denoiser& denoiser, double lambda, const CVec& h,
                    double noise_var) {
  return 0.5 * (inst.a * h - inst.y).squaredNorm() + 0.5 * lambda * (h - denoiser.denoise(h, noise_var)).squaredNorm();
}

CVec gd_gradient(const MeasurementInstance& inst, const Denoiser& denoiser, double lambda, const CVec& h,
                 double noise_var) {
  CVec g = inst.a.adjoint() * (inst.a * h - inst.y);
  if (lambda > 0.0) {
    const CVec z = h - denoiser.denoise(h, noise_var);
    // J^H z taken as J z: exact for elementwise denoisers, an assumption for networks.
    g += lambda * (z - denoiser.jacobian_vector_product(h, z, noise_var));
  }
  return g;
}

EstimateReport gradient_descent(const MeasurementInstance& inst, const Denoiser& denoiser, const SolverConfig& cfg) {
  cfg.validate();
  EstimateReport rep;
  rep.solver = "gd";
  double step = cfg.step;
  if (!(step > 0.0)) {
    const double s = max_singular_value(inst.a);
    step = s > 0.0 ? 0.9 / (s * s) : 1.0;
  }
  rep.hyperparameters = {{"lambda", cfg.lambda}, {"step", step}};
  const double level = ls_error_variance(inst, cfg.ls_ridge);
  CVec h = ls_estimate(inst, cfg.ls_ridge);
  const double r0 = (inst.a * h - inst.y).norm();
  const double limit = 10.0 * std::max(r0, 1e-12 * std::max(inst.y.norm(), 1.0));
  rep.residual_norms.push_back(r0);
  for (int t = 0; t < cfg.iterations; ++t) {
    const CVec next = h - step * gd_gradient(inst, denoiser, cfg.lambda, h, level);
    if (!all_finite(next)) {
      rep.failed = true;
      break;
    }
    const double res = (inst.a * next - inst.y).norm();
    if (res > limit) {
      rep.diverged = true;
      break;
    }
    h = next;
    rep.residual_norms.push_back(res);
    track(rep, inst, h);
    ++rep.iterations;
  }
  rep.h = h;
  score(rep, inst);
  return rep;
}

EstimateReport pnp_hqs(const MeasurementInstance& inst, const Denoiser& denoiser, const SolverConfig& cfg) {
  cfg.validate();
  EstimateReport rep;
  rep.solver = "pnp_hqs";
  rep.hyperparameters = {{"mu", cfg.mu}};
  const double level = ls_error_variance(inst, cfg.ls_ridge);
  CMat system = inst.a.adjoint() * inst.a;
  system.diagonal().array() += cfg.mu;
  const Eigen::LLT<CMat> llt(system);
  if (llt.info() != Eigen::Success) throw NumericalError("HQS data system is not positive definite");
  const CVec rhs0 = inst.a.adjoint() * inst.y;

  CVec z = denoiser.denoise(ls_estimate(inst, cfg.ls_ridge), level);
  rep.residual_norms.push_back((inst.a * z - inst.y).norm());
  for (int t = 0; t < cfg.iterations; ++t) {
    const CVec x = llt.solve(rhs0 + cfg.mu * z);
    const CVec next = denoiser.denoise(x, level);
    if (!all_finite(next)) {
      rep.failed = true;
      break;
    }
    z = next;
    rep.residual_norms.push_back((inst.a * z - inst.y).norm());
    track(rep, inst, z);
    ++rep.iterations;
  }
  rep.h = z;
  score(rep, inst);
  return rep;
}

EstimateReport amp(const MeasurementInstance& inst, const Denoiser& denoiser, const SolverConfig& cfg, Rng& rng) {
  cfg.validate();
  EstimateReport rep;
  rep.solver = "amp";
  rep.hyperparameters = {{"damping", cfg.damping}};
  const auto rows = static_cast<double>(inst.a.rows());
  const double delta = inst.delta > 0.0 ? inst.delta : rows / static_cast<double>(inst.a.cols());
  CVec h = CVec::Zero(inst.a.cols());
  CVec r = inst.y;
  int quiet = 0;
  double last = r.norm();
  for (int t = 0; t < cfg.iterations; ++t) {
    const double tau2 = r.squaredNorm() / rows;
    const CVec v = h + inst.a.adjoint() * r;
    const CVec ht = denoiser.denoise(v, tau2);
    std::optional<cplx> div;
    if (cfg.analytic_divergence) div = denoiser.analytic_divergence(v, tau2);
    if (!div) div = divergence_mc(denoiser, v, tau2, cfg.divergence, rng);
    const CVec r_next = inst.y - inst.a * ht + (*div / delta) * r;
    const CVec h_next = (1.0 - cfg.damping) * h + cfg.damping * ht;
    if (!all_finite(r_next) || !all_finite(h_next)) {
      rep.failed = true;
      break;
    }
    h = h_next;
    r = r_next;
    ++rep.iterations;
    const double now = r.norm();
    rep.residual_norms.push_back(now);
    track(rep, inst, h);
    const double change = std::abs(now - last) / std::max(last, std::numeric_limits<double>::min());
    quiet = change < cfg.stall_tolerance ? quiet + 1 : 0;
    last = now;
    if (quiet >= cfg.stall_window) {
      rep.stalled = true;
      break;
    }
  }
  rep.h = h;
  score(rep, inst);
  return rep;
}

double median(std::vector<double> v) {
  if (v.empty()) throw ContractViolation("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int e = -4; e <= 4; ++e) g.push_back(std::pow(10.0, e));
  return g;
}

GridResult grid_tune(const std::function<CVec(double, const MeasurementInstance&)>& solver,
                     const std::vector<double>& grid, const std::vector<MeasurementInstance>& validation) {
  if (grid.empty()) throw ContractViolation("grid must be non-empty");
  if (validation.empty()) throw ContractViolation("grid tuning needs validation instances");
  GridResult out;
  out.grid = grid;
  std::sort(out.grid.begin(), out.grid.end());
  double best = std::numeric_limits<double>::infinity();
  for (double value : out.grid) {
    std::vector<double> nmse;
    for (const auto& inst : validation) {
      if (inst.truth.size() == 0) throw ContractViolation("validation instances need ground truth");
      const CVec est = solver(value, inst);
      nmse.push_back(est.allFinite() ? metrics(est, inst.truth).nmse : std::numeric_limits<double>::infinity());
    }
    const double med = median(nmse);
    out.median_nmse.push_back(med);
    if (med < best) {
      best = med;
      out.best = value;
    }
  }
  if (!std::isfinite(best)) out.best = out.grid.front();
  return out;
}

}  // namespace nfx
