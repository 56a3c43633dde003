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

#include "nfx/precoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace nfx {

RMat structure_map(int antennas, int rf_chains) {
  if (rf_chains < 1 || antennas % rf_chains != 0) throw ConfigError("M_RF must divide M");
  const int ms = antennas / rf_chains;
  RMat t = RMat::Zero(antennas, rf_chains);
  for (int m = 0; m < antennas; ++m) t(m, m / ms) = 1.0;
  return t;
}

CMat HybridPrecoder::analog() const {
  return psi.asDiagonal() * structure_map(antennas(), rf_chains()).cast<cplx>();
}

double HybridPrecoder::max_chain_power() const { return v_bb.rowwise().squaredNorm().maxCoeff(); }

HybridPrecoder random_precoder(int antennas, int rf_chains, int users, double power, Rng& rng) {
  if (!(power > 0.0)) throw ConfigError("per-chain power must be > 0");
  structure_map(antennas, rf_chains);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  HybridPrecoder p;
  p.psi.resize(antennas);
  for (int m = 0; m < antennas; ++m) p.psi(m) = std::polar(1.0, phase(rng));
  p.v_bb.resize(rf_chains, users);
  for (int r = 0; r < rf_chains; ++r) {
    CVec row = complex_normal_vector(rng, users);
    p.v_bb.row(r) = row.transpose() * (std::sqrt(power) / row.norm());
  }
  return p;
}

namespace {

void check_shapes(const CMat& h, const HybridPrecoder& p) {
  if (h.cols() != p.antennas()) throw ShapeError("channel matrix must be K x M");
  if (p.v_bb.cols() != h.rows()) throw ShapeError("digital precoder must have K columns");
}

// a_ki = h_k^H V_RF v_i
CMat effective(const CMat& h, const HybridPrecoder& p) {
  check_shapes(h, p);
  return h * p.analog() * p.v_bb;
}

}  // namespace

double sum_rate(const CMat& h, const HybridPrecoder& p, double noise_var, bool bits) {
  const CMat a = effective(h, p);
  double total = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const double signal = std::norm(a(k, k));
    const double interference = a.row(k).squaredNorm() - signal;
    total += std::log1p(signal / (interference + noise_var));
  }
  return bits ? total / std::log(2.0) : total;
}

WmmseState update_uv(const CMat& h, const HybridPrecoder& p, double noise_var) {
  const CMat a = effective(h, p);
  const Eigen::Index k_users = a.rows();
  WmmseState s{CVec(k_users), RVec(k_users), RVec(k_users)};
  for (Eigen::Index k = 0; k < k_users; ++k) {
    const double total = a.row(k).squaredNorm() + noise_var;
    s.u(k) = a(k, k) / total;
    // At the MMSE receiver e_k = 1 - |a_kk|^2 / total.
    s.e(k) = std::max(1.0 - std::norm(a(k, k)) / total, std::numeric_limits<double>::min());
    s.v(k) = 1.0 / s.e(k);
  }
  return s;
}

double wmmse_objective(const CMat& h, const HybridPrecoder& p, const WmmseState& s, double noise_var) {
  const CMat a = effective(h, p);
  double f = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const cplx u = s.u(k);
    const double e = std::norm(u) * (a.row(k).squaredNorm() + noise_var) - 2.0 * (std::conj(u) * a(k, k)).real() + 1.0;
    f += s.v(k) * e - std::log(s.v(k));
  }
  return f;
}

void digital_update(const CMat& h, HybridPrecoder& p, const WmmseState& s, double power,
                    const std::function<void(const HybridPrecoder&)>& after_each) {
  check_shapes(h, p);
  const CMat g = h * p.analog();  // K x M_RF
  const RVec b = s.v.cwiseProduct(s.u.cwiseAbs2());
  const CVec c = s.v.cast<cplx>().cwiseProduct(s.u.conjugate());
  const CMat q = g.adjoint() * b.asDiagonal() * g;       // M_RF x M_RF
  const CMat lin = (c.asDiagonal() * g).conjugate();     // column m is w_m
  const double root_p = std::sqrt(power);
  for (int m = 0; m < p.rf_chains(); ++m) {
    const double gm = q(m, m).real();
    const CVec row = p.v_bb.row(m).transpose();
    const CVec d = (q.row(m) * p.v_bb).transpose() - q(m, m) * row - lin.col(m);
    const double dn = d.norm();
    CVec next = CVec::Zero(row.size());
    if (dn > 0.0) {
      const double scale = gm > 0.0 ? std::min(1.0 / gm, root_p / dn) : root_p / dn;
      next = -scale * d;
    }
    p.v_bb.row(m) = next.transpose();
    if (after_each) after_each(p);
  }
}

AnalogProblem AnalogProblem::build(const CMat& h, const HybridPrecoder& p, const WmmseState& s) {
  check_shapes(h, p);
  const CMat w = structure_map(p.antennas(), p.rf_chains()).cast<cplx>() * p.v_bb;  // T V_BB, M x K
  const RVec bdiag = s.v.cwiseProduct(s.u.cwiseAbs2());
  const CVec cdiag = s.v.cast<cplx>().cwiseProduct(s.u.conjugate());
  AnalogProblem prob;
  prob.f1 = (h.adjoint() * bdiag.asDiagonal() * h).cwiseProduct((w * w.adjoint()).transpose());
  prob.b.resize(p.antennas());
  for (int m = 0; m < p.antennas(); ++m) {
    cplx acc{0.0, 0.0};
    for (Eigen::Index k = 0; k < h.rows(); ++k) acc += w(m, k) * cdiag(k) * h(k, m);
    prob.b(m) = std::conj(acc);
  }
  prob.lambda = lambda_max_upper(prob.f1);
  return prob;
}

double AnalogProblem::f0(const CVec& psi) const {
  return psi.dot(f1 * psi).real() - 2.0 * psi.dot(b).real();
}

double AnalogProblem::surrogate(const CVec& psi, const CVec& psi0) const {
  const CVec shifted = lambda * psi0 - f1 * psi0;  // (lambda I - F1) psi0
  return lambda * psi.squaredNorm() - 2.0 * psi.dot(shifted).real() + psi0.dot(shifted).real() -
         2.0 * psi.dot(b).real();
}

CVec AnalogProblem::step(const CVec& psi0) const {
  const CVec wbar = lambda * psi0 - f1 * psi0 + b;
  CVec psi(psi0.size());
  for (Eigen::Index m = 0; m < psi0.size(); ++m)
    psi(m) = wbar(m) == cplx{0.0, 0.0} ? psi0(m) : std::polar(1.0, std::arg(wbar(m)));
  return psi;
}

double lambda_max_upper(const CMat& a, double tol) {
  const Eigen::Index n = a.rows();
  if (n == 0) return 0.0;
  CVec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = cplx{1.0, 0.01 * static_cast<double>(i % 7)};
  x.normalize();
  double est = 0.0;
  double resid = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 5000; ++it) {
    CVec y = a * x;
    const double rq = x.dot(y).real();
    resid = (y - rq * x).norm();
    const double yn = y.norm();
    const double prev = est;
    est = rq;
    if (yn == 0.0) return 0.0;
    x = y / yn;
    if (it > 0 && std::abs(est - prev) <= tol * std::max(std::abs(est), 1e-300) && resid <= std::sqrt(tol) * yn) break;
  }
  return est + resid;
}

int analog_update_mm(const CMat& h, HybridPrecoder& p, const WmmseState& s, int inner_iters,
                     const std::function<void(const AnalogProblem&, const CVec&, const CVec&)>& after_each) {
  const AnalogProblem prob = AnalogProblem::build(h, p, s);
  double f = prob.f0(p.psi);
  int used = 0;
  for (int it = 0; it < inner_iters; ++it) {
    CVec next = prob.step(p.psi);
    const double fn = prob.f0(next);
    if (after_each) after_each(prob, p.psi, next);
    p.psi = std::move(next);
    ++used;
    const double change = std::abs(fn - f) / std::max(std::abs(f), 1e-300);
    f = fn;
    if (change < 1e-8) break;
  }
  return used;
}

WmmseResult wmmse_solve(const CMat& h, const HybridPrecoder& init, double power, double noise_var,
                        const WmmseOptions& opt) {
  if (opt.outer_iterations < 1 || opt.inner_iterations < 1 || opt.digital_sweeps < 1)
    throw ConfigError("WMMSE iteration counts must be >= 1");
  HybridPrecoder p = init;
  WmmseResult res;
  res.best = p;
  res.best_rate = sum_rate(h, p, noise_var, opt.bits);
  double prev = res.best_rate;
  for (int it = 0; it < opt.outer_iterations; ++it) {
    const WmmseState s = update_uv(h, p, noise_var);
    res.objective.push_back(wmmse_objective(h, p, s, noise_var));
    for (int sweep = 0; sweep < opt.digital_sweeps; ++sweep) {
      digital_update(h, p, s, power);
      res.objective.push_back(wmmse_objective(h, p, s, noise_var));
    }
    analog_update_mm(h, p, s, opt.inner_iterations);
    res.objective.push_back(wmmse_objective(h, p, s, noise_var));
    const double rate = sum_rate(h, p, noise_var, opt.bits);
    res.rates.push_back(rate);
    ++res.iterations;
    if (rate > res.best_rate) {
      res.best_rate = rate;
      res.best = p;
    }
    if (std::abs(rate - prev) <= opt.tolerance * std::max(std::abs(prev), 1e-300)) break;
    prev = rate;
  }
  return res;
}

double normalized_condition_number(const CMat& h) {
  CMat rows = h;
  for (Eigen::Index k = 0; k < rows.rows(); ++k) {
    const double n = rows.row(k).norm();
    if (n == 0.0) return std::numeric_limits<double>::infinity();
    rows.row(k) /= n;
  }
  const Eigen::BDCSVD<CMat> svd(rows);
  const RVec& sv = svd.singularValues();
  const double lo = sv(sv.size() - 1);
  return lo > 0.0 ? sv(0) / lo : std::numeric_limits<double>::infinity();
}

std::string geometry_constraint_violation(const GeometryCandidate& c, const GeometrySearchConfig& cfg) {
  if (!(c.theta >= 0.0 && c.theta <= kPi)) return "curvature outside [0, pi]";
  if (c.tiles < 1) return "tile count must be >= 1";
  if (cfg.horizontal_count % c.tiles != 0) return "tile count does not divide M_h";
  const double per_tile = static_cast<double>(cfg.horizontal_count / c.tiles);
  if (c.tiles > 1 && c.spacing < per_tile) return "tiles overlap (S < M_h / I)";
  const double length = ((c.tiles - 1) * c.spacing + per_tile - 1.0) * cfg.carrier.spacing;
  if (cfg.max_length > 0.0 && length > cfg.max_length * (1.0 + 1e-12)) return "arc length exceeds L_h,max";
  return "";
}

ArrayLayout candidate_layout(const GeometryCandidate& c, const GeometrySearchConfig& cfg) {
  const double spacing = c.tiles == 1 ? static_cast<double>(cfg.horizontal_count) : c.spacing;
  return ArrayLayout::modular_cylindrical(cfg.horizontal_count, cfg.vertical_count, c.theta, c.tiles, spacing,
                                          cfg.carrier);
}

std::vector<std::vector<SourcePoint>> draw_user_drops(const GeometrySearchConfig& cfg) {
  std::vector<std::vector<SourcePoint>> drops;
  for (int i = 0; i < cfg.drops; ++i) {
    Rng rng = make_stream(cfg.seed, 0x67656f, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<SourcePoint> users;
    for (int k = 0; k < cfg.users; ++k) {
      Vec3 p;
      for (int j = 0; j < 3; ++j) p(j) = cfg.user_box.lo(j) + (cfg.user_box.hi(j) - cfg.user_box.lo(j)) * unit(rng);
      users.push_back(SourcePoint::from_cartesian(p));
    }
    drops.push_back(std::move(users));
  }
  return drops;
}

double mean_condition_number(const ArrayLayout& layout, const std::vector<std::vector<SourcePoint>>& drops) {
  if (drops.empty()) throw ContractViolation("need at least one user drop");
  double acc = 0.0;
  for (const auto& users : drops) {
    CMat h(static_cast<Eigen::Index>(users.size()), layout.size());
    for (std::size_t k = 0; k < users.size(); ++k)
      h.row(static_cast<Eigen::Index>(k)) = los_channel(layout, users[k]).adjoint();
    acc += normalized_condition_number(h);
  }
  return acc / static_cast<double>(drops.size());
}

GeometryDesign geometry_search(const std::vector<GeometryCandidate>& grid, const GeometrySearchConfig& cfg) {
  const auto drops = draw_user_drops(cfg);
  GeometryDesign out;
  bool found = false;
  auto key = [](const GeometryCandidate& c) { return std::make_tuple(c.theta, c.spacing, c.tiles); };
  for (const auto& c : grid) {
    GeometryEvaluation ev;
    ev.candidate = c;
    ev.reason = geometry_constraint_violation(c, cfg);
    ev.feasible = ev.reason.empty();
    if (ev.feasible) {
      ev.mean_condition = mean_condition_number(candidate_layout(c, cfg), drops);
      const bool better = !found || ev.mean_condition < out.mean_condition ||
                          (ev.mean_condition == out.mean_condition && key(c) < key(out.best));
      if (better) {
        out.best = c;
        out.mean_condition = ev.mean_condition;
        found = true;
      }
    }
    out.evaluations.push_back(ev);
  }
  if (!found) throw ConfigError("geometry search grid has no feasible candidate");
  return out;
}

}  // namespace nfx
