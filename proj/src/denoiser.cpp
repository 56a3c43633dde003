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

#include "nfx/denoiser.hpp"

#include <cmath>

namespace nfx {

CVec Denoiser::jacobian_vector_product(const CVec& v, const CVec& w, double noise_var) const {
  const double wn = w.norm();
  if (wn == 0.0) return CVec::Zero(v.size());
  const double scale = std::max(v.norm(), 1e-12) / std::sqrt(static_cast<double>(std::max<Eigen::Index>(v.size(), 1)));
  const double h = fd_step * scale / (wn / std::sqrt(static_cast<double>(w.size())));
  return (denoise(v + h * w, noise_var) - denoise(v - h * w, noise_var)) / (2.0 * h);
}

SoftThresholdDenoiser SoftThresholdDenoiser::fixed(double t) {
  if (!(t >= 0.0)) throw ContractViolation("soft threshold must be >= 0");
  SoftThresholdDenoiser d;
  d.value_ = t;
  return d;
}

SoftThresholdDenoiser SoftThresholdDenoiser::adaptive(double alpha) {
  auto d = fixed(alpha);
  d.adaptive_ = true;
  return d;
}

double SoftThresholdDenoiser::threshold(double noise_var) const {
  return adaptive_ ? value_ * std::sqrt(std::max(noise_var, 0.0)) : value_;
}

CVec SoftThresholdDenoiser::denoise(const CVec& v, double noise_var) const {
  const double t = threshold(noise_var);
  CVec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    out(i) = a > t ? v(i) * ((a - t) / a) : cplx{0.0, 0.0};
  }
  return out;
}

CVec SoftThresholdDenoiser::jacobian_vector_product(const CVec& v, const CVec& w, double noise_var) const {
  const double t = threshold(noise_var);
  CVec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a <= t) {
      out(i) = 0.0;
      continue;
    }
    const double re = (std::conj(v(i)) * w(i)).real();
    out(i) = (1.0 - t / a) * w(i) + t * re / (a * a * a) * v(i);
  }
  return out;
}

std::optional<cplx> SoftThresholdDenoiser::analytic_divergence(const CVec& v, double noise_var) const {
  const double t = threshold(noise_var);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > t) acc += 1.0 - t / (2.0 * a);
  }
  return cplx{acc / static_cast<double>(v.size()), 0.0};
}

BgMmseDenoiser::BgMmseDenoiser(double rho, double sigma_x2, std::optional<double> tau2)
    : rho_(rho), sigma_x2_(sigma_x2), tau2_(tau2) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ContractViolation("BG sparsity must lie in (0, 1]");
  if (!(sigma_x2 > 0.0)) throw ContractViolation("BG variance must be > 0");
  if (tau2 && !(*tau2 > 0.0)) throw ContractViolation("BG noise variance must be > 0");
}

double BgMmseDenoiser::tau2_for(double noise_var) const {
  const double t = tau2_ ? *tau2_ : noise_var;
  return std::max(t, 1e-300);
}

std::pair<double, double> BgMmseDenoiser::gain(double s, double tau2) const {
  const double a = sigma_x2_ + tau2;
  const double c = sigma_x2_ / a;
  if (rho_ >= 1.0) return {c, 0.0};
  const double slope = 1.0 / tau2 - 1.0 / a;
  // Log-odds of the inactive component; the posterior activity is a sigmoid of it.
  const double logit = std::log((1.0 - rho_) / rho_) + std::log(a / tau2) - s * slope;
  const double pi = logit > 0.0 ? std::exp(-logit) / (1.0 + std::exp(-logit)) : 1.0 / (1.0 + std::exp(logit));
  return {c * pi, c * pi * (1.0 - pi) * slope};
}

CVec BgMmseDenoiser::denoise(const CVec& v, double noise_var) const {
  const double tau2 = tau2_for(noise_var);
  CVec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = gain(std::norm(v(i)), tau2).first * v(i);
  return out;
}

CVec BgMmseDenoiser::jacobian_vector_product(const CVec& v, const CVec& w, double noise_var) const {
  const double tau2 = tau2_for(noise_var);
  CVec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto [g, dg] = gain(std::norm(v(i)), tau2);
    out(i) = g * w(i) + 2.0 * dg * (std::conj(v(i)) * w(i)).real() * v(i);
  }
  return out;
}

std::optional<cplx> BgMmseDenoiser::analytic_divergence(const CVec& v, double noise_var) const {
  const double tau2 = tau2_for(noise_var);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double s = std::norm(v(i));
    const auto [g, dg] = gain(s, tau2);
    acc += g + s * dg;
  }
  return cplx{acc / static_cast<double>(v.size()), 0.0};
}

AutoencoderDenoiser::AutoencoderDenoiser(std::shared_ptr<const AeWeights> weights) : weights_(std::move(weights)) {
  if (!weights_) throw ContractViolation("autoencoder denoiser needs weights");
  weights_->validate();
}

RVec AutoencoderDenoiser::preprocess(const CVec& h) const {
  const Eigen::Index m = weights_->antenna_count;
  if (h.size() != m) throw ShapeError("autoencoder expects M = " + std::to_string(m) + ", got " + std::to_string(h.size()));
  const double power = h.squaredNorm() / static_cast<double>(m);
  const double scale = power > 0.0 ? 1.0 / std::sqrt(power) : 0.0;
  RVec x(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    x(i) = h(i).real() * scale;
    x(m + i) = h(i).imag() * scale;
  }
  for (Eigen::Index i = 0; i < 2 * m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    x(i) = (x(i) - weights_->mean[k]) / weights_->std[k];
  }
  return x;
}

CVec AutoencoderDenoiser::postprocess(const RVec& x, const CVec& v) const {
  const Eigen::Index m = weights_->antenna_count;
  if (x.size() != 2 * m || v.size() != m) throw ShapeError("autoencoder postprocess size mismatch");
  CVec h(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto re = static_cast<std::size_t>(i);
    const auto im = static_cast<std::size_t>(m + i);
    h(i) = {x(i) * weights_->std[re] + weights_->mean[re], x(m + i) * weights_->std[im] + weights_->mean[im]};
  }
  return ls_scale(h, v) * h;
}

CVec AutoencoderDenoiser::denoise(const CVec& v, double) const {
  if (v.squaredNorm() == 0.0) return CVec::Zero(v.size());
  return postprocess(ae_forward(*weights_, preprocess(v)), v);
}

cplx ls_scale(const CVec& h, const CVec& v) {
  const double n2 = h.squaredNorm();
  if (n2 == 0.0) return {0.0, 0.0};
  return h.dot(v) / n2;
}

cplx divergence_mc(const Denoiser& d, const CVec& v, double noise_var, const DivergenceOptions& opt, Rng& rng) {
  if (!(opt.epsilon > 0.0) || opt.draws < 1) throw ContractViolation("divergence needs epsilon > 0 and draws >= 1");
  const CVec base = d.denoise(v, noise_var);
  cplx acc{0.0, 0.0};
  for (int l = 0; l < opt.draws; ++l) {
    const CVec u = complex_normal_vector(rng, v.size());
    acc += u.dot(d.denoise(v + opt.epsilon * u, noise_var) - base);
  }
  acc /= static_cast<double>(opt.draws) * opt.epsilon * static_cast<double>(v.size());
  if (opt.real_part_only) acc = {acc.real(), 0.0};
  return acc;
}

}  // namespace nfx
