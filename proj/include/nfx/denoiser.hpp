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

#include "nfx/autoencoder.hpp"

#include <memory>
#include <optional>
#include <string>

namespace nfx {

/// Complex-vector denoiser R(v). `noise_var` is the effective noise level of
/// v; adaptive denoisers use it, fixed ones ignore it.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual std::string name() const = 0;
  virtual CVec denoise(const CVec& v, double noise_var) const = 0;

  /// Directional derivative d/de R(v + e w) at e = 0 (e real). Defaults to
  /// central differences with step `fd_step` relative to ||v||.
  virtual CVec jacobian_vector_product(const CVec& v, const CVec& w, double noise_var) const;

  /// (1/M) sum_i dR_i/dv_i in closed form when the denoiser has one.
  virtual std::optional<cplx> analytic_divergence(const CVec&, double) const { return std::nullopt; }

  /// True when the real Jacobian is symmetric, so J^H w equals J w.
  virtual bool symmetric_jacobian() const { return false; }

  double fd_step = 1e-5;
};

class IdentityDenoiser final : public Denoiser {
 public:
  std::string name() const override { return "identity"; }
  CVec denoise(const CVec& v, double) const override { return v; }
  CVec jacobian_vector_product(const CVec&, const CVec& w, double) const override { return w; }
  std::optional<cplx> analytic_divergence(const CVec&, double) const override { return cplx{1.0, 0.0}; }
  bool symmetric_jacobian() const override { return true; }
};

/// R(v) = 0; a degenerate reference used by tests and baselines.
class ZeroDenoiser final : public Denoiser {
 public:
  std::string name() const override { return "zero"; }
  CVec denoise(const CVec& v, double) const override { return CVec::Zero(v.size()); }
  CVec jacobian_vector_product(const CVec& v, const CVec&, double) const override { return CVec::Zero(v.size()); }
  std::optional<cplx> analytic_divergence(const CVec&, double) const override { return cplx{0.0, 0.0}; }
  bool symmetric_jacobian() const override { return true; }
};

/// max(|v_i| - t, 0) v_i / |v_i|. With `adaptive` set, t = alpha sqrt(noise_var).
class SoftThresholdDenoiser final : public Denoiser {
 public:
  static SoftThresholdDenoiser fixed(double t);
  static SoftThresholdDenoiser adaptive(double alpha);

  std::string name() const override { return "soft_threshold"; }
  double threshold(double noise_var) const;
  CVec denoise(const CVec& v, double noise_var) const override;
  CVec jacobian_vector_product(const CVec& v, const CVec& w, double noise_var) const override;
  std::optional<cplx> analytic_divergence(const CVec& v, double noise_var) const override;
  bool symmetric_jacobian() const override { return true; }

 private:
  double value_ = 0.0;
  bool adaptive_ = false;
};

/// Posterior mean under the i.i.d. prior h_i ~ (1 - rho) delta_0 + rho CN(0, sigma_x^2)
/// observed in CN(0, tau^2) noise. Without a fixed tau^2 the call's noise_var is used.
class BgMmseDenoiser final : public Denoiser {
 public:
  BgMmseDenoiser(double rho, double sigma_x2, std::optional<double> tau2 = std::nullopt);

  std::string name() const override { return "bg_mmse"; }
  CVec denoise(const CVec& v, double noise_var) const override;
  CVec jacobian_vector_product(const CVec& v, const CVec& w, double noise_var) const override;
  std::optional<cplx> analytic_divergence(const CVec& v, double noise_var) const override;
  bool symmetric_jacobian() const override { return true; }

  /// Scalar shrinkage g(|v|^2) and its derivative with respect to |v|^2.
  std::pair<double, double> gain(double s, double tau2) const;
  double rho() const { return rho_; }
  double sigma_x2() const { return sigma_x2_; }

 private:
  double tau2_for(double noise_var) const;
  double rho_;
  double sigma_x2_;
  std::optional<double> tau2_;
};

/// Trained autoencoder: postprocess(ae_forward(preprocess(v)), v).
class AutoencoderDenoiser final : public Denoiser {
 public:
  explicit AutoencoderDenoiser(std::shared_ptr<const AeWeights> weights);

  std::string name() const override { return "autoencoder"; }
  CVec denoise(const CVec& v, double noise_var) const override;
  const AeWeights& weights() const { return *weights_; }

  /// Unit average element power, real then imaginary, standardized.
  RVec preprocess(const CVec& h) const;
  /// Inverse standardization and unstacking, then LS amplitude match to v.
  CVec postprocess(const RVec& x, const CVec& v) const;

 private:
  std::shared_ptr<const AeWeights> weights_;
};

/// c = <h, v> / ||h||^2, the complex scalar minimizing ||v - c h||.
cplx ls_scale(const CVec& h, const CVec& v);

struct DivergenceOptions {
  double epsilon = 1e-3;
  int draws = 32;
  bool real_part_only = false;
};

/// (1 / (K eps M)) sum_l u_l^H (R(v + eps u_l) - R(v)) with u_l ~ CN(0, I).
cplx divergence_mc(const Denoiser& d, const CVec& v, double noise_var, const DivergenceOptions& opt, Rng& rng);

}  // namespace nfx
