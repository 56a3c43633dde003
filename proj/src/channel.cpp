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

#include "nfx/channel.hpp"

#include <cmath>

namespace nfx {

RVec VisibilityMask::expand(int m) const {
  const int n = subarray_count();
  if (n <= 0 || m % n != 0) throw ConfigError("visibility block count must divide the antenna count");
  const int block = m / n;
  RVec out(m);
  for (int i = 0; i < m; ++i) out(i) = bits[static_cast<std::size_t>(i / block)] ? 1.0 : 0.0;
  return out;
}

bool VisibilityMask::any() const {
  for (bool b : bits)
    if (b) return true;
  return false;
}

void Scene::validate(int m) const {
  if (!(user.r > 0.0)) throw ContractViolation("user range must be > 0");
  if (visibility.size() != scatterers.size() + 1)
    throw ContractViolation("scene needs one visibility mask per path (LoS first)");
  for (const auto& mask : visibility) mask.expand(m);
  for (const auto& s : scatterers)
    if (!(s.extra_gain >= 0.0)) throw ContractViolation("scatterer extra gain must be >= 0");
}

std::vector<Box> SceneConfig::default_scatterer_boxes() {
  return {
      Box{{52.0, -30.0, 0.0}, {57.0, -25.0, 2.0}},
      Box{{52.0, 25.0, 0.0}, {57.0, 30.0, 2.0}},
      Box{{25.0, 52.0, 0.0}, {30.0, 57.0, 2.0}},
      Box{{25.0, -57.0, 0.0}, {30.0, -52.0, 2.0}},
  };
}

void SceneConfig::validate() const {
  auto check_box = [](const Box& b, const char* what) {
    if (!(b.lo.array() <= b.hi.array()).all()) throw ConfigError(std::string(what) + ": lower corner exceeds upper corner");
  };
  check_box(user_box, "user box");
  if (user_box.hi.x() <= 0.0) throw ConfigError("user box must extend into x > 0");
  for (const auto& b : scatterer_boxes) check_box(b, "scatterer box");
  if (min_scatterers < 0 || max_scatterers < min_scatterers)
    throw ConfigError("scatterer count range must satisfy 0 <= min <= max");
  if (max_scatterers > 0 && scatterer_boxes.empty()) throw ConfigError("scatterers requested but no scatterer boxes");
  if (!(visibility_probability >= 0.0 && visibility_probability <= 1.0))
    throw ConfigError("visibility probability must lie in [0, 1]");
  if (visibility_block < 1) throw ConfigError("visibility block must be >= 1");
  if (!(extra_gain >= 0.0)) throw ConfigError("extra gain must be >= 0");
}

namespace {

// Spherical per-antenna term sqrt(U_m) exp(-j k r_m) / r_m from a point source.
CVec spherical_term(const ArrayLayout& layout, const Vec3& source) {
  const Eigen::Matrix3Xd p = antenna_positions(layout);
  const double kappa = layout.carrier.wavenumber();
  const double min_dist = layout.carrier.spacing / 10.0;
  CVec h(p.cols());
  for (Eigen::Index m = 0; m < p.cols(); ++m) {
    const double r = (source - p.col(m)).norm();
    if (r < min_dist) throw DegenerateGeometry("source coincides with antenna " + std::to_string(m));
    h(m) = std::sqrt(layout.element_gain_at(static_cast<int>(m))) / r * std::polar(1.0, -kappa * r);
  }
  return h;
}

}  // namespace

CVec los_channel(const ArrayLayout& layout, const SourcePoint& user) {
  if (!(user.r > 0.0)) throw ContractViolation("user range must be > 0");
  return spherical_term(layout, user.cartesian());
}

CVec nlos_component(const ArrayLayout& layout, const SourcePoint& user, const Scatterer& scatterer) {
  const double r_us = (scatterer.position - user.cartesian()).norm();
  if (r_us < layout.carrier.spacing / 10.0) throw DegenerateGeometry("scatterer coincides with the user");
  const cplx hop = scatterer.extra_gain * scatterer.alpha * std::polar(1.0 / r_us, -layout.carrier.wavenumber() * r_us);
  if (hop == cplx{0.0, 0.0}) return CVec::Zero(layout.size());
  return hop * spherical_term(layout, scatterer.position);
}

CVec apply_visibility(const CVec& h, const VisibilityMask& mask) {
  return h.cwiseProduct(mask.expand(static_cast<int>(h.size())).cast<cplx>());
}

ChannelRealization assemble_channel(const ArrayLayout& layout, const Scene& scene) {
  const int m = layout.size();
  scene.validate(m);
  ChannelRealization out;
  out.scene = scene;
  out.h = CVec::Zero(m);
  if (scene.visibility[0].any()) out.h += apply_visibility(los_channel(layout, scene.user), scene.visibility[0]);
  for (std::size_t l = 0; l < scene.scatterers.size(); ++l) {
    if (!scene.visibility[l + 1].any()) continue;
    out.h += apply_visibility(nlos_component(layout, scene.user, scene.scatterers[l]), scene.visibility[l + 1]);
  }
  return out;
}

Scene sample_scene(const SceneConfig& cfg, int antenna_count, Rng& rng) {
  cfg.validate();
  if (antenna_count % cfg.visibility_block != 0)
    throw ConfigError("visibility block size " + std::to_string(cfg.visibility_block) + " does not divide M = " +
                      std::to_string(antenna_count));
  const int blocks = antenna_count / cfg.visibility_block;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto in_box = [&](const Box& b) {
    Vec3 p;
    for (int i = 0; i < 3; ++i) p(i) = b.lo(i) + (b.hi(i) - b.lo(i)) * unit(rng);
    return p;
  };
  auto draw_mask = [&]() {
    VisibilityMask mask;
    mask.bits.resize(static_cast<std::size_t>(blocks));
    for (int i = 0; i < blocks; ++i) mask.bits[static_cast<std::size_t>(i)] = unit(rng) < cfg.visibility_probability;
    return mask;
  };

  Scene scene;
  scene.user = SourcePoint::from_cartesian(in_box(cfg.user_box));
  const int count = std::uniform_int_distribution<int>(cfg.min_scatterers, cfg.max_scatterers)(rng);
  std::uniform_int_distribution<std::size_t> pick(0, cfg.scatterer_boxes.empty() ? 0 : cfg.scatterer_boxes.size() - 1);
  for (int l = 0; l < count; ++l) {
    Scatterer s;
    s.position = in_box(cfg.scatterer_boxes[pick(rng)]);
    s.extra_gain = cfg.extra_gain;
    s.alpha = complex_normal(rng, 1.0);
    scene.scatterers.push_back(s);
  }
  scene.visibility.push_back(cfg.mask_los ? draw_mask() : VisibilityMask::all_visible(blocks));
  for (int l = 0; l < count; ++l) scene.visibility.push_back(draw_mask());
  return scene;
}

}  // namespace nfx
