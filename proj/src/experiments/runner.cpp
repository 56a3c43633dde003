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

#include "internal.hpp"

#include <chrono>
#include <fstream>
#include <map>

#ifndef NFX_SOURCE_REVISION
#define NFX_SOURCE_REVISION "unknown"
#endif

namespace nfx::experiments {

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> list{
      {"rayleigh_vs_theta", "normal/side theoretical and effective Rayleigh distance versus curvature"},
      {"nearfield_area", "near-field area versus curvature, plus Rayleigh distance versus azimuth"},
      {"boundary_cloud_3d", "3-D near-field boundary samples of the configured layout"},
      {"nmse_vs_snr", "channel estimation NMSE versus uplink SNR for each solver"},
      {"correlation_vs_iteration", "correlation coefficient versus iteration for iterative solvers"},
      {"se_replica_compare", "empirical AMP against state evolution and the replica prediction"},
      {"rate_heatmap_sectors", "WMMSE sum rate over MCA curvature and tile spacing per user sector"},
      {"nmse_upa_vs_mca", "estimation NMSE of the UPA against the configured MCA"},
      {"rate_cdf_estimated_csi", "sum-rate samples under estimated CSI for UPA and MCA"},
      {"geometry_search", "mean condition number over (theta, I, S) and the selected design"},
  };
  return list;
}

namespace {

using Runner = void (*)(Context&);

const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> r{
      {"rayleigh_vs_theta", run_rayleigh_vs_theta},
      {"nearfield_area", run_nearfield_area},
      {"boundary_cloud_3d", run_boundary_cloud_3d},
      {"nmse_vs_snr", run_nmse_vs_snr},
      {"correlation_vs_iteration", run_correlation_vs_iteration},
      {"se_replica_compare", run_se_replica_compare},
      {"rate_heatmap_sectors", run_rate_heatmap_sectors},
      {"nmse_upa_vs_mca", run_nmse_upa_vs_mca},
      {"rate_cdf_estimated_csi", run_rate_cdf_estimated_csi},
      {"geometry_search", run_geometry_search},
  };
  return r;
}

}  // namespace

std::vector<double> theta_grid(int points, bool include_zero) {
  std::vector<double> g;
  if (points < 1) return g;
  if (include_zero) {
    if (points == 1) return {0.0};
    for (int i = 0; i < points; ++i) g.push_back(kPi * i / (points - 1));
  } else {
    for (int i = 1; i <= points; ++i) g.push_back(kPi * i / points);
  }
  return g;
}

ArrayLayout base_layout(const Context& ctx) { return layout_from(ctx.cfg.at("layout"), carrier_from(ctx.cfg)); }

ArrayLayout mca_layout(const Context& ctx) {
  Json node = ctx.cfg.at("layout");
  node["variant"] = "modular_cylindrical";
  for (auto it = ctx.cfg.at("mca").begin(); it != ctx.cfg.at("mca").end(); ++it) node[it.key()] = it.value();
  return layout_from(node, carrier_from(ctx.cfg), "mca");
}

EstimationSetup estimation_setup(const Context& ctx, const ArrayLayout& layout) {
  EstimationSetup s{layout, pilot_from(ctx.cfg), scene_from(ctx.cfg)};
  s.pilot.validate(layout.size());
  return s;
}

std::vector<MeasurementInstance> uplink_instances(const EstimationSetup& s, double snr_db, Rng& rng, CMat* channels) {
  const int m = s.layout.size();
  const int k_users = s.pilot.users;
  CMat h(m, k_users);
  for (int k = 0; k < k_users; ++k) {
    CVec col;
    for (int attempt = 0; attempt < 1000 && (col.size() == 0 || col.norm() == 0.0); ++attempt)
      col = assemble_channel(s.layout, sample_scene(s.scene, m, rng)).h;
    if (col.norm() == 0.0) throw NumericalError("every sampled scene was fully masked");
    h.col(k) = col;
  }
  // Per-user power control: received per-antenna SNR equals snr_db for everyone.
  PilotConfig pilot = s.pilot;
  pilot.powers.resize(static_cast<std::size_t>(k_users));
  for (int k = 0; k < k_users; ++k)
    pilot.powers[static_cast<std::size_t>(k)] = db_to_linear(snr_db) * pilot.noise_var * m / h.col(k).squaredNorm();
  std::vector<CombinerBlock> combiners;
  for (int b = 0; b < pilot.blocks(); ++b) combiners.push_back(build_combiner(m, pilot.rf_chains, rng));
  const auto obs = simulate_uplink(h, combiners, pilot, rng);
  std::vector<MeasurementInstance> out;
  for (int k = 0; k < k_users; ++k) {
    auto inst = despread_and_whiten(obs, pilot, k);
    inst.truth = h.col(k);
    out.push_back(std::move(inst));
  }
  if (channels) *channels = h;
  return out;
}

std::shared_ptr<const Denoiser> autoencoder_denoiser(const Context& ctx) {
  const auto path = ctx.cfg.at("denoiser").at("weights").get<std::string>();
  if (path.empty()) return nullptr;
  return std::make_shared<AutoencoderDenoiser>(std::make_shared<const AeWeights>(read_ae_weights(path)));
}

std::shared_ptr<const Denoiser> configured_denoiser(const Context& ctx) {
  const auto& d = ctx.cfg.at("denoiser");
  const auto kind = d.at("kind").get<std::string>();
  if (kind == "identity") return std::make_shared<IdentityDenoiser>();
  if (kind == "soft_threshold")
    return std::make_shared<SoftThresholdDenoiser>(SoftThresholdDenoiser::adaptive(d.at("threshold_alpha").get<double>()));
  if (kind == "bg_mmse")
    return std::make_shared<BgMmseDenoiser>(d.at("bg_rho").get<double>(), d.at("bg_sigma_x2").get<double>());
  return autoencoder_denoiser(ctx);
}

Json run(const Json& cfg) {
  const Validation v = validate_config(cfg.dump());
  if (!v.ok()) {
    std::string msg = "invalid configuration:";
    for (const auto& d : v.diagnostics) msg += "\n  " + d;
    throw ConfigError(msg);
  }
  Context ctx;
  ctx.cfg = v.config;
  ctx.seed = ctx.cfg.at("seed").get<std::uint64_t>();
  ctx.threads = ctx.cfg.at("threads").get<int>();
  if (ctx.threads == 0) ctx.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  ctx.out = ctx.cfg.at("output_dir").get<std::string>();
  std::filesystem::create_directories(ctx.out);

  const auto name = ctx.cfg.at("experiment").get<std::string>();
  const auto start = std::chrono::steady_clock::now();
  registry().at(name)(ctx);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json manifest;
  manifest["experiment"] = name;
  manifest["source_revision"] = NFX_SOURCE_REVISION;
  manifest["config"] = ctx.cfg;
  manifest["wall_seconds"] = wall;
  manifest["outputs"] = ctx.files;
  manifest["summary"] = ctx.summary;
  manifest["notes"] = ctx.notes;
  const auto tmp = ctx.out / "manifest.json.tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f << manifest.dump(2) << '\n';
    if (!f) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, ctx.out / "manifest.json");
  return manifest;
}

}  // namespace nfx::experiments
