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

#include <algorithm>
#include <cmath>
#include <tuple>

namespace nfx::experiments {

namespace {

struct Downlink {
  int rf_chains;
  int users;
  double power;
  double snr_db;
  WmmseOptions options;
};

Downlink downlink_from(const Context& ctx) {
  const auto& pc = ctx.cfg.at("precoder");
  return {ctx.cfg.at("pilot").at("rf_chains").get<int>(), ctx.cfg.at("pilot").at("users").get<int>(),
          pc.at("power").get<double>(), pc.at("downlink_snr_db").get<double>(), wmmse_from(ctx.cfg)};
}

/// Noise level giving the configured downlink SNR, P mean_k ||h_k||^2 / sigma^2.
double downlink_noise(const CMat& h, const Downlink& dl) {
  return dl.power * h.rowwise().squaredNorm().mean() / db_to_linear(dl.snr_db);
}

WmmseResult precode(const CMat& h, const Downlink& dl, double noise, Rng& rng) {
  const auto init = random_precoder(static_cast<int>(h.cols()), dl.rf_chains, static_cast<int>(h.rows()), dl.power, rng);
  return wmmse_solve(h, init, dl.power, noise, dl.options);
}

CMat los_rows(const ArrayLayout& layout, const std::vector<SourcePoint>& users) {
  CMat h(static_cast<Eigen::Index>(users.size()), layout.size());
  for (std::size_t k = 0; k < users.size(); ++k) h.row(static_cast<Eigen::Index>(k)) = los_channel(layout, users[k]).adjoint();
  return h;
}

ArrayLayout modular(const Context& ctx, double theta, int tiles, double spacing) {
  const auto base = base_layout(ctx);
  return ArrayLayout::modular_cylindrical(base.horizontal_count, base.vertical_count, theta, tiles,
                                          tiles == 1 ? base.horizontal_count : spacing, base.carrier);
}

}  // namespace

void run_rate_heatmap_sectors(Context& ctx) {
  const auto& p = ctx.section("rate_heatmap_sectors");
  const Downlink dl = downlink_from(ctx);
  const auto base = base_layout(ctx);
  const int tiles = ctx.cfg.at("mca").at("tiles").get<int>();
  const auto thetas = theta_grid(p.at("theta_points").get<int>(), true);
  std::vector<double> factors;
  for (const auto& f : p.at("spacing_factors")) factors.push_back(f.get<double>());
  const int sectors = p.at("sectors").get<int>();
  const int drops = p.at("drops").get<int>();
  if (sectors < 1 || drops < 1) throw ConfigError("rate_heatmap_sectors: sectors and drops must be >= 1");
  const SceneConfig scene = scene_from(ctx.cfg);

  // Users per (sector, drop), shared by every geometry.
  std::vector<std::vector<std::vector<SourcePoint>>> users(static_cast<std::size_t>(sectors));
  for (int s = 0; s < sectors; ++s)
    for (int d = 0; d < drops; ++d) {
      Rng rng = make_stream(ctx.seed, kStreamDrops + static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(d));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double lo = -kPi / 2.0 + kPi * s / sectors;
      const double hi = -kPi / 2.0 + kPi * (s + 1) / sectors;
      std::vector<SourcePoint> drop;
      for (int k = 0; k < dl.users; ++k) {
        const double phi = lo + (hi - lo) * unit(rng);
        const double r = 5.0 + 45.0 * unit(rng);
        const double z = scene.user_box.lo.z() + (scene.user_box.hi.z() - scene.user_box.lo.z()) * unit(rng);
        drop.push_back(SourcePoint::from_cartesian(Vec3{r * std::cos(phi), r * std::sin(phi), z}));
      }
      users[static_cast<std::size_t>(s)].push_back(std::move(drop));
    }

  struct Task {
    int sector;
    double theta;
    double factor;
  };
  std::vector<Task> tasks;
  for (int s = 0; s < sectors; ++s)
    for (double th : thetas)
      for (double f : factors) tasks.push_back({s, th, f});
  std::vector<std::tuple<double, double, double>> results(tasks.size());
  parallel_for(tasks.size(), ctx.threads, [&](std::size_t i) {
    const Task& t = tasks[i];
    const double spacing = t.factor * base.horizontal_count / tiles;
    const auto layout = modular(ctx, t.theta, tiles, spacing);
    double rate = 0.0, cond = 0.0;
    for (int d = 0; d < drops; ++d) {
      const auto& drop = users[static_cast<std::size_t>(t.sector)][static_cast<std::size_t>(d)];
      const CMat h = los_rows(layout, drop);
      const double noise = downlink_noise(los_rows(base, drop), dl);
      Rng rng = make_stream(ctx.seed, kStreamPrecoder, static_cast<std::uint64_t>(d));
      rate += precode(h, dl, noise, rng).best_rate;
      cond += normalized_condition_number(h);
    }
    results[i] = {spacing, rate / drops, cond / drops};
  });
  CsvTable t{{"sector", "theta_rad", "tiles", "tile_spacing", "mean_sum_rate", "mean_condition"}, {}};
  for (std::size_t i = 0; i < tasks.size(); ++i)
    t.add({num(tasks[i].sector), num(tasks[i].theta), num(tiles), num(std::get<0>(results[i])),
           num(std::get<1>(results[i])), num(std::get<2>(results[i]))});
  ctx.write("rate_heatmap_sectors.csv", t);
}

void run_rate_cdf_estimated_csi(Context& ctx) {
  const auto& p = ctx.section("rate_cdf_estimated_csi");
  const Downlink dl = downlink_from(ctx);
  const int drops = p.at("drops").get<int>();
  const double uplink_snr = p.at("uplink_snr_db").get<double>();
  const auto estimator = p.at("estimator").get<std::string>();
  const SolverConfig scfg = solver_from(ctx.cfg);
  std::shared_ptr<const Denoiser> den;
  if (estimator == "amp") den = configured_denoiser(ctx);
  if (estimator == "ae_amp") den = autoencoder_denoiser(ctx);
  if (estimator != "ls" && !den) {
    ctx.notes.push_back("estimator " + estimator + " unavailable; falling back to ls");
  } else if (estimator != "ls" && estimator != "amp" && estimator != "ae_amp") {
    throw ConfigError("rate_cdf_estimated_csi.estimator: expected ls, amp or ae_amp");
  }

  struct Sample {
    double estimated, perfect;
  };
  const std::vector<std::pair<std::string, ArrayLayout>> layouts{{"upa", base_layout(ctx)}, {"mca", mca_layout(ctx)}};
  CsvTable t{{"layout", "csi", "drop", "sum_rate", "cdf"}, {}};
  Json means = Json::object();
  for (const auto& [name, layout] : layouts) {
    const auto setup = estimation_setup(ctx, layout);
    std::vector<Sample> samples(static_cast<std::size_t>(drops));
    parallel_for(samples.size(), ctx.threads, [&](std::size_t d) {
      Rng rng = make_stream(ctx.seed, kStreamDrops, d);
      CMat channels;
      const auto insts = uplink_instances(setup, uplink_snr, rng, &channels);
      CMat h_true = channels.adjoint();
      CMat h_est(h_true.rows(), h_true.cols());
      Rng solver_rng = make_stream(ctx.seed, kStreamSolver, d);
      for (std::size_t k = 0; k < insts.size(); ++k) {
        const CVec est = den ? amp(insts[k], *den, scfg, solver_rng).h : ls_estimate(insts[k], scfg.ls_ridge);
        h_est.row(static_cast<Eigen::Index>(k)) = est.adjoint();
      }
      const double noise = downlink_noise(h_true, dl);
      Rng r1 = make_stream(ctx.seed, kStreamPrecoder, d);
      const auto est = precode(h_est, dl, noise, r1);
      Rng r2 = make_stream(ctx.seed, kStreamPrecoder, d);
      const auto perfect = precode(h_true, dl, noise, r2);
      samples[d] = {sum_rate(h_true, est.best, noise, dl.options.bits), perfect.best_rate};
    });
    for (const bool estimated : {true, false}) {
      std::vector<std::pair<double, int>> v;
      for (int d = 0; d < drops; ++d)
        v.push_back({estimated ? samples[static_cast<std::size_t>(d)].estimated : samples[static_cast<std::size_t>(d)].perfect, d});
      std::sort(v.begin(), v.end());
      double mean = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        t.add({name, estimated ? "estimated" : "perfect", num(v[i].second), num(v[i].first),
               num(static_cast<double>(i + 1) / static_cast<double>(v.size()))});
        mean += v[i].first / static_cast<double>(v.size());
      }
      means[name][estimated ? "estimated" : "perfect"] = mean;
    }
  }
  ctx.write("rate_cdf_estimated_csi.csv", t);
  ctx.summary["mean_sum_rate"] = means;
}

void run_geometry_search(Context& ctx) {
  const auto& p = ctx.section("geometry_search");
  const auto base = base_layout(ctx);
  GeometrySearchConfig gcfg;
  gcfg.horizontal_count = base.horizontal_count;
  gcfg.vertical_count = base.vertical_count;
  gcfg.carrier = base.carrier;
  gcfg.max_length = p.at("max_length_factor").get<double>() * (base.horizontal_count - 1) * base.carrier.spacing;
  gcfg.users = ctx.cfg.at("pilot").at("users").get<int>();
  gcfg.drops = p.at("drops").get<int>();
  gcfg.user_box = scene_from(ctx.cfg).user_box;
  gcfg.seed = ctx.seed;

  std::vector<GeometryCandidate> grid;
  for (double theta : theta_grid(p.at("theta_points").get<int>(), true))
    for (const auto& tiles_node : p.at("tile_options")) {
      const int tiles = tiles_node.get<int>();
      if (tiles == 1) {
        grid.push_back({theta, 1, static_cast<double>(gcfg.horizontal_count)});
        continue;
      }
      for (const auto& f : p.at("spacing_factors"))
        grid.push_back({theta, tiles, f.get<double>() * gcfg.horizontal_count / tiles});
    }
  const auto design = geometry_search(grid, gcfg);
  const double upa = mean_condition_number(candidate_layout({0.0, 1, static_cast<double>(gcfg.horizontal_count)}, gcfg),
                                           draw_user_drops(gcfg));
  CsvTable t{{"theta_rad", "tiles", "tile_spacing", "feasible", "reason", "mean_condition"}, {}};
  for (const auto& ev : design.evaluations)
    t.add({num(ev.candidate.theta), num(ev.candidate.tiles), num(ev.candidate.spacing), ev.feasible ? "1" : "0",
           ev.reason, ev.feasible ? num(ev.mean_condition) : std::string()});
  ctx.write("geometry_search.csv", t);
  ctx.summary["best"] = {{"theta_rad", design.best.theta},
                         {"tiles", design.best.tiles},
                         {"tile_spacing", design.best.spacing},
                         {"mean_condition", design.mean_condition}};
  ctx.summary["upa_mean_condition"] = upa;
}

}  // namespace nfx::experiments
