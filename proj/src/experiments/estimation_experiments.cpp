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

#include "nfx/theory.hpp"

#include <cmath>
#include <map>

namespace nfx::experiments {

namespace {

struct Solvers {
  SolverConfig cfg;
  std::shared_ptr<const Denoiser> analytic;  // configured denoiser (may be null for AE kind)
  std::shared_ptr<const Denoiser> ae;        // null without weights
};

Solvers make_solvers(Context& ctx) {
  Solvers s{solver_from(ctx.cfg), configured_denoiser(ctx), autoencoder_denoiser(ctx)};
  return s;
}

// Filters the requested solver names down to those runnable here, noting the rest.
std::vector<std::string> runnable(Context& ctx, const Solvers& s, const Json& names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    const auto name = n.get<std::string>();
    const bool needs_ae = name.rfind("ae_", 0) == 0;
    const bool needs_analytic = name == "pnp" || name == "amp" || name == "gd";
    if (needs_ae && !s.ae) {
      ctx.notes.push_back("solver " + name + " skipped: no autoencoder weight file (denoiser.weights)");
      continue;
    }
    if (needs_analytic && !s.analytic) {
      ctx.notes.push_back("solver " + name + " skipped: configured denoiser unavailable");
      continue;
    }
    static const std::vector<std::string> known{"ls", "pnp", "amp", "gd", "ae_ls", "ae_amp", "ae_pnp"};
    if (std::find(known.begin(), known.end(), name) == known.end()) throw ConfigError("unknown solver '" + name + "'");
    out.push_back(name);
  }
  return out;
}

EstimateReport solve(const std::string& name, const MeasurementInstance& inst, const Solvers& s,
                     const SolverConfig& cfg, Rng& rng) {
  if (name == "ls" || name == "ae_ls") {
    EstimateReport r;
    r.solver = name;
    r.h = name == "ls" ? ls_estimate(inst, cfg.ls_ridge) : ae_ls(inst, *s.ae, cfg.ls_ridge);
    r.iterations = 1;
    r.hyperparameters = {{"ls_ridge", cfg.ls_ridge}};
    r.final_metrics = metrics(r.h, inst.truth);
    r.trajectory.push_back(*r.final_metrics);
    return r;
  }
  EstimateReport r;
  if (name == "pnp") r = pnp_hqs(inst, *s.analytic, cfg);
  if (name == "ae_pnp") r = pnp_hqs(inst, *s.ae, cfg);
  if (name == "amp") r = amp(inst, *s.analytic, cfg, rng);
  if (name == "ae_amp") r = amp(inst, *s.ae, cfg, rng);
  if (name == "gd") r = gradient_descent(inst, *s.analytic, cfg);
  r.solver = name;
  return r;
}

// Per-solver hyperparameter adjustment from a validation set when tuning is on.
SolverConfig tuned(Context& ctx, const std::string& name, const Solvers& s, const std::vector<MeasurementInstance>& val) {
  SolverConfig cfg = s.cfg;
  if (!ctx.cfg.at("solver").at("tune").get<bool>() || val.empty()) return cfg;
  std::vector<double> grid;
  for (const auto& g : ctx.cfg.at("solver").at("grid")) grid.push_back(g.get<double>());
  if (name == "pnp" || name == "ae_pnp") {
    const Denoiser& d = name == "pnp" ? *s.analytic : *s.ae;
    cfg.mu = grid_tune(
                 [&](double mu, const MeasurementInstance& inst) {
                   SolverConfig c = cfg;
                   c.mu = mu;
                   return pnp_hqs(inst, d, c).h;
                 },
                 grid, val)
                 .best;
  } else if (name == "gd") {
    cfg.lambda = grid_tune(
                     [&](double lambda, const MeasurementInstance& inst) {
                       SolverConfig c = cfg;
                       c.lambda = lambda;
                       return gradient_descent(inst, *s.analytic, c).h;
                     },
                     grid, val)
                     .best;
  } else if (name == "ls" || name == "ae_ls") {
    cfg.ls_ridge = grid_tune(
                       [&](double ridge, const MeasurementInstance& inst) {
                         return name == "ls" ? ls_estimate(inst, ridge) : ae_ls(inst, *s.ae, ridge);
                       },
                       grid, val)
                       .best;
  }
  return cfg;
}

std::vector<MeasurementInstance> draw_instances(const EstimationSetup& setup, double snr_db, int count,
                                                std::uint64_t seed, std::uint64_t stream, int threads) {
  const int k_users = setup.pilot.users;
  const int draws = (count + k_users - 1) / k_users;
  std::vector<std::vector<MeasurementInstance>> per(static_cast<std::size_t>(draws));
  parallel_for(per.size(), threads, [&](std::size_t d) {
    Rng rng = make_stream(seed, stream, d);
    per[d] = uplink_instances(setup, snr_db, rng);
  });
  std::vector<MeasurementInstance> out;
  for (auto& v : per)
    for (auto& inst : v)
      if (static_cast<int>(out.size()) < count) out.push_back(std::move(inst));
  return out;
}

double db(double x) { return 10.0 * std::log10(std::max(x, 1e-300)); }

struct Scores {
  std::vector<EstimateReport> reports;  // per instance
};

Scores score_solver(Context& ctx, const std::string& name, const Solvers& s, const SolverConfig& cfg,
                    const std::vector<MeasurementInstance>& insts, std::uint64_t stream) {
  Scores out;
  out.reports.resize(insts.size());
  parallel_for(insts.size(), ctx.threads, [&](std::size_t i) {
    Rng rng = make_stream(ctx.seed, stream, i);
    out.reports[i] = solve(name, insts[i], s, cfg, rng);
  });
  return out;
}

}  // namespace

void run_nmse_vs_snr(Context& ctx) {
  const auto& p = ctx.section("nmse_vs_snr");
  const Solvers s = make_solvers(ctx);
  const auto names = runnable(ctx, s, p.at("solvers"));
  const auto setup = estimation_setup(ctx, base_layout(ctx));
  const int count = p.at("instances").get<int>();

  CsvTable rows{{"snr_db", "instance", "solver", "nmse", "nmse_db", "rho", "iterations", "stopped_early"}, {}};
  CsvTable summary{{"snr_db", "solver", "median_nmse_db", "median_rho", "instances"}, {}};
  Json medians = Json::object();
  std::size_t snr_index = 0;
  for (const auto& snr_node : p.at("snr_db")) {
    const double snr = snr_node.get<double>();
    const auto insts = draw_instances(setup, snr, count, ctx.seed, kStreamInstances + snr_index, ctx.threads);
    const auto val = draw_instances(setup, snr, std::max(1, count / 4), ctx.seed, kStreamInstances + 0x80 + snr_index,
                                    ctx.threads);
    for (std::size_t n = 0; n < names.size(); ++n) {
      const auto cfg = tuned(ctx, names[n], s, val);
      const auto sc = score_solver(ctx, names[n], s, cfg, insts, kStreamSolver + 16 * snr_index + n);
      std::vector<double> nmse, rho;
      for (std::size_t i = 0; i < insts.size(); ++i) {
        const auto& r = sc.reports[i];
        const Metrics m = r.final_metrics.value_or(metrics(r.h, insts[i].truth));
        nmse.push_back(m.nmse);
        rho.push_back(m.rho);
        rows.add({num(snr), num(i), names[n], num(m.nmse), num(db(m.nmse)), num(m.rho), num(r.iterations),
                  (r.stalled || r.diverged || r.failed) ? "1" : "0"});
      }
      const double med = db(median(nmse));
      summary.add({num(snr), names[n], num(med), num(median(rho)), num(insts.size())});
      medians[names[n]][num(snr)] = med;
    }
    ++snr_index;
  }
  ctx.write("nmse_vs_snr.csv", rows);
  ctx.write("nmse_vs_snr_summary.csv", summary);
  ctx.summary["median_nmse_db"] = medians;
}

void run_correlation_vs_iteration(Context& ctx) {
  const auto& p = ctx.section("correlation_vs_iteration");
  const Solvers s = make_solvers(ctx);
  const auto names = runnable(ctx, s, p.at("solvers"));
  const auto setup = estimation_setup(ctx, base_layout(ctx));
  const double snr = p.at("snr_db").get<double>();
  const auto insts = draw_instances(setup, snr, p.at("instances").get<int>(), ctx.seed, kStreamInstances, ctx.threads);
  CsvTable t{{"solver", "iteration", "median_rho", "median_nmse_db"}, {}};
  for (std::size_t n = 0; n < names.size(); ++n) {
    const auto sc = score_solver(ctx, names[n], s, s.cfg, insts, kStreamSolver + n);
    std::size_t longest = 0;
    for (const auto& r : sc.reports) longest = std::max(longest, r.trajectory.size());
    for (std::size_t it = 0; it < longest; ++it) {
      std::vector<double> rho, nmse;
      for (const auto& r : sc.reports) {
        if (r.trajectory.empty()) continue;
        // Early-stopped runs hold their final value.
        const Metrics& m = r.trajectory[std::min(it, r.trajectory.size() - 1)];
        rho.push_back(m.rho);
        nmse.push_back(m.nmse);
      }
      t.add({names[n], num(it + 1), num(median(rho)), num(db(median(nmse)))});
    }
  }
  ctx.write("correlation_vs_iteration.csv", t);
}

void run_se_replica_compare(Context& ctx) {
  const auto& p = ctx.section("se_replica_compare");
  const int m = p.at("antennas").get<int>();
  const double delta = p.at("delta").get<double>();
  const int rows = static_cast<int>(std::lround(delta * m));
  if (rows < 1) throw ConfigError("se_replica_compare: delta * antennas must be >= 1");
  const int trials = p.at("trials").get<int>();
  const int iters = p.at("iterations").get<int>();
  const BgPrior prior{p.at("rho").get<double>(), p.at("sigma_x2").get<double>()};
  const double alpha = p.at("soft_threshold_alpha").get<double>();
  const BgMmseDenoiser bg(prior.rho, prior.sigma_x2);
  const auto st = SoftThresholdDenoiser::adaptive(alpha);

  auto draw_bg = [&](Rng& rng) {
    std::bernoulli_distribution active(prior.rho);
    CVec h = CVec::Zero(m);
    for (int i = 0; i < m; ++i)
      if (active(rng)) h(i) = complex_normal(rng, prior.sigma_x2);
    return h;
  };
  // Soft-threshold MSE by Monte Carlo with common random numbers per tau^2.
  std::vector<CVec> mc_channels;
  {
    Rng rng = make_stream(ctx.seed, kStreamSe, 0xffff);
    for (int i = 0; i < 40; ++i) mc_channels.push_back(draw_bg(rng));
  }
  auto st_mse = [&](double tau2) {
    Rng rng = make_stream(ctx.seed, kStreamSe, 0xfffe);
    return empirical_mse(st, mc_channels, tau2, 4, rng);
  };

  SolverConfig cfg;
  cfg.iterations = iters;
  cfg.damping = 1.0;
  cfg.stall_window = iters + 1;

  CsvTable t{{"snr_db", "delta", "amp_bg_nmse_db", "se_bg_nmse_db", "replica_nmse_db", "amp_st_nmse_db",
              "se_st_nmse_db"},
             {}};
  CsvTable curves{{"snr_db", "denoiser", "iteration", "tau2", "nmse_db"}, {}};
  std::size_t si = 0;
  for (const auto& snr_node : p.at("snr_db")) {
    const double snr = snr_node.get<double>();
    const double noise = prior.power() / (delta * db_to_linear(snr));
    std::vector<double> bg_nmse(static_cast<std::size_t>(trials)), st_nmse(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), ctx.threads, [&](std::size_t i) {
      Rng rng = make_stream(ctx.seed, kStreamSe + 1 + si, i);
      CVec h = draw_bg(rng);
      while (h.norm() == 0.0) h = draw_bg(rng);
      const auto inst = iid_gaussian_instance(h, rows, noise, rng);
      bg_nmse[i] = amp(inst, bg, cfg, rng).final_metrics->nmse;
      st_nmse[i] = amp(inst, st, cfg, rng).final_metrics->nmse;
    });
    const auto se_bg = state_evolution([&](double t2) { return bg_mmse(t2, prior.rho, prior.sigma_x2); }, delta,
                                       noise, prior.power(), iters, "bg_mmse");
    const auto se_st = state_evolution(st_mse, delta, noise, prior.power(), iters, "soft_threshold");
    const auto rep = replica_fixed_point(prior, delta, noise);
    t.add({num(snr), num(delta), num(db(median(bg_nmse))), num(db(se_bg.mse.back() / prior.power())),
           num(db(rep.mmse / prior.power())), num(db(median(st_nmse))), num(db(se_st.mse.back() / prior.power()))});
    for (const auto* c : {&se_bg, &se_st})
      for (std::size_t it = 0; it < c->mse.size(); ++it)
        curves.add({num(snr), c->denoiser, num(it), num(c->tau2[it]), num(db(c->mse[it] / prior.power()))});
    ++si;
  }
  ctx.write("se_replica_compare.csv", t);
  ctx.write("se_curves.csv", curves);
}

void run_nmse_upa_vs_mca(Context& ctx) {
  const auto& p = ctx.section("nmse_upa_vs_mca");
  const Solvers s = make_solvers(ctx);
  Json names = Json::array({"ls", "amp", "ae_amp"});
  const auto solvers = runnable(ctx, s, names);
  const int count = p.at("instances").get<int>();
  CsvTable t{{"layout", "snr_db", "solver", "median_nmse_db", "median_rho"}, {}};
  const std::vector<std::pair<std::string, ArrayLayout>> layouts{{"upa", base_layout(ctx)}, {"mca", mca_layout(ctx)}};
  for (std::size_t li = 0; li < layouts.size(); ++li) {
    const auto setup = estimation_setup(ctx, layouts[li].second);
    std::size_t si = 0;
    for (const auto& snr_node : p.at("snr_db")) {
      const double snr = snr_node.get<double>();
      // Same stream for both layouts: identical scene draws, different geometry.
      const auto insts = draw_instances(setup, snr, count, ctx.seed, kStreamInstances + si, ctx.threads);
      for (std::size_t n = 0; n < solvers.size(); ++n) {
        const auto sc = score_solver(ctx, solvers[n], s, s.cfg, insts, kStreamSolver + 16 * si + n);
        std::vector<double> nmse, rho;
        for (std::size_t i = 0; i < insts.size(); ++i) {
          const Metrics m = metrics(sc.reports[i].h, insts[i].truth);
          nmse.push_back(m.nmse);
          rho.push_back(m.rho);
        }
        t.add({layouts[li].first, num(snr), solvers[n], num(db(median(nmse))), num(median(rho))});
      }
      ++si;
    }
  }
  ctx.write("nmse_upa_vs_mca.csv", t);
}

}  // namespace nfx::experiments
