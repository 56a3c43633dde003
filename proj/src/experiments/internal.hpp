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

#include "nfx/experiments.hpp"

#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace nfx::experiments {

// ---- CSV ---------------------------------------------------------------

std::string csv_escape(const std::string& field);
/// Shortest round-trippable-enough fixed format; NaN and inf become empty cells.
std::string num(double v);
std::string num(long long v);
inline std::string num(int v) { return num(static_cast<long long>(v)); }
inline std::string num(std::size_t v) { return num(static_cast<long long>(v)); }

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string render() const;
};

// ---- run context -------------------------------------------------------

struct Context {
  Json cfg;
  std::filesystem::path out;
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<std::string> files;
  std::vector<std::string> notes;
  Json summary = Json::object();

  const Json& section(const std::string& name) const { return cfg.at(name); }
  void write(const std::string& name, const CsvTable& table);
};

/// Runs fn(i) for i in [0, n) on `threads` workers. Results must be written to
/// per-index slots so output order never depends on scheduling.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---- shared scenario helpers ------------------------------------------

/// Stable stream ids so each experiment draws from its own substreams.
enum Stream : std::uint64_t {
  kStreamInstances = 0x100,
  kStreamSolver = 0x200,
  kStreamSe = 0x300,
  kStreamPrecoder = 0x400,
  kStreamDrops = 0x500,
};

struct EstimationSetup {
  ArrayLayout layout;
  PilotConfig pilot;
  SceneConfig scene;
};

EstimationSetup estimation_setup(const Context& ctx, const ArrayLayout& layout);
ArrayLayout mca_layout(const Context& ctx);
ArrayLayout base_layout(const Context& ctx);

/// One uplink draw: K scenes, power-controlled pilots at `snr_db`, and the K
/// whitened per-user instances (each carrying its ground truth).
std::vector<MeasurementInstance> uplink_instances(const EstimationSetup& s, double snr_db, Rng& rng,
                                                  CMat* channels = nullptr);

/// Configured denoiser; AE kinds return nullptr when no weight file is given.
std::shared_ptr<const Denoiser> configured_denoiser(const Context& ctx);
std::shared_ptr<const Denoiser> autoencoder_denoiser(const Context& ctx);

std::vector<double> theta_grid(int points, bool include_zero);

// ---- experiments -------------------------------------------------------

void run_rayleigh_vs_theta(Context& ctx);
void run_nearfield_area(Context& ctx);
void run_boundary_cloud_3d(Context& ctx);
void run_nmse_vs_snr(Context& ctx);
void run_correlation_vs_iteration(Context& ctx);
void run_se_replica_compare(Context& ctx);
void run_rate_heatmap_sectors(Context& ctx);
void run_nmse_upa_vs_mca(Context& ctx);
void run_rate_cdf_estimated_csi(Context& ctx);
void run_geometry_search(Context& ctx);

}  // namespace nfx::experiments
