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


#include "helpers.hpp"

#include "nfx/experiments.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

using namespace nfx;
namespace ex = nfx::experiments;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has(const std::vector<std::string>& diags, const std::string& needle) {
  return std::any_of(diags.begin(), diags.end(), [&](const std::string& d) { return d.find(needle) != std::string::npos; });
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + NFX_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("empty config yields the defaults") {
  const auto v = ex::validate_config("");
  REQUIRE(v.ok());
  CHECK(v.config == ex::default_config());
  CHECK(ex::validate_config("{}").config == ex::default_config());
}

TEST_CASE("diagnostics name the offending path") {
  auto v = ex::validate_config(R"({"solver": {"iteratons": 5}})");
  CHECK(has(v.diagnostics, "solver.iteratons: unknown key"));
  v = ex::validate_config(R"({"seed": "one"})");
  CHECK(has(v.diagnostics, "seed: expected integer"));
  v = ex::validate_config(R"({"nmse_vs_snr": {"snr_db": [0, "x"]}})");
  CHECK(has(v.diagnostics, "nmse_vs_snr.snr_db[1]: expected number"));
  v = ex::validate_config(R"({"experiment": "nope"})");
  CHECK(has(v.diagnostics, "experiment: unknown experiment"));
  v = ex::validate_config(R"({"layout": {"variant": "modular_cylindrical", "tiles": 5}})");
  CHECK(has(v.diagnostics, "layout:"));
  CHECK_FALSE(ex::validate_config("[1, 2]").ok());
  CHECK_FALSE(ex::validate_config("{oops").ok());
}

TEST_CASE("overrides parse JSON values and fall back to strings") {
  const auto v = ex::validate_config("", {"solver.iterations=7", "output_dir=/tmp/x", "nmse_vs_snr.snr_db=[1,2]",
                                          "denoiser.kind=bg_mmse"});
  REQUIRE(v.ok());
  CHECK(v.config["solver"]["iterations"] == 7);
  CHECK(v.config["output_dir"] == "/tmp/x");
  CHECK(v.config["nmse_vs_snr"]["snr_db"].size() == 2);
  CHECK(v.config["denoiser"]["kind"] == "bg_mmse");
  CHECK(has(ex::validate_config("", {"novalue"}).diagnostics, "must look like key=value"));
  CHECK(has(ex::validate_config("", {"seed=1", "seed.x=1"}).diagnostics, "non-object"));
}

TEST_CASE("every listed experiment validates") {
  CHECK(ex::list_experiments().size() == 10);
  for (const auto& e : ex::list_experiments()) {
    const auto v = ex::validate_config(ex::Json{{"experiment", e.name}}.dump());
    CHECK_MESSAGE(v.ok(), e.name);
    CHECK_FALSE(e.description.empty());
  }
}

TEST_CASE("shipped configs validate") {
  const fs::path dir = fs::path(NFX_SOURCE_DIR) / "configs";
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto v = ex::validate_config(slurp(entry.path()));
    CHECK_MESSAGE(v.ok(), entry.path().filename().string(), ": ", v.diagnostics.empty() ? "" : v.diagnostics.front());
    ++seen;
  }
  CHECK(seen >= 1);
}

TEST_CASE("same seed, same bytes") {
  const auto dir = test::scratch("experiments_det");
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / std::to_string(run);
    const auto v = ex::validate_config(R"({"experiment": "nmse_vs_snr"})",
                                       {"nmse_vs_snr.snr_db=[5]", "nmse_vs_snr.instances=2", "nmse_vs_snr.solvers=[\"ls\",\"amp\"]",
                                        "seed=4", "output_dir=" + ex::Json(out.string()).dump()});
    REQUIRE(v.ok());
    const auto manifest = ex::run(v.config);
    CHECK(manifest.contains("outputs"));
    std::string all;
    for (const auto& f : manifest.at("outputs")) all += slurp(out / f.get<std::string>());
    if (run == 0)
      first = all;
    else
      CHECK(all == first);
  }
  CHECK_FALSE(first.empty());
}

TEST_CASE("command-line front end") {
  const auto dir = test::scratch("experiments_cli");
  const auto good = dir / "good.json", bad = dir / "bad.json", log = dir / "log.txt";
  std::ofstream(good) << R"({"experiment": "rayleigh_vs_theta", "rayleigh_vs_theta": {"theta_points": 3, "effective": false}})";
  std::ofstream(bad) << R"({"experimnt": "x"})";

  CHECK(cli("validate \"" + good.string() + "\"", log) == 0);
  CHECK(slurp(log).find("\"theta_points\": 3") != std::string::npos);
  CHECK(cli("validate \"" + bad.string() + "\"", log) == 2);
  CHECK(slurp(log).find("experimnt: unknown key") != std::string::npos);
  CHECK(cli("list-experiments", log) == 0);
  CHECK(slurp(log).find("geometry_search") != std::string::npos);
  CHECK(cli("run \"" + good.string() + "\" --seed 3 --out \"" + (dir / "out").string() + "\"", log) == 0);
  CHECK(fs::exists(dir / "out" / "rayleigh_vs_theta.csv"));
  CHECK(cli("run \"" + good.string() + "\" --override layout.tiles=3", log) == 2);
  CHECK(cli("validate \"" + (dir / "missing.json").string() + "\"", log) == 2);
}

}
