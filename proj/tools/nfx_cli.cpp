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

// Command-line front end for the experiment runner.

#include "nfx/experiments.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

namespace ex = nfx::experiments;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nfx::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int report(const ex::Validation& v) {
  for (const auto& d : v.diagnostics) std::cerr << "error: " << d << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nfx: near-field XL-MIMO experiments"};
  app.require_subcommand(1);

  std::string run_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", run_path, "Config file")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out_dir, "Override the output directory");
  run->add_option("--override", overrides, "Set a config field, e.g. solver.iterations=40")->take_all();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
  validate->add_option("config", validate_path, "Config file")->required();

  auto* list = app.add_subcommand("list-experiments", "List the available experiments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& e : ex::list_experiments()) std::cout << e.name << "\t" << e.description << "\n";
      return 0;
    }
    if (*validate) {
      const auto v = ex::validate_config(slurp(validate_path));
      if (!v.ok()) return report(v);
      std::cout << v.config.dump(2) << "\n";
      return 0;
    }
    if (seed) overrides.push_back("seed=" + std::to_string(*seed));
    if (!out_dir.empty()) overrides.push_back("output_dir=" + ex::Json(out_dir).dump());
    const auto v = ex::validate_config(slurp(run_path), overrides);
    if (!v.ok()) return report(v);
    const auto manifest = ex::run(v.config);
    std::cout << "wrote " << manifest.at("outputs").size() << " file(s) to "
              << v.config.at("output_dir").get<std::string>() << " in " << manifest.at("wall_seconds").get<double>()
              << " s\n";
    return 0;
  } catch (const nfx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
