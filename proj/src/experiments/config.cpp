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

#include "nfx/experiments.hpp"

#include <cmath>
#include <set>

namespace nfx::experiments {

namespace {

Json box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  return Json{{"lo", Json(lo)}, {"hi", Json(hi)}};
}

}  // namespace

Json default_config() {
  Json c;
  c["experiment"] = "rayleigh_vs_theta";
  c["seed"] = 1;
  c["output_dir"] = "nfx_out";
  c["threads"] = 1;
  c["carrier"] = {{"frequency_hz", 6.8e9}, {"spacing_wavelengths", 0.5}};
  c["layout"] = {{"variant", "upa"}, {"horizontal_count", 12}, {"vertical_count", 8},
                 {"theta", 0.0},     {"tiles", 1},             {"tile_spacing", 12.0}};
  // Comparison MCA used by the UPA-versus-MCA experiments; shares M_h, M_v with `layout`.
  c["mca"] = {{"theta", kPi / 2.0}, {"tiles", 2}, {"tile_spacing", 12.0}};
  c["pilot"] = {{"users", 4}, {"pilot_length", 12}, {"rf_chains", 16}, {"noise_var", 1.0}};
  Json boxes = Json::array();
  for (const auto& b : SceneConfig::default_scatterer_boxes())
    boxes.push_back(box({b.lo.x(), b.lo.y(), b.lo.z()}, {b.hi.x(), b.hi.y(), b.hi.z()}));
  c["scene"] = {{"user_box", box({5.0, -50.0, 0.0}, {50.0, 50.0, 4.0})},
                {"scatterer_boxes", boxes},
                {"min_scatterers", 1},
                {"max_scatterers", 3},
                {"visibility_probability", 0.8},
                {"mask_los", true},
                {"visibility_block", 24},
                {"extra_gain", 1.0}};
  c["denoiser"] = {{"kind", "soft_threshold"}, {"weights", ""},    {"threshold_alpha", 1.0},
                   {"bg_rho", 0.1},            {"bg_sigma_x2", 1.0}};
  c["solver"] = {{"iterations", 30},   {"damping", 0.8},  {"step", 0.0},
                 {"lambda", 1.0},      {"mu", 1.0},       {"ls_ridge", 1e-3},
                 {"mc_epsilon", 1e-3}, {"mc_draws", 8},   {"analytic_divergence", true},
                 {"tune", false},      {"grid", Json::array({1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4})}};
  c["precoder"] = {{"power", 1.0},         {"downlink_snr_db", 10.0}, {"outer_iterations", 30},
                   {"inner_iterations", 10}, {"digital_sweeps", 1},     {"rate_base", "bits"}};

  c["rayleigh_vs_theta"] = {{"antennas", 128}, {"theta_points", 32}, {"effective", true}, {"threshold", 0.95}};
  c["nearfield_area"] = {{"antennas", 128}, {"theta_points", 64}, {"quadrature_points", 1024}, {"azimuth_points", 91}};
  c["boundary_cloud_3d"] = {{"azimuth_points", 61}, {"elevation_points", 31}};
  c["nmse_vs_snr"] = {{"snr_db", Json::array({0.0, 5.0, 10.0, 15.0, 20.0})},
                      {"instances", 20},
                      {"solvers", Json::array({"ls", "pnp", "amp", "ae_ls", "ae_amp"})}};
  c["correlation_vs_iteration"] = {{"snr_db", 10.0}, {"instances", 20}, {"solvers", Json::array({"amp", "pnp", "gd"})}};
  c["se_replica_compare"] = {{"antennas", 256},    {"delta", 0.5},          {"snr_db", Json::array({5.0, 10.0, 20.0})},
                             {"trials", 100},      {"rho", 0.1},            {"sigma_x2", 1.0},
                             {"iterations", 50},   {"soft_threshold_alpha", 1.5}};
  c["rate_heatmap_sectors"] = {{"theta_points", 5},
                               {"spacing_factors", Json::array({1.0, 2.0, 3.0})},
                               {"sectors", 4},
                               {"drops", 4}};
  c["nmse_upa_vs_mca"] = {{"snr_db", Json::array({0.0, 10.0, 20.0})}, {"instances", 20}};
  c["rate_cdf_estimated_csi"] = {{"drops", 20}, {"uplink_snr_db", 0.0}, {"estimator", "ls"}};
  c["geometry_search"] = {{"theta_points", 5},
                          {"tile_options", Json::array({1, 2, 3, 4})},
                          {"spacing_factors", Json::array({1.0, 1.5, 2.0})},
                          {"max_length_factor", 2.0},
                          {"drops", 10}};
  return c;
}

namespace {

bool compatible(const Json& schema, const Json& value) {
  if (schema.is_number_integer()) return value.is_number_integer() || (value.is_number_float() && std::floor(value.get<double>()) == value.get<double>());
  if (schema.is_number()) return value.is_number();
  if (schema.is_boolean()) return value.is_boolean();
  if (schema.is_string()) return value.is_string();
  if (schema.is_array()) return value.is_array();
  if (schema.is_object()) return value.is_object();
  return true;
}

const char* type_name(const Json& schema) {
  if (schema.is_number_integer()) return "integer";
  if (schema.is_number()) return "number";
  if (schema.is_boolean()) return "boolean";
  if (schema.is_string()) return "string";
  if (schema.is_array()) return "array";
  return "object";
}

void merge(const Json& schema, const Json& input, Json& out, const std::string& path, std::vector<std::string>& diags) {
  for (auto it = input.begin(); it != input.end(); ++it) {
    const std::string here = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key())) {
      diags.push_back(here + ": unknown key");
      continue;
    }
    const Json& s = schema.at(it.key());
    if (!compatible(s, it.value())) {
      diags.push_back(here + ": expected " + std::string(type_name(s)));
      continue;
    }
    if (s.is_object()) {
      merge(s, it.value(), out[it.key()], here, diags);
    } else if (s.is_number_integer()) {
      out[it.key()] = static_cast<std::int64_t>(it.value().get<double>());
    } else if (s.is_array() && !s.empty()) {
      const Json& elem = s.front();
      bool ok = true;
      for (std::size_t i = 0; i < it.value().size(); ++i)
        if (!compatible(elem, it.value()[i])) {
          diags.push_back(here + "[" + std::to_string(i) + "]: expected " + type_name(elem));
          ok = false;
        }
      if (ok) out[it.key()] = it.value();
    } else {
      out[it.key()] = it.value();
    }
  }
}

Vec3 vec3(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw ConfigError(path + ": expected an array of 3 numbers");
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

Box box_from(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected {lo, hi}");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "lo" && it.key() != "hi") throw ConfigError(path + "." + it.key() + ": unknown key");
  if (!j.contains("lo") || !j.contains("hi")) throw ConfigError(path + ": needs lo and hi");
  return Box{vec3(j["lo"], path + ".lo"), vec3(j["hi"], path + ".hi")};
}

template <typename F>
void wrap(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void semantic_checks(const Json& c, std::vector<std::string>& diags) {
  auto check = [&](const std::string& path, const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      const std::string msg = e.what();
      diags.push_back(msg.rfind(path, 0) == 0 ? msg : path + ": " + msg);
    }
  };
  check("experiment", [&] {
    const auto name = c["experiment"].get<std::string>();
    for (const auto& info : list_experiments())
      if (info.name == name) return;
    throw ConfigError("unknown experiment '" + name + "'");
  });
  check("seed", [&] {
    if (c["seed"].get<std::int64_t>() < 0) throw ConfigError("must be >= 0");
  });
  check("threads", [&] {
    if (c["threads"].get<std::int64_t>() < 0) throw ConfigError("must be >= 0 (0 = hardware concurrency)");
  });
  check("carrier", [&] { carrier_from(c); });
  check("layout", [&] { layout_from(c["layout"], carrier_from(c)); });
  check("mca", [&] {
    Json node = c["layout"];
    node["variant"] = "modular_cylindrical";
    for (auto it = c["mca"].begin(); it != c["mca"].end(); ++it) node[it.key()] = it.value();
    layout_from(node, carrier_from(c), "mca");
  });
  check("pilot", [&] {
    const auto layout = layout_from(c["layout"], carrier_from(c));
    pilot_from(c).validate(layout.size());
  });
  check("scene", [&] { scene_from(c); });
  check("solver", [&] { solver_from(c); });
  check("precoder", [&] { wmmse_from(c); });
  check("denoiser.kind", [&] {
    static const std::set<std::string> kinds{"identity", "soft_threshold", "bg_mmse", "autoencoder"};
    if (!kinds.count(c["denoiser"]["kind"].get<std::string>())) throw ConfigError("unknown denoiser kind");
  });
  check("precoder.rate_base", [&] {
    const auto b = c["precoder"]["rate_base"].get<std::string>();
    if (b != "bits" && b != "nats") throw ConfigError("must be 'bits' or 'nats'");
  });
}

}  // namespace

void apply_override(Json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    if (!node->is_object() && !node->is_null()) throw ConfigError("override key '" + key + "' descends into a non-object");
    start = dot + 1;
  }
}

Validation validate_config(const std::string& text, const std::vector<std::string>& overrides) {
  Validation v;
  const Json schema = default_config();
  v.config = schema;
  Json input = Json::object();
  const bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
  if (!blank) {
    input = Json::parse(text, nullptr, false);
    if (input.is_discarded()) {
      v.diagnostics.push_back("<root>: config is not valid JSON");
      return v;
    }
    if (!input.is_object()) {
      v.diagnostics.push_back("<root>: config must be a JSON object");
      return v;
    }
  }
  for (const auto& o : overrides) {
    try {
      apply_override(input, o);
    } catch (const ConfigError& e) {
      v.diagnostics.push_back(std::string("--override: ") + e.what());
    }
  }
  merge(schema, input, v.config, "", v.diagnostics);
  if (v.ok()) semantic_checks(v.config, v.diagnostics);
  return v;
}

CarrierConfig carrier_from(const Json& cfg) {
  const auto& c = cfg.at("carrier");
  CarrierConfig carrier;
  wrap("carrier", [&] {
    carrier = CarrierConfig::from_frequency(c.at("frequency_hz").get<double>(), c.at("spacing_wavelengths").get<double>());
    carrier.validate();
  });
  return carrier;
}

ArrayLayout layout_from(const Json& node, const CarrierConfig& carrier, const std::string& path) {
  ArrayLayout l;
  wrap(path, [&] {
    l.variant = array_variant_from_string(node.at("variant").get<std::string>());
    l.horizontal_count = node.at("horizontal_count").get<int>();
    l.vertical_count = node.at("vertical_count").get<int>();
    l.theta = node.at("theta").get<double>();
    l.tiles = node.at("tiles").get<int>();
    l.tile_spacing = node.at("tile_spacing").get<double>();
    if (!l.is_modular()) l.tile_spacing = l.horizontal_count;
    l.carrier = carrier;
    l.validate();
  });
  return l;
}

PilotConfig pilot_from(const Json& cfg) {
  const auto& p = cfg.at("pilot");
  PilotConfig out;
  out.users = p.at("users").get<int>();
  out.pilot_length = p.at("pilot_length").get<int>();
  out.rf_chains = p.at("rf_chains").get<int>();
  out.noise_var = p.at("noise_var").get<double>();
  return out;
}

SceneConfig scene_from(const Json& cfg) {
  const auto& s = cfg.at("scene");
  SceneConfig out;
  wrap("scene", [&] {
    out.user_box = box_from(s.at("user_box"), "user_box");
    out.scatterer_boxes.clear();
    const auto& boxes = s.at("scatterer_boxes");
    for (std::size_t i = 0; i < boxes.size(); ++i)
      out.scatterer_boxes.push_back(box_from(boxes[i], "scatterer_boxes[" + std::to_string(i) + "]"));
    out.min_scatterers = s.at("min_scatterers").get<int>();
    out.max_scatterers = s.at("max_scatterers").get<int>();
    out.visibility_probability = s.at("visibility_probability").get<double>();
    out.mask_los = s.at("mask_los").get<bool>();
    out.visibility_block = s.at("visibility_block").get<int>();
    out.extra_gain = s.at("extra_gain").get<double>();
    out.validate();
  });
  return out;
}

SolverConfig solver_from(const Json& cfg) {
  const auto& s = cfg.at("solver");
  SolverConfig out;
  wrap("solver", [&] {
    out.iterations = s.at("iterations").get<int>();
    out.damping = s.at("damping").get<double>();
    out.step = s.at("step").get<double>();
    out.lambda = s.at("lambda").get<double>();
    out.mu = s.at("mu").get<double>();
    out.ls_ridge = s.at("ls_ridge").get<double>();
    out.divergence.epsilon = s.at("mc_epsilon").get<double>();
    out.divergence.draws = s.at("mc_draws").get<int>();
    out.analytic_divergence = s.at("analytic_divergence").get<bool>();
    if (s.at("grid").empty()) throw ConfigError("grid must be non-empty");
    out.validate();
  });
  return out;
}

WmmseOptions wmmse_from(const Json& cfg) {
  const auto& p = cfg.at("precoder");
  WmmseOptions out;
  wrap("precoder", [&] {
    out.outer_iterations = p.at("outer_iterations").get<int>();
    out.inner_iterations = p.at("inner_iterations").get<int>();
    out.digital_sweeps = p.at("digital_sweeps").get<int>();
    out.bits = p.at("rate_base").get<std::string>() != "nats";
    if (out.outer_iterations < 1 || out.inner_iterations < 1 || out.digital_sweeps < 1)
      throw ConfigError("iteration counts must be >= 1");
    if (!(p.at("power").get<double>() > 0.0)) throw ConfigError("power must be > 0");
  });
  return out;
}

}  // namespace nfx::experiments
