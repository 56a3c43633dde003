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

#include "doctest.h"
#include "helpers.hpp"

#include "nfx/dataset_io.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>

using namespace nfx;
namespace fs = std::filesystem;

namespace {

void truncate_file(const fs::path& p, std::uintmax_t keep) { fs::resize_file(p, keep); }

std::vector<ChannelRealization> sample_records(const ArrayLayout& l, int n) {
  SceneConfig cfg;
  cfg.visibility_block = 8;
  std::vector<ChannelRealization> out;
  for (int i = 0; i < n; ++i) {
    Rng rng = make_stream(11, 1, static_cast<std::uint64_t>(i));
    out.push_back(assemble_channel(l, sample_scene(cfg, l.size(), rng)));
  }
  return out;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("dataset round trip preserves channels and scenes") {
  const auto dir = nfx::test::scratch("dataset");
  auto l = ArrayLayout::modular_cylindrical(16, 2, 1.2, 2, 10.0);
  l.element_gain.assign(32, 0.5);
  const auto records = sample_records(l, 5);
  const auto path = (dir / "d.nfds").string();
  export_dataset(path, l, records);
  const auto back = import_dataset(path);
  CHECK(back.layout.variant == l.variant);
  CHECK(back.layout.tile_spacing == l.tile_spacing);
  CHECK(back.layout.element_gain == l.element_gain);
  REQUIRE(back.records.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& a = records[i];
    const auto& b = back.records[i];
    CHECK((a.h - b.h).cwiseAbs().maxCoeff() <= 1e-6 * a.h.cwiseAbs().maxCoeff());
    CHECK(a.scene.user.r == b.scene.user.r);
    REQUIRE(a.scene.scatterers.size() == b.scene.scatterers.size());
    for (std::size_t s = 0; s < a.scene.scatterers.size(); ++s) {
      CHECK(a.scene.scatterers[s].position == b.scene.scatterers[s].position);
      CHECK(a.scene.scatterers[s].alpha == b.scene.scatterers[s].alpha);
    }
    for (std::size_t s = 0; s < a.scene.visibility.size(); ++s) CHECK(a.scene.visibility[s].bits == b.scene.visibility[s].bits);
  }
  std::ifstream side(path + ".json");
  const auto meta = nlohmann::json::parse(side);
  CHECK(meta.at("sample_count").get<int>() == 5);
  CHECK(meta.at("antenna_count").get<int>() == 32);
}

TEST_CASE("truncated dataset names the failing record") {
  const auto dir = nfx::test::scratch("dataset_trunc");
  const auto l = ArrayLayout::upa(8, 2);
  const auto path = dir / "d.nfds";
  export_dataset(path.string(), l, sample_records(l, 3));
  const auto full = fs::file_size(path);
  truncate_file(path, full - 5);
  try {
    import_dataset(path.string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.record_index() == 2);
  }
  std::ofstream(path, std::ios::binary) << "NFXX1";
  try {
    import_dataset(path.string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.record_index() == -1);
  }
}

TEST_CASE("measurement instances round trip") {
  const auto dir = nfx::test::scratch("meas");
  Rng rng = make_stream(12, 1);
  std::vector<MeasurementInstance> in;
  for (int i = 0; i < 3; ++i) {
    auto inst = iid_gaussian_instance(complex_normal_vector(rng, 10), 6, 0.25, rng);
    inst.column_scale = 1.5 + i;
    inst.regularized = i == 1;
    if (i == 2) inst.truth.resize(0);
    in.push_back(inst);
  }
  const auto path = (dir / "m.nfmi").string();
  write_measurements(path, in);
  const auto out = read_measurements(path);
  REQUIRE(out.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK((out[i].a - in[i].a).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((out[i].y - in[i].y).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(out[i].noise_var == in[i].noise_var);
    CHECK(out[i].column_scale == in[i].column_scale);
    CHECK(out[i].delta == in[i].delta);
    CHECK(out[i].regularized == in[i].regularized);
    CHECK(out[i].truth.size() == in[i].truth.size());
  }
  fs::resize_file(path, fs::file_size(path) - 3);
  try {
    read_measurements(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.record_index() == 2);
  }
}

TEST_CASE("predictions round trip") {
  const auto dir = nfx::test::scratch("pred");
  Rng rng = make_stream(13, 1);
  std::vector<Prediction> in{{7, complex_normal_vector(rng, 12)}, {42, complex_normal_vector(rng, 12)}};
  const auto path = (dir / "p.nfpr").string();
  write_predictions(path, 12, in);
  const auto out = read_predictions(path);
  REQUIRE(out.size() == 2);
  CHECK(out[1].instance_id == 42);
  CHECK((out[0].h - in[0].h).cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS_AS(write_predictions(path, 11, in), ShapeError);
  CHECK_THROWS_AS(read_predictions((dir / "missing").string()), Error);
}

}
