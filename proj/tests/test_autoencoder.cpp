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

#include "nfx/autoencoder.hpp"
#include "nfx/denoiser.hpp"

#include <cmath>
#include <limits>
#include <memory>

using namespace nfx;

namespace {

Layer layer(LayerKind kind, int in, int out, int kernel, int stride, int padding, int output_padding = 0) {
  Layer l;
  l.kind = kind;
  l.in_channels = in;
  l.out_channels = out;
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  l.output_padding = output_padding;
  l.weight.assign(static_cast<std::size_t>(out) * in * kernel, 0.0f);
  l.bias.assign(static_cast<std::size_t>(out), 0.0f);
  return l;
}

// Identity network: channel-preserving delta kernels.
AeWeights delta_network(int m) {
  AeWeights w;
  w.antenna_count = m;
  w.latent_dim = 2 * m;
  Layer c = layer(LayerKind::conv1d, 2, 2, 3, 1, 1);
  Layer t = layer(LayerKind::conv_transpose1d, 2, 2, 3, 1, 1);
  for (int ch = 0; ch < 2; ++ch) {
    c.weight[static_cast<std::size_t>((ch * 2 + ch) * 3 + 1)] = 1.0f;
    t.weight[static_cast<std::size_t>((ch * 2 + ch) * 3 + 1)] = 1.0f;
  }
  w.layers = {c, t};
  w.mean.assign(2 * static_cast<std::size_t>(m), 0.0f);
  w.std.assign(2 * static_cast<std::size_t>(m), 1.0f);
  return w;
}

}  // namespace

TEST_SUITE("autoencoder") {

TEST_CASE("delta kernels give the identity map") {
  const auto w = delta_network(16);
  CHECK_NOTHROW(w.validate());
  Rng rng = make_stream(1, 1);
  RVec x(32);
  for (int i = 0; i < 32; ++i) x(i) = std::normal_distribution<>(0, 1)(rng);
  CHECK((ae_forward(w, x) - x.cast<float>().cast<double>()).cwiseAbs().maxCoeff() < 1e-6);
  AutoencoderDenoiser den(std::make_shared<AeWeights>(w));
  const CVec v = complex_normal_vector(rng, 16);
  CHECK((den.denoise(v, 1.0) - v).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("zero weights output the bias, and zero input maps to zero") {
  auto w = delta_network(8);
  for (auto& l : w.layers) std::fill(l.weight.begin(), l.weight.end(), 0.0f);
  w.layers.back().bias = {0.5f, -0.25f};
  const RVec out = ae_forward(w, RVec::Ones(16));
  for (int i = 0; i < 8; ++i) {
    CHECK(out(i) == 0.5);
    CHECK(out(8 + i) == -0.25);
  }
  AutoencoderDenoiser den(std::make_shared<AeWeights>(w));
  CHECK(den.denoise(CVec::Zero(8), 1.0).norm() == 0.0);
}

TEST_CASE("strided transpose convolution matches a hand computation") {
  AeWeights w;
  w.antenna_count = 2;
  w.latent_dim = 1;
  // (2 channels, length 2) -> dense to 1 -> transpose-conv back to (2, 2).
  Layer d = layer(LayerKind::dense, 4, 1, 1, 1, 0);
  d.weight = {1.0f, 2.0f, 3.0f, 4.0f};
  d.bias = {0.5f};
  Layer t = layer(LayerKind::conv_transpose1d, 1, 2, 2, 2, 0);
  t.weight = {1.0f, -1.0f, 2.0f, 0.5f};  // out x in x k
  w.layers = {d, t};
  w.mean.assign(4, 0.0f);
  w.std.assign(4, 1.0f);
  REQUIRE_NOTHROW(w.validate());
  RVec x(4);
  x << 1.0, 0.0, -1.0, 2.0;  // dense -> 1 - 3 + 8 + 0.5 = 6.5
  const RVec y = ae_forward(w, x);
  CHECK(y(0) == doctest::Approx(6.5));
  CHECK(y(1) == doctest::Approx(-6.5));
  CHECK(y(2) == doctest::Approx(13.0));
  CHECK(y(3) == doctest::Approx(3.25));
}

TEST_CASE("default architecture round trips through the weight file") {
  auto w = default_architecture(32, 16);
  Rng rng = make_stream(2, 1);
  for (auto& l : w.layers)
    for (auto& v : l.weight) v = static_cast<float>(std::normal_distribution<>(0, 0.1)(rng));
  w.metadata = R"({"note":"test"})";
  const auto path = (nfx::test::scratch("ae") / "w.nfae").string();
  write_ae_weights(path, w);
  const auto back = read_ae_weights(path);
  CHECK(back.metadata == w.metadata);
  REQUIRE(back.layers.size() == w.layers.size());
  RVec x = RVec::Random(64);
  CHECK((ae_forward(w, x) - ae_forward(back, x)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ae_forward(w, x).size() == 64);
}

TEST_CASE("shape errors and non-finite activations are reported") {
  auto w = delta_network(8);
  w.layers[0].weight.pop_back();
  CHECK_THROWS_AS(w.validate(), ShapeError);
  w = delta_network(8);
  w.layers[1].bias[0] = std::numeric_limits<float>::infinity();
  try {
    ae_forward(w, RVec::Ones(16));
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
  CHECK_THROWS_AS(default_architecture(30), ShapeError);
}

}
