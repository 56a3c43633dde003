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

#include "nfx/common.hpp"

#include <string>
#include <vector>

namespace nfx {

enum class LayerKind : std::uint8_t { conv1d = 0, conv_transpose1d = 1, dense = 2 };
enum class Activation : std::uint8_t { linear = 0, relu = 1, tanh = 2, leaky_relu = 3 };

/// One network layer. Weights are stored out x in x kernel (dense layers use
/// kernel = 1), matching PyTorch Conv1d/Linear and the transposed
/// ConvTranspose1d tensor.
struct Layer {
  LayerKind kind = LayerKind::conv1d;
  Activation activation = Activation::linear;
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int output_padding = 0;
  std::vector<float> weight;
  std::vector<float> bias;

  float w(int o, int i, int k) const {
    return weight[(static_cast<std::size_t>(o) * in_channels + i) * kernel + k];
  }
  /// Output length for an input of `length` samples per channel.
  int output_length(int length) const;
};

struct AeWeights {
  int antenna_count = 0;  // M; network input/output is 2M reals
  int latent_dim = 0;
  std::vector<Layer> layers;
  std::vector<float> mean;  // 2M standardization statistics
  std::vector<float> std;
  /// Free-form training metadata (JSON text).
  std::string metadata = "{}";

  /// Shape-checks the layer chain from 2 x M input to 2M output.
  void validate() const;
};

/// The default encoder/decoder: three stride-2 convolutions (kernel 5),
/// dense to the latent, dense back, three transposed convolutions. Weights
/// are zero; used to build test fixtures and document the layout.
AeWeights default_architecture(int antenna_count, int latent_dim = 256, std::vector<int> widths = {16, 32, 64},
                               Activation hidden = Activation::relu);

void write_ae_weights(const std::string& path, const AeWeights& w);
AeWeights read_ae_weights(const std::string& path);

/// Deterministic forward pass on a 2M-vector. Throws NumericalError naming
/// the layer index when an activation turns non-finite.
RVec ae_forward(const AeWeights& w, const RVec& x);

}  // namespace nfx
