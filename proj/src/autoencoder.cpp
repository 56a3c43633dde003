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

#include "nfx/autoencoder.hpp"

#include "binary_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

namespace nfx {

int Layer::output_length(int length) const {
  switch (kind) {
    case LayerKind::conv1d: return (length + 2 * padding - kernel) / stride + 1;
    case LayerKind::conv_transpose1d: return (length - 1) * stride - 2 * padding + kernel + output_padding;
    case LayerKind::dense: return 1;
  }
  return 0;
}

void AeWeights::validate() const {
  if (antenna_count < 1) throw ShapeError("autoencoder: M must be >= 1");
  if (layers.empty()) throw ShapeError("autoencoder: no layers");
  if (mean.size() != 2 * static_cast<std::size_t>(antenna_count) || std.size() != mean.size())
    throw ShapeError("autoencoder: standardization vectors must have 2M entries");
  for (float s : std)
    if (!(s > 0.0f)) throw ShapeError("autoencoder: standardization std entries must be > 0");

  // Walk (channels, length); dense layers flatten and the next layer reshapes.
  long channels = 2;
  long length = antenna_count;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    const std::string where = "autoencoder layer " + std::to_string(i) + ": ";
    if (l.in_channels < 1 || l.out_channels < 1 || l.kernel < 1 || l.stride < 1 || l.padding < 0 || l.output_padding < 0)
      throw ShapeError(where + "invalid hyperparameters");
    if (l.weight.size() != static_cast<std::size_t>(l.out_channels) * l.in_channels * l.kernel)
      throw ShapeError(where + "weight tensor size mismatch");
    if (l.bias.size() != static_cast<std::size_t>(l.out_channels)) throw ShapeError(where + "bias size mismatch");
    const long total = channels * length;
    if (l.kind == LayerKind::dense) {
      if (l.kernel != 1 || total != l.in_channels) throw ShapeError(where + "dense input size mismatch");
      channels = l.out_channels;
      length = 1;
      continue;
    }
    if (total % l.in_channels != 0) throw ShapeError(where + "input cannot be reshaped to in_channels rows");
    length = total / l.in_channels;
    const long out_len = l.output_length(static_cast<int>(length));
    if (out_len < 1) throw ShapeError(where + "output length < 1");
    channels = l.out_channels;
    length = out_len;
  }
  if (channels * length != 2L * antenna_count) throw ShapeError("autoencoder: output size must be 2M");
}

namespace {

Layer make_layer(LayerKind kind, Activation act, int in, int out, int kernel, int stride, int padding, int outpad) {
  Layer l;
  l.kind = kind;
  l.activation = act;
  l.in_channels = in;
  l.out_channels = out;
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  l.output_padding = outpad;
  l.weight.assign(static_cast<std::size_t>(in) * out * kernel, 0.0f);
  l.bias.assign(static_cast<std::size_t>(out), 0.0f);
  return l;
}

}  // namespace

AeWeights default_architecture(int antenna_count, int latent_dim, std::vector<int> widths, Activation hidden) {
  if (antenna_count % 8 != 0) throw ShapeError("autoencoder: M must be divisible by 8");
  if (widths.size() != 3) throw ShapeError("autoencoder: need three convolution widths");
  AeWeights w;
  w.antenna_count = antenna_count;
  w.latent_dim = latent_dim;
  int in = 2;
  for (int width : widths) {
    w.layers.push_back(make_layer(LayerKind::conv1d, hidden, in, width, 5, 2, 2, 0));
    in = width;
  }
  const int flat = widths.back() * antenna_count / 8;
  w.layers.push_back(make_layer(LayerKind::dense, hidden, flat, latent_dim, 1, 1, 0, 0));
  w.layers.push_back(make_layer(LayerKind::dense, hidden, latent_dim, flat, 1, 1, 0, 0));
  const std::vector<int> back{widths[1], widths[0], 2};
  for (std::size_t i = 0; i < back.size(); ++i) {
    const Activation act = i + 1 == back.size() ? Activation::linear : hidden;
    w.layers.push_back(make_layer(LayerKind::conv_transpose1d, act, in, back[i], 5, 2, 2, 1));
    in = back[i];
  }
  w.mean.assign(2 * static_cast<std::size_t>(antenna_count), 0.0f);
  w.std.assign(2 * static_cast<std::size_t>(antenna_count), 1.0f);
  w.validate();
  return w;
}

namespace {

constexpr char kMagic[8] = {'N', 'F', 'A', 'E', '1', 0, 0, 0};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_ae_weights(const std::string& path, const AeWeights& w) {
  w.validate();
  ByteWriter out;
  out.bytes(kMagic, 8);
  out.u32(kVersion);
  out.u32(32);
  out.u32(static_cast<std::uint32_t>(w.antenna_count));
  out.u32(static_cast<std::uint32_t>(w.latent_dim));
  out.u32(static_cast<std::uint32_t>(w.layers.size()));
  for (const auto& l : w.layers) {
    out.u8(static_cast<std::uint8_t>(l.kind));
    out.u8(static_cast<std::uint8_t>(l.activation));
    out.u8(0);
    out.u8(0);
    for (int v : {l.in_channels, l.out_channels, l.kernel, l.stride, l.padding, l.output_padding})
      out.u32(static_cast<std::uint32_t>(v));
  }
  for (const auto& l : w.layers) {
    for (float f : l.weight) out.f32(f);
    for (float f : l.bias) out.f32(f);
  }
  for (float f : w.mean) out.f32(f);
  for (float f : w.std) out.f32(f);
  out.u32(static_cast<std::uint32_t>(w.metadata.size()));
  out.bytes(w.metadata.data(), w.metadata.size());

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open " + path + " for writing");
  file.write(reinterpret_cast<const char*>(out.buffer().data()), static_cast<std::streamsize>(out.buffer().size()));
  if (!file) throw Error("write failed: " + path);
}

AeWeights read_ae_weights(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path);
  const std::vector<std::uint8_t> buf{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
  ByteReader in(buf);
  char magic[8];
  in.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw ParseError("bad magic, expected NFAE1");
  if (in.u32() != kVersion) throw ParseError("unsupported NFAE1 version");
  if (in.u32() != 32) throw ParseError("unsupported float width");
  AeWeights w;
  w.antenna_count = static_cast<int>(in.u32());
  w.latent_dim = static_cast<int>(in.u32());
  const auto count = in.u32();
  if (count > 1024) throw ParseError("implausible layer count");
  for (std::uint32_t i = 0; i < count; ++i) {
    Layer l;
    const auto kind = in.u8();
    const auto act = in.u8();
    if (kind > 2 || act > 3) throw ParseError("unknown layer kind or activation", i);
    l.kind = static_cast<LayerKind>(kind);
    l.activation = static_cast<Activation>(act);
    in.u8();
    in.u8();
    int* fields[] = {&l.in_channels, &l.out_channels, &l.kernel, &l.stride, &l.padding, &l.output_padding};
    for (int* f : fields) *f = static_cast<int>(in.u32());
    w.layers.push_back(std::move(l));
  }
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    Layer& l = w.layers[i];
    const std::uint64_t n = static_cast<std::uint64_t>(l.out_channels) * l.in_channels * l.kernel;
    if ((n + l.out_channels) * 4 > in.remaining()) throw ParseError("tensor payload truncated", static_cast<std::int64_t>(i));
    l.weight.resize(n);
    for (auto& f : l.weight) f = in.f32();
    l.bias.resize(static_cast<std::size_t>(l.out_channels));
    for (auto& f : l.bias) f = in.f32();
  }
  const std::size_t stats = 2 * static_cast<std::size_t>(w.antenna_count);
  if (stats * 8 > in.remaining()) throw ParseError("standardization statistics truncated");
  w.mean.resize(stats);
  for (auto& f : w.mean) f = in.f32();
  w.std.resize(stats);
  for (auto& f : w.std) f = in.f32();
  const auto meta_len = in.u32();
  w.metadata.resize(meta_len);
  in.bytes(w.metadata.data(), meta_len);
  if (in.remaining() != 0) throw ParseError("trailing bytes in NFAE1 file");
  try {
    w.validate();
  } catch (const ShapeError& e) {
    throw ParseError(e.what());
  }
  return w;
}

namespace {

float activate(Activation a, float x) {
  switch (a) {
    case Activation::linear: return x;
    case Activation::relu: return x > 0.0f ? x : 0.0f;
    case Activation::tanh: return std::tanh(x);
    case Activation::leaky_relu: return x > 0.0f ? x : 0.01f * x;
  }
  return x;
}

// Activations are kept flat; `length` is the per-channel sample count.
std::vector<float> run_layer(const Layer& l, const std::vector<float>& x) {
  std::vector<float> y;
  if (l.kind == LayerKind::dense) {
    y.resize(static_cast<std::size_t>(l.out_channels));
    for (int o = 0; o < l.out_channels; ++o) {
      double acc = l.bias[static_cast<std::size_t>(o)];
      for (int i = 0; i < l.in_channels; ++i) acc += static_cast<double>(l.w(o, i, 0)) * x[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(o)] = activate(l.activation, static_cast<float>(acc));
    }
    return y;
  }
  const int len = static_cast<int>(x.size()) / l.in_channels;
  const int out_len = l.output_length(len);
  std::vector<double> acc(static_cast<std::size_t>(l.out_channels) * out_len);
  for (int o = 0; o < l.out_channels; ++o)
    for (int t = 0; t < out_len; ++t) acc[static_cast<std::size_t>(o) * out_len + t] = l.bias[static_cast<std::size_t>(o)];
  if (l.kind == LayerKind::conv1d) {
    for (int o = 0; o < l.out_channels; ++o)
      for (int t = 0; t < out_len; ++t) {
        double s = 0.0;
        for (int i = 0; i < l.in_channels; ++i)
          for (int k = 0; k < l.kernel; ++k) {
            const int j = t * l.stride + k - l.padding;
            if (j < 0 || j >= len) continue;
            s += static_cast<double>(l.w(o, i, k)) * x[static_cast<std::size_t>(i) * len + j];
          }
        acc[static_cast<std::size_t>(o) * out_len + t] += s;
      }
  } else {
    for (int i = 0; i < l.in_channels; ++i)
      for (int j = 0; j < len; ++j) {
        const double xv = x[static_cast<std::size_t>(i) * len + j];
        if (xv == 0.0) continue;
        for (int k = 0; k < l.kernel; ++k) {
          const int t = j * l.stride - l.padding + k;
          if (t < 0 || t >= out_len) continue;
          for (int o = 0; o < l.out_channels; ++o)
            acc[static_cast<std::size_t>(o) * out_len + t] += static_cast<double>(l.w(o, i, k)) * xv;
        }
      }
  }
  y.resize(acc.size());
  for (std::size_t n = 0; n < acc.size(); ++n) y[n] = activate(l.activation, static_cast<float>(acc[n]));
  return y;
}

}  // namespace

RVec ae_forward(const AeWeights& w, const RVec& x) {
  if (x.size() != 2 * w.antenna_count) throw ShapeError("autoencoder input must have 2M entries");
  std::vector<float> a(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) a[static_cast<std::size_t>(i)] = static_cast<float>(x(i));
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    a = run_layer(w.layers[i], a);
    for (float v : a)
      if (!std::isfinite(v)) throw NumericalError("non-finite activation at autoencoder layer " + std::to_string(i));
  }
  RVec out(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) out(static_cast<Eigen::Index>(i)) = a[i];
  return out;
}

}  // namespace nfx
