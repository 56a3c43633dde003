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

#include "nfx/dataset_io.hpp"

#include "binary_io.hpp"

#include "json.hpp"

#include <fstream>

namespace nfx {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFloatBits = 32;

void write_magic(ByteWriter& w, const char* magic) {
  char buf[8] = {};
  std::memcpy(buf, magic, 5);
  w.bytes(buf, 8);
}

void expect_magic(ByteReader& r, const char* magic) {
  char buf[8];
  r.bytes(buf, 8);
  if (std::memcmp(buf, magic, 5) != 0 || buf[5] != 0 || buf[6] != 0 || buf[7] != 0)
    throw ParseError(std::string("bad magic, expected ") + magic);
  const auto version = r.u32();
  if (version != kVersion) throw ParseError("unsupported version " + std::to_string(version));
  const auto bits = r.u32();
  if (bits != kFloatBits) throw ParseError("unsupported float width " + std::to_string(bits));
}

void write_cvec(ByteWriter& w, const CVec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    w.f32(static_cast<float>(v(i).real()));
    w.f32(static_cast<float>(v(i).imag()));
  }
}

CVec read_cvec(ByteReader& r, Eigen::Index n) {
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const float re = r.f32();
    const float im = r.f32();
    v(i) = {re, im};
  }
  return v;
}

void write_layout(ByteWriter& w, const ArrayLayout& l) {
  w.u8(static_cast<std::uint8_t>(l.variant));
  w.u8(0);
  w.u8(0);
  w.u8(0);
  w.i32(l.horizontal_count);
  w.i32(l.vertical_count);
  w.i32(l.tiles);
  w.f64(l.theta);
  w.f64(l.tile_spacing);
  w.f64(l.carrier.frequency_hz);
  w.f64(l.carrier.wavelength);
  w.f64(l.carrier.spacing);
  w.u32(static_cast<std::uint32_t>(l.element_gain.size()));
  for (double g : l.element_gain) w.f64(g);
}

ArrayLayout read_layout(ByteReader& r) {
  ArrayLayout l;
  const auto variant = r.u8();
  if (variant > static_cast<std::uint8_t>(ArrayVariant::modular_cylindrical))
    throw ParseError("unknown array variant " + std::to_string(variant));
  l.variant = static_cast<ArrayVariant>(variant);
  r.u8();
  r.u8();
  r.u8();
  l.horizontal_count = r.i32();
  l.vertical_count = r.i32();
  l.tiles = r.i32();
  l.theta = r.f64();
  l.tile_spacing = r.f64();
  l.carrier.frequency_hz = r.f64();
  l.carrier.wavelength = r.f64();
  l.carrier.spacing = r.f64();
  const auto gains = r.u32();
  if (gains > 0) {
    if (static_cast<std::int64_t>(gains) != static_cast<std::int64_t>(l.horizontal_count) * l.vertical_count)
      throw ParseError("element gain table size mismatch");
    l.element_gain.resize(gains);
    for (auto& g : l.element_gain) g = r.f64();
  }
  try {
    l.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("invalid layout descriptor: ") + e.what());
  }
  return l;
}

void write_mask(ByteWriter& w, const VisibilityMask& mask) {
  w.u32(static_cast<std::uint32_t>(mask.bits.size()));
  std::vector<std::uint8_t> packed((mask.bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < mask.bits.size(); ++i)
    if (mask.bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  w.bytes(packed.data(), packed.size());
}

VisibilityMask read_mask(ByteReader& r, int m) {
  const auto n = r.u32();
  if (n == 0 || static_cast<int>(n) > m || m % static_cast<int>(n) != 0) throw ParseError("invalid visibility mask size");
  std::vector<std::uint8_t> packed((n + 7) / 8);
  r.bytes(packed.data(), packed.size());
  VisibilityMask mask;
  mask.bits.resize(n);
  for (std::size_t i = 0; i < n; ++i) mask.bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return mask;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& buf) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("write failed: " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void export_dataset(const std::string& path, const ArrayLayout& layout, const std::vector<ChannelRealization>& records) {
  layout.validate();
  const int m = layout.size();
  ByteWriter w;
  write_magic(w, "NFDS1");
  w.u32(kVersion);
  w.u32(kFloatBits);
  write_layout(w, layout);
  w.u32(static_cast<std::uint32_t>(m));
  w.u64(records.size());
  for (const auto& rec : records) {
    if (rec.h.size() != m) throw ShapeError("record channel length does not match the layout");
    write_cvec(w, rec.h);
    w.f64(rec.scene.user.r);
    w.f64(rec.scene.user.azimuth);
    w.f64(rec.scene.user.elevation);
    w.u32(static_cast<std::uint32_t>(rec.scene.scatterers.size()));
    for (const auto& s : rec.scene.scatterers) {
      w.f64(s.position.x());
      w.f64(s.position.y());
      w.f64(s.position.z());
      w.f64(s.extra_gain);
      w.f64(s.alpha.real());
      w.f64(s.alpha.imag());
    }
    if (rec.scene.visibility.size() != rec.scene.scatterers.size() + 1)
      throw ShapeError("record needs one visibility mask per path");
    for (const auto& mask : rec.scene.visibility) write_mask(w, mask);
  }
  write_file(path, w.buffer());

  nlohmann::ordered_json side;
  side["magic"] = "NFDS1";
  side["version"] = kVersion;
  side["float_bits"] = kFloatBits;
  side["byte_order"] = "little";
  side["layout"] = {{"variant", to_string(layout.variant)},
                    {"horizontal_count", layout.horizontal_count},
                    {"vertical_count", layout.vertical_count},
                    {"theta", layout.theta},
                    {"tiles", layout.tiles},
                    {"tile_spacing", layout.tile_spacing},
                    {"frequency_hz", layout.carrier.frequency_hz},
                    {"wavelength", layout.carrier.wavelength},
                    {"spacing", layout.carrier.spacing},
                    {"element_gains", layout.element_gain.size()}};
  side["antenna_count"] = m;
  side["sample_count"] = records.size();
  std::ofstream js(path + ".json", std::ios::trunc);
  js << side.dump(2) << '\n';
}

Dataset import_dataset(const std::string& path) {
  const auto buf = read_file(path);
  ByteReader r(buf);
  Dataset ds;
  expect_magic(r, "NFDS1");
  ds.layout = read_layout(r);
  const auto m = r.u32();
  if (static_cast<int>(m) != ds.layout.size()) throw ParseError("antenna count does not match the layout");
  const auto count = r.u64();
  if (count > buf.size()) throw ParseError("sample count exceeds file size");
  ds.records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto idx = static_cast<std::int64_t>(i);
    try {
      ChannelRealization rec;
      rec.h = read_cvec(r, m);
      rec.scene.user.r = r.f64();
      rec.scene.user.azimuth = r.f64();
      rec.scene.user.elevation = r.f64();
      const auto scatterers = r.u32();
      if (scatterers > r.remaining() / 48) throw ParseError("scatterer count exceeds file size");
      for (std::uint32_t l = 0; l < scatterers; ++l) {
        Scatterer s;
        s.position.x() = r.f64();
        s.position.y() = r.f64();
        s.position.z() = r.f64();
        s.extra_gain = r.f64();
        const double re = r.f64();
        const double im = r.f64();
        s.alpha = {re, im};
        rec.scene.scatterers.push_back(s);
      }
      for (std::uint32_t l = 0; l <= scatterers; ++l) rec.scene.visibility.push_back(read_mask(r, static_cast<int>(m)));
      ds.records.push_back(std::move(rec));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), idx);
    }
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after last record");
  return ds;
}

void write_measurements(const std::string& path, const std::vector<MeasurementInstance>& instances) {
  ByteWriter w;
  write_magic(w, "NFMI1");
  w.u32(kVersion);
  w.u32(kFloatBits);
  w.u64(instances.size());
  for (const auto& inst : instances) {
    if (inst.y.size() != inst.a.rows()) throw ShapeError("measurement vector length must equal A's row count");
    const bool has_truth = inst.truth.size() > 0;
    if (has_truth && inst.truth.size() != inst.a.cols()) throw ShapeError("ground truth length must equal A's column count");
    w.u32(static_cast<std::uint32_t>(inst.a.rows()));
    w.u32(static_cast<std::uint32_t>(inst.a.cols()));
    w.f64(inst.noise_var);
    w.f64(inst.column_scale);
    w.f64(inst.delta);
    w.u8(inst.regularized ? 1 : 0);
    w.u8(has_truth ? 1 : 0);
    w.u8(0);
    w.u8(0);
    for (Eigen::Index i = 0; i < inst.a.rows(); ++i) write_cvec(w, inst.a.row(i).transpose());
    write_cvec(w, inst.y);
    if (has_truth) write_cvec(w, inst.truth);
  }
  write_file(path, w.buffer());
}

std::vector<MeasurementInstance> read_measurements(const std::string& path) {
  const auto buf = read_file(path);
  ByteReader r(buf);
  expect_magic(r, "NFMI1");
  const auto count = r.u64();
  if (count > buf.size()) throw ParseError("instance count exceeds file size");
  std::vector<MeasurementInstance> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    try {
      MeasurementInstance inst;
      const auto rows = r.u32();
      const auto cols = r.u32();
      if (static_cast<std::uint64_t>(rows) * cols * 8 > r.remaining()) throw ParseError("operator exceeds file size");
      inst.noise_var = r.f64();
      inst.column_scale = r.f64();
      inst.delta = r.f64();
      inst.regularized = r.u8() != 0;
      const bool has_truth = r.u8() != 0;
      r.u8();
      r.u8();
      inst.a.resize(rows, cols);
      for (std::uint32_t row = 0; row < rows; ++row) inst.a.row(row) = read_cvec(r, cols).transpose();
      inst.y = read_cvec(r, rows);
      if (has_truth) inst.truth = read_cvec(r, cols);
      out.push_back(std::move(inst));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), static_cast<std::int64_t>(i));
    }
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after last instance");
  return out;
}

void write_predictions(const std::string& path, int antenna_count, const std::vector<Prediction>& predictions) {
  ByteWriter w;
  write_magic(w, "NFPR1");
  w.u32(kVersion);
  w.u32(kFloatBits);
  w.u32(static_cast<std::uint32_t>(antenna_count));
  w.u64(predictions.size());
  for (const auto& p : predictions) {
    if (p.h.size() != antenna_count) throw ShapeError("prediction length does not match M");
    w.u64(p.instance_id);
    write_cvec(w, p.h);
  }
  write_file(path, w.buffer());
}

std::vector<Prediction> read_predictions(const std::string& path) {
  const auto buf = read_file(path);
  ByteReader r(buf);
  expect_magic(r, "NFPR1");
  const auto m = r.u32();
  const auto count = r.u64();
  if (count > buf.size()) throw ParseError("prediction count exceeds file size");
  std::vector<Prediction> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    try {
      Prediction p;
      p.instance_id = r.u64();
      p.h = read_cvec(r, m);
      out.push_back(std::move(p));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), static_cast<std::int64_t>(i));
    }
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after last prediction");
  return out;
}

}  // namespace nfx
