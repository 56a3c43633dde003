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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace nfx {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr cplx kJ{0.0, 1.0};

// Error hierarchy. Every library failure derives from nfx::Error so callers
// can catch one type at the CLI boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVariant : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::int64_t record_index = -1);
  /// Index of the offending record, -1 for header-level failures.
  std::int64_t record_index() const { return record_index_; }

 private:
  std::int64_t record_index_;
};

using Rng = std::mt19937_64;

/// Deterministic sub-stream keyed by (seed, stream id, index). Used so that
/// parallel workers draw identical numbers regardless of scheduling.
Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Circularly-symmetric complex Gaussian sample with E|z|^2 = variance.
cplx complex_normal(Rng& rng, double variance = 1.0);

CVec complex_normal_vector(Rng& rng, Eigen::Index n, double variance = 1.0);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace nfx
