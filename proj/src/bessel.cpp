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

#include "nfx/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace nfx {

std::vector<double> bessel_j_sequence(int n_max, double x) {
  if (n_max < 0) throw std::invalid_argument("bessel_j_sequence: n_max must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double ax = std::abs(x);
  if (ax == 0.0) {
    out[0] = 1.0;
    return out;
  }
  constexpr double kAcc = 400.0;
  constexpr double kBig = 1e250;
  const double span = std::max(static_cast<double>(n_max), ax);
  int start = 2 * ((static_cast<int>(span) + static_cast<int>(std::sqrt(kAcc * span)) + 20) / 2);

  double next = 0.0;  // J_{k+1}
  double curr = 1e-300;  // J_k, arbitrary seed
  double norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double prev = (2.0 * k / ax) * curr - next;  // J_{k-1}
    next = curr;
    curr = prev;
    if (std::abs(curr) > kBig) {
      curr /= kBig;
      next /= kBig;
      norm /= kBig;
      for (double& v : out) v /= kBig;
    }
    const int idx = k - 1;
    if (idx <= n_max) out[static_cast<std::size_t>(idx)] = curr;
    if (idx > 0 && idx % 2 == 0) norm += 2.0 * curr;
  }
  norm += curr;
  for (double& v : out) v /= norm;
  if (x < 0.0)
    for (int n = 1; n <= n_max; n += 2) out[static_cast<std::size_t>(n)] = -out[static_cast<std::size_t>(n)];
  return out;
}

double bessel_j(int n, double x) {
  const int an = std::abs(n);
  const double v = bessel_j_sequence(an, x)[static_cast<std::size_t>(an)];
  return (n < 0 && (an % 2 == 1)) ? -v : v;
}

}  // namespace nfx
