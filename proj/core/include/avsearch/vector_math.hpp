// Copyright 2026 The avsearch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace avsearch {

// Inner product with a fixed 8-lane accumulation order. Every index kind
// scores through this one function, so a vector scored by two different
// indices gets bit-identical results.
inline float dot(std::span<const float> a, std::span<const float> b) noexcept {
  const std::size_t n = a.size();
  const float* x = a.data();
  const float* y = b.data();
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) acc[j] += x[i + j] * y[i + j];
  }
  for (std::size_t j = 0; i < n; ++i, ++j) acc[j] += x[i] * y[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

inline float l2_sqr(std::span<const float> a, std::span<const float> b) noexcept {
  const std::size_t n = a.size();
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) {
      float d = a[i + j] - b[i + j];
      acc[j] += d * d;
    }
  }
  for (std::size_t j = 0; i < n; ++i, ++j) {
    float d = a[i] - b[i];
    acc[j] += d * d;
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

inline double l2_norm(std::span<const float> a) noexcept {
  double s = 0.0;
  for (float v : a) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

/// Scales `v` to unit L2 norm. Returns false, leaving `v` untouched, when the
/// norm is zero or any component is not finite.
inline bool normalize_in_place(std::span<float> v) noexcept {
  double s = 0.0;
  for (float x : v) {
    if (!std::isfinite(x)) return false;
    s += static_cast<double>(x) * x;
  }
  if (!(s > 0.0)) return false;
  const double inv = 1.0 / std::sqrt(s);
  for (float& x : v) x = static_cast<float>(x * inv);
  return true;
}

}  // namespace avsearch
