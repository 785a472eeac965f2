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

#include <algorithm>
#include <limits>
#include <random>

#include "avsearch/vector_index.hpp"
#include "avsearch/vector_math.hpp"
#include "internal.hpp"

namespace avsearch {

namespace {

// Platform-independent uniform in [0, 1): std::mt19937_64 output is fully
// specified, the standard distributions are not.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<float> seed_plus_plus(std::span<const float> data, std::size_t dim, std::size_t n,
                                  std::size_t k, std::mt19937_64& rng) {
  std::vector<float> centroids(k * dim);
  std::vector<char> chosen(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t c, std::size_t idx) {
    chosen[idx] = 1;
    std::copy_n(data.begin() + idx * dim, dim, centroids.begin() + c * dim);
    std::span<const float> center(centroids.data() + c * dim, dim);
    detail::parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        d2[i] = std::min(d2[i], static_cast<double>(l2_sqr(data.subspan(i * dim, dim), center)));
      }
    });
  };

  take(0, static_cast<std::size_t>(rng() % n));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double target = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    }
    if (pick == n) {
      // Every remaining point coincides with a chosen centroid.
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    take(c, pick);
  }
  return centroids;
}

}  // namespace

std::uint32_t nearest_centroid(std::span<const float> centroids, std::size_t dim,
                               std::span<const float> x) {
  const std::size_t k = centroids.size() / dim;
  std::uint32_t best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    float d = l2_sqr(centroids.subspan(c * dim, dim), x);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

KMeansResult train_kmeans(std::span<const float> data, std::size_t dim, std::size_t k,
                          const KMeansParams& params) {
  if (dim == 0 || data.size() % dim != 0) {
    throw Error(ErrorCode::kTraining, "training data size is not a multiple of dim");
  }
  const std::size_t n = data.size() / dim;
  if (k == 0) throw Error(ErrorCode::kTraining, "k must be positive");
  if (n < k) {
    throw Error(ErrorCode::kTraining, "k-means needs at least k=" + std::to_string(k) +
                                          " vectors, got " + std::to_string(n));
  }

  std::mt19937_64 rng(params.seed);
  KMeansResult result;
  result.centroids = seed_plus_plus(data, dim, n, k, rng);
  result.assignment.assign(n, 0);
  std::vector<float> dist(n, 0.0f);

  auto assign = [&]() -> bool {
    std::vector<char> changed_chunk(n, 0);
    detail::parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        auto x = data.subspan(i * dim, dim);
        std::uint32_t c = nearest_centroid(result.centroids, dim, x);
        changed_chunk[i] = c != result.assignment[i];
        result.assignment[i] = c;
        dist[i] = l2_sqr(std::span<const float>(result.centroids).subspan(c * dim, dim), x);
      }
    }, 256);
    double objective = 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      objective += dist[i];
      changed = changed || changed_chunk[i];
    }
    result.objective.push_back(objective);
    return changed;
  };

  assign();
  for (std::size_t iter = 0; iter < params.max_iters; ++iter) {
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t c = result.assignment[i];
      ++counts[c];
      const float* x = data.data() + i * dim;
      double* s = sums.data() + static_cast<std::size_t>(c) * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += x[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        result.centroids[c * dim + d] = static_cast<float>(sums[c * dim + d] / counts[c]);
      }
    }

    // Re-seed empty clusters at the farthest member of the largest cluster.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t largest = static_cast<std::size_t>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      std::span<const float> lc(result.centroids.data() + largest * dim, dim);
      std::size_t far = n;
      float far_d = -1.0f;
      for (std::size_t i = 0; i < n; ++i) {
        if (result.assignment[i] != largest) continue;
        float d = l2_sqr(data.subspan(i * dim, dim), lc);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      std::copy_n(data.begin() + far * dim, dim, result.centroids.begin() + c * dim);
      result.assignment[far] = static_cast<std::uint32_t>(c);
      --counts[largest];
      counts[c] = 1;
    }

    ++result.iterations;
    if (!assign()) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace avsearch
