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

#include "avsearch/vector_index.hpp"
#include "avsearch/vector_math.hpp"
#include "internal.hpp"

namespace avsearch {

ProductQuantizer ProductQuantizer::train(std::span<const float> vectors, std::size_t dim,
                                         std::size_t m, std::size_t ks,
                                         const KMeansParams& params) {
  if (m == 0 || dim == 0 || dim % m != 0) {
    throw Error(ErrorCode::kTraining, "PQ m must divide dim");
  }
  if (ks == 0 || ks > 256) throw Error(ErrorCode::kTraining, "PQ ks must be in [1, 256]");
  if (vectors.empty() || vectors.size() % dim != 0) {
    throw Error(ErrorCode::kTraining, "PQ training block is empty or ragged");
  }
  const std::size_t n = vectors.size() / dim;
  const std::size_t sub = dim / m;

  ProductQuantizer pq;
  pq.dim_ = dim;
  pq.m_ = m;
  pq.ks_ = std::min(ks, n);
  pq.codebooks_.resize(m * pq.ks_ * sub);

  std::vector<float> slice(n * sub);
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(vectors.begin() + i * dim + s * sub, sub, slice.begin() + i * sub);
    }
    KMeansParams sp = params;
    sp.seed = detail::splitmix64(params.seed ^ (0x9e3779b97f4a7c15ULL * (s + 1)));
    auto km = train_kmeans(slice, sub, pq.ks_, sp);
    std::copy(km.centroids.begin(), km.centroids.end(),
              pq.codebooks_.begin() + s * pq.ks_ * sub);
  }
  return pq;
}

std::span<const float> ProductQuantizer::codebook(std::size_t s) const {
  const std::size_t sub = sub_dim();
  return std::span<const float>(codebooks_).subspan(s * ks_ * sub, ks_ * sub);
}

void ProductQuantizer::encode(std::span<const float> vector, std::span<std::uint8_t> code) const {
  if (vector.size() != dim_ || code.size() != m_) {
    throw Error(ErrorCode::kInvalidArgument, "PQ encode size mismatch");
  }
  const std::size_t sub = sub_dim();
  for (std::size_t s = 0; s < m_; ++s) {
    code[s] = static_cast<std::uint8_t>(
        nearest_centroid(codebook(s), sub, vector.subspan(s * sub, sub)));
  }
}

std::vector<std::uint8_t> ProductQuantizer::encode(std::span<const float> vector) const {
  std::vector<std::uint8_t> code(m_);
  encode(vector, code);
  return code;
}

std::vector<float> ProductQuantizer::decode(std::span<const std::uint8_t> code) const {
  if (code.size() != m_) throw Error(ErrorCode::kInvalidArgument, "PQ code size mismatch");
  const std::size_t sub = sub_dim();
  std::vector<float> out(dim_);
  for (std::size_t s = 0; s < m_; ++s) {
    if (code[s] >= ks_) throw Error(ErrorCode::kInvalidArgument, "PQ code symbol out of range");
    auto word = codebook(s).subspan(code[s] * sub, sub);
    std::copy(word.begin(), word.end(), out.begin() + s * sub);
  }
  return out;
}

std::vector<float> ProductQuantizer::inner_product_table(std::span<const float> query) const {
  if (query.size() != dim_) throw Error(ErrorCode::kInvalidArgument, "PQ query dim mismatch");
  const std::size_t sub = sub_dim();
  std::vector<float> table(m_ * ks_);
  for (std::size_t s = 0; s < m_; ++s) {
    auto q = query.subspan(s * sub, sub);
    auto book = codebook(s);
    for (std::size_t c = 0; c < ks_; ++c) table[s * ks_ + c] = dot(q, book.subspan(c * sub, sub));
  }
  return table;
}

float ProductQuantizer::adc_score(std::span<const float> table,
                                  std::span<const std::uint8_t> code) const {
  float score = 0.0f;
  for (std::size_t s = 0; s < m_; ++s) score += table[s * ks_ + code[s]];
  return score;
}

void ProductQuantizer::write(std::ostream& out) const {
  detail::BinaryWriter w(out);
  w.u64(dim_);
  w.u64(m_);
  w.u64(ks_);
  w.floats(codebooks_);
}

ProductQuantizer ProductQuantizer::read(std::istream& in) {
  detail::BinaryReader r(in);
  ProductQuantizer pq;
  pq.dim_ = r.u64();
  pq.m_ = r.u64();
  pq.ks_ = r.u64();
  pq.codebooks_ = r.floats();
  if (pq.m_ == 0 || pq.dim_ % pq.m_ != 0 || pq.ks_ == 0 || pq.ks_ > 256 ||
      pq.codebooks_.size() != pq.m_ * pq.ks_ * (pq.dim_ / pq.m_)) {
    throw Error(ErrorCode::kFormat, "corrupt PQ codebooks");
  }
  return pq;
}

}  // namespace avsearch
