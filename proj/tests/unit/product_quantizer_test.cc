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

#include <sstream>

#include <gtest/gtest.h>

#include "avsearch/vector_index.hpp"
#include "test_support.hpp"

namespace avsearch {
namespace {

double sq_dist(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (double(a[d]) - b[d]) * (double(a[d]) - b[d]);
  return s;
}

TEST(ProductQuantizer, MemorizesSmallTrainingSets) {
  const std::size_t dim = 12;
  auto data = testing::random_unit_vectors(40, dim, 3);
  auto pq = ProductQuantizer::train(data, dim, 3, 64);
  for (std::size_t i = 0; i < 40; ++i) {
    std::span<const float> v(data.data() + i * dim, dim);
    auto decoded = pq.decode(pq.encode(v));
    EXPECT_TRUE(std::equal(decoded.begin(), decoded.end(), v.begin())) << i;
  }
}

TEST(ProductQuantizer, SingleSliceIsVectorQuantization) {
  const std::size_t dim = 6, ks = 8;
  auto data = testing::gaussian_mixture(300, dim, 5, 4);
  auto pq = ProductQuantizer::train(data, dim, 1, ks);
  ASSERT_EQ(pq.m(), 1u);
  auto book = pq.codebook(0);
  ASSERT_EQ(book.size(), ks * dim);
  auto queries = testing::random_unit_vectors(50, dim, 5);
  for (std::size_t q = 0; q < 50; ++q) {
    std::span<const float> v(queries.data() + q * dim, dim);
    auto code = pq.encode(v);
    ASSERT_EQ(code.size(), 1u);
    EXPECT_EQ(code[0], nearest_centroid(book, dim, v));
    auto decoded = pq.decode(code);
    EXPECT_TRUE(std::equal(decoded.begin(), decoded.end(), book.begin() + code[0] * dim));
  }
}

TEST(ProductQuantizer, ErrorNeverExceedsAnyCodewordConcatenation) {
  const std::size_t dim = 4, m = 2, ks = 4;
  auto data = testing::gaussian_mixture(200, dim, 6, 6);
  auto pq = ProductQuantizer::train(data, dim, m, ks);
  const std::size_t sub = pq.sub_dim();
  auto probes = testing::random_unit_vectors(100, dim, 7);
  for (std::size_t q = 0; q < 100; ++q) {
    std::span<const float> v(probes.data() + q * dim, dim);
    const double err = sq_dist(pq.decode(pq.encode(v)), v);
    for (std::size_t a = 0; a < ks; ++a) {
      for (std::size_t b = 0; b < ks; ++b) {
        std::vector<float> cand;
        auto c0 = pq.codebook(0).subspan(a * sub, sub);
        auto c1 = pq.codebook(1).subspan(b * sub, sub);
        cand.insert(cand.end(), c0.begin(), c0.end());
        cand.insert(cand.end(), c1.begin(), c1.end());
        EXPECT_LE(err, sq_dist(cand, v) + 1e-9);
      }
    }
  }
}

TEST(ProductQuantizer, AdcEqualsDotWithDecodedVector) {
  const std::size_t dim = 64;
  auto data = testing::gaussian_mixture(3000, dim, 12, 8);
  auto pq = ProductQuantizer::train(data, dim, 8, 256);
  auto queries = testing::random_unit_vectors(20, dim, 9);
  for (std::size_t q = 0; q < 20; ++q) {
    std::span<const float> query(queries.data() + q * dim, dim);
    auto table = pq.inner_product_table(query);
    ASSERT_EQ(table.size(), pq.m() * pq.ks());
    for (std::size_t i = 0; i < 3000; i += 37) {
      auto code = pq.encode({data.data() + i * dim, dim});
      auto decoded = pq.decode(code);
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += double(decoded[d]) * query[d];
      EXPECT_NEAR(pq.adc_score(table, code), dot, 1e-5);
    }
  }
}

TEST(ProductQuantizer, CodebooksShrinkToTrainingSize) {
  auto data = testing::random_unit_vectors(10, 8, 10);
  auto pq = ProductQuantizer::train(data, 8, 2, 256);
  EXPECT_EQ(pq.ks(), 10u);
}

TEST(ProductQuantizer, RejectsIndivisibleDimension) {
  auto data = testing::random_unit_vectors(10, 10, 11);
  EXPECT_THROW(ProductQuantizer::train(data, 10, 3, 4), Error);
}

TEST(ProductQuantizer, SerializationRoundTrip) {
  auto data = testing::random_unit_vectors(100, 16, 12);
  auto pq = ProductQuantizer::train(data, 16, 4, 16);
  std::stringstream s;
  pq.write(s);
  EXPECT_EQ(ProductQuantizer::read(s), pq);
}

}  // namespace
}  // namespace avsearch
