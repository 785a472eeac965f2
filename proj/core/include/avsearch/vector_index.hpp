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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "avsearch/common.hpp"
#include "avsearch/extract.hpp"

namespace avsearch {

struct SearchResult {
  RecordId id = 0;
  float score = 0.0f;  // inner product

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

/// Result order used everywhere: higher score first, then lower id.
inline bool ranks_before(const SearchResult& a, const SearchResult& b) noexcept {
  return a.score > b.score || (a.score == b.score && a.id < b.id);
}

// Bounded collector that keeps the best `k` results under `ranks_before`.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

  void push(RecordId id, float score);
  /// Worst score currently kept; -inf until the collector is full.
  float threshold() const noexcept;
  std::vector<SearchResult> take() &&;

 private:
  std::size_t k_;
  std::vector<SearchResult> heap_;  // worst result at the front
};

// ---------------------------------------------------------------------------
// k-means

struct KMeansParams {
  std::size_t max_iters = 25;
  std::uint64_t seed = 1234;
};

struct KMeansResult {
  std::vector<float> centroids;          // k x dim, row-major
  std::vector<std::uint32_t> assignment;  // one per input vector
  std::vector<double> objective;         // sum of squared distances after each assignment step
  std::size_t iterations = 0;
  bool converged = false;  // assignment reached a fixpoint before max_iters
};

/// Lloyd's algorithm under squared L2 with k-means++ seeding. Clusters that
/// empty out are re-seeded at the member of the largest cluster farthest from
/// its centroid, which never raises the objective. Deterministic for a fixed
/// seed on every platform. Throws Error(kTraining) when there are fewer
/// vectors than clusters.
KMeansResult train_kmeans(std::span<const float> data, std::size_t dim, std::size_t k,
                          const KMeansParams& params = {});

/// Index of the centroid nearest to `x` in squared L2; ties go to the lower index.
std::uint32_t nearest_centroid(std::span<const float> centroids, std::size_t dim,
                               std::span<const float> x);

// ---------------------------------------------------------------------------
// Indices

enum class IndexKind : std::uint8_t { kFlat = 1, kIvfFlat = 2, kIvfPq = 3 };
enum class Metric : std::uint8_t { kInnerProduct = 1 };

std::string_view to_string(IndexKind kind);
std::optional<IndexKind> parse_index_kind(std::string_view name);

struct SearchParams {
  std::size_t nprobe = 0;  // 0 selects the index default
};

// Common contract for every index kind: unit vectors in, inner-product
// results out, sorted by `ranks_before`. Indices are built by one writer and
// then searched concurrently; search is const and touches no shared state.
class VectorIndex {
 public:
  explicit VectorIndex(ExtractorDescriptor extractor);
  virtual ~VectorIndex() = default;

  VectorIndex(const VectorIndex&) = delete;
  VectorIndex& operator=(const VectorIndex&) = delete;

  virtual IndexKind kind() const noexcept = 0;
  virtual std::size_t size() const noexcept = 0;
  virtual bool is_trained() const noexcept = 0;

  /// No-op for flat indices.
  virtual void train(std::span<const float> vectors) = 0;
  /// `vectors` holds ids.size() rows of dim() floats, each unit-norm.
  virtual void add(std::span<const RecordId> ids, std::span<const float> vectors) = 0;
  void add(RecordId id, std::span<const float> vector) { add({&id, 1}, vector); }

  virtual std::vector<SearchResult> search(std::span<const float> query, std::size_t topk,
                                           const SearchParams& params = {}) const = 0;

  /// Checks that `query_extractor` matches the index's extractor first.
  std::vector<SearchResult> search(const Embedding& query,
                                   const ExtractorDescriptor& query_extractor,
                                   std::size_t topk, const SearchParams& params = {}) const;

  /// Every stored id, in storage order.
  virtual std::vector<RecordId> ids() const = 0;

  std::size_t dim() const noexcept { return extractor_.dim; }
  const ExtractorDescriptor& extractor() const noexcept { return extractor_; }

  virtual void write_payload(std::ostream& out) const = 0;
  virtual void read_payload(std::istream& in) = 0;

 protected:
  void check_vectors(std::span<const RecordId> ids, std::span<const float> vectors) const;
  void check_query(std::span<const float> query) const;

 private:
  ExtractorDescriptor extractor_;
};

class FlatIndex final : public VectorIndex {
 public:
  explicit FlatIndex(ExtractorDescriptor extractor);

  IndexKind kind() const noexcept override { return IndexKind::kFlat; }
  std::size_t size() const noexcept override { return ids_.size(); }
  bool is_trained() const noexcept override { return true; }
  void train(std::span<const float>) override {}
  using VectorIndex::add;
  void add(std::span<const RecordId> ids, std::span<const float> vectors) override;
  using VectorIndex::search;
  std::vector<SearchResult> search(std::span<const float> query, std::size_t topk,
                                   const SearchParams& params = {}) const override;
  std::vector<RecordId> ids() const override { return ids_; }

  void write_payload(std::ostream& out) const override;
  void read_payload(std::istream& in) override;

 private:
  std::vector<RecordId> ids_;
  std::vector<float> vectors_;
};

struct IvfParams {
  std::size_t nlist = 1;
  std::size_t nprobe = 1;
  KMeansParams kmeans;
  // Coarse training subsamples to nlist * this many vectors (0 = use all).
  std::size_t max_train_points_per_centroid = 64;
};

// Shared coarse quantizer for the IVF indices. Cells are ranked for probing
// by inner product between query and centroid (ties to the lower cell).
class IvfBase : public VectorIndex {
 public:
  IvfBase(ExtractorDescriptor extractor, IvfParams params);

  bool is_trained() const noexcept override { return !centroids_.empty(); }
  std::size_t nlist() const noexcept { return params_.nlist; }
  std::size_t default_nprobe() const noexcept { return params_.nprobe; }
  std::span<const float> centroids() const noexcept { return centroids_; }

  /// Cell whose centroid is nearest (squared L2) to `vector`.
  std::uint32_t assign(std::span<const float> vector) const;
  /// The `nprobe` cells to scan for `query`, best first.
  std::vector<std::uint32_t> probe_order(std::span<const float> query, std::size_t nprobe) const;
  virtual std::size_t list_size(std::size_t cell) const = 0;
  virtual std::span<const RecordId> list_ids(std::size_t cell) const = 0;

 protected:
  void train_coarse(std::span<const float> vectors);
  std::size_t effective_nprobe(const SearchParams& params) const;
  void write_coarse(std::ostream& out) const;
  void read_coarse(std::istream& in);

  IvfParams params_;
  std::vector<float> centroids_;
};

class IvfFlatIndex final : public IvfBase {
 public:
  IvfFlatIndex(ExtractorDescriptor extractor, IvfParams params);

  IndexKind kind() const noexcept override { return IndexKind::kIvfFlat; }
  std::size_t size() const noexcept override { return count_; }
  void train(std::span<const float> vectors) override;
  using VectorIndex::add;
  void add(std::span<const RecordId> ids, std::span<const float> vectors) override;
  using VectorIndex::search;
  std::vector<SearchResult> search(std::span<const float> query, std::size_t topk,
                                   const SearchParams& params = {}) const override;
  std::vector<RecordId> ids() const override;
  std::size_t list_size(std::size_t cell) const override { return lists_[cell].ids.size(); }
  std::span<const RecordId> list_ids(std::size_t cell) const override { return lists_[cell].ids; }
  std::span<const float> list_vectors(std::size_t cell) const { return lists_[cell].vectors; }

  void write_payload(std::ostream& out) const override;
  void read_payload(std::istream& in) override;

 private:
  struct List {
    std::vector<RecordId> ids;
    std::vector<float> vectors;
  };
  std::vector<List> lists_;
  std::size_t count_ = 0;
};

// Product quantizer over raw (not residual) vectors: the vector is cut into
// m contiguous slices and each slice is replaced by the index of its nearest
// codeword. Code symbols are one byte, so ks <= 256.
class ProductQuantizer {
 public:
  ProductQuantizer() = default;

  /// Trains one k-means per slice; slice s uses a seed derived from
  /// (params.seed, s). With fewer training vectors than ks the codebooks
  /// shrink to the number of training vectors.
  static ProductQuantizer train(std::span<const float> vectors, std::size_t dim,
                                std::size_t m, std::size_t ks, const KMeansParams& params = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t ks() const noexcept { return ks_; }
  std::size_t sub_dim() const noexcept { return m_ == 0 ? 0 : dim_ / m_; }
  std::size_t code_size() const noexcept { return m_; }
  bool empty() const noexcept { return codebooks_.empty(); }

  /// ks x sub_dim codewords of slice `s`.
  std::span<const float> codebook(std::size_t s) const;

  void encode(std::span<const float> vector, std::span<std::uint8_t> code) const;
  std::vector<std::uint8_t> encode(std::span<const float> vector) const;
  std::vector<float> decode(std::span<const std::uint8_t> code) const;

  /// m x ks table of inner products between query slices and codewords.
  std::vector<float> inner_product_table(std::span<const float> query) const;
  /// Sum of the table entries selected by `code`.
  float adc_score(std::span<const float> table, std::span<const std::uint8_t> code) const;

  void write(std::ostream& out) const;
  static ProductQuantizer read(std::istream& in);

  friend bool operator==(const ProductQuantizer&, const ProductQuantizer&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t m_ = 0;
  std::size_t ks_ = 0;
  std::vector<float> codebooks_;  // m x ks x sub_dim
};

struct IvfPqParams {
  IvfParams ivf;
  std::size_t m = 8;
  std::size_t ks = 256;
  // PQ training subsample cap (0 = use all).
  std::size_t max_pq_train_points = 65536;
};

class IvfPqIndex final : public IvfBase {
 public:
  IvfPqIndex(ExtractorDescriptor extractor, IvfPqParams params);

  IndexKind kind() const noexcept override { return IndexKind::kIvfPq; }
  std::size_t size() const noexcept override { return count_; }
  void train(std::span<const float> vectors) override;
  using VectorIndex::add;
  void add(std::span<const RecordId> ids, std::span<const float> vectors) override;
  using VectorIndex::search;
  /// Scores are asymmetric: exact query against reconstructed database vectors.
  std::vector<SearchResult> search(std::span<const float> query, std::size_t topk,
                                   const SearchParams& params = {}) const override;
  std::vector<RecordId> ids() const override;
  std::size_t list_size(std::size_t cell) const override { return lists_[cell].ids.size(); }
  std::span<const RecordId> list_ids(std::size_t cell) const override { return lists_[cell].ids; }
  std::span<const std::uint8_t> list_codes(std::size_t cell) const { return lists_[cell].codes; }

  const ProductQuantizer& quantizer() const noexcept { return pq_; }

  void write_payload(std::ostream& out) const override;
  void read_payload(std::istream& in) override;

 private:
  struct List {
    std::vector<RecordId> ids;
    std::vector<std::uint8_t> codes;
  };
  IvfPqParams pq_params_;
  ProductQuantizer pq_;
  std::vector<List> lists_;
  std::size_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Building and persistence

struct IndexParams {
  IndexKind kind = IndexKind::kFlat;
  std::size_t nlist = 0;   // 0: max(1, floor(sqrt(N)))
  std::size_t nprobe = 0;  // 0: max(1, nlist / 16)
  std::size_t m = 8;
  std::size_t ks = 256;
  KMeansParams kmeans;
};

std::size_t default_nlist(std::size_t n);
std::size_t default_nprobe(std::size_t nlist);

/// Creates, trains and fills an index of `params.kind` in one go.
std::unique_ptr<VectorIndex> build_index(const IndexParams& params,
                                         const ExtractorDescriptor& extractor,
                                         std::span<const RecordId> ids,
                                         std::span<const float> vectors);

inline constexpr std::uint32_t kIndexFormatVersion = 1;

// Index file: "AVSINDEX", u32 version, u8 kind, u32 dim, u8 metric, then the
// extractor (name, version, modality), then the kind-specific payload. All
// integers and floats little-endian.
void write_index(const VectorIndex& index, std::ostream& out);
void save_index(const VectorIndex& index, const std::filesystem::path& path);

/// Throws Error(kExtractorMismatch) when `expected` is given and differs from
/// the extractor recorded in the file; Error(kFormat) on corrupt input.
std::unique_ptr<VectorIndex> read_index(std::istream& in,
                                        const std::optional<ExtractorDescriptor>& expected = {});
std::unique_ptr<VectorIndex> load_index(const std::filesystem::path& path,
                                        const std::optional<ExtractorDescriptor>& expected = {});

}  // namespace avsearch
