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

#include "avsearch/vector_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "avsearch/vector_math.hpp"
#include "internal.hpp"

namespace avsearch {

void TopK::push(RecordId id, float score) {
  if (k_ == 0) return;
  SearchResult r{id, score};
  if (heap_.size() < k_) {
    heap_.push_back(r);
    std::push_heap(heap_.begin(), heap_.end(), ranks_before);
  } else if (ranks_before(r, heap_.front())) {
    std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
    heap_.back() = r;
    std::push_heap(heap_.begin(), heap_.end(), ranks_before);
  }
}

float TopK::threshold() const noexcept {
  if (heap_.size() < k_ || heap_.empty()) return -std::numeric_limits<float>::infinity();
  return heap_.front().score;
}

std::vector<SearchResult> TopK::take() && {
  std::sort_heap(heap_.begin(), heap_.end(), ranks_before);
  return std::move(heap_);
}

std::string_view to_string(IndexKind kind) {
  switch (kind) {
    case IndexKind::kFlat:
      return "flat";
    case IndexKind::kIvfFlat:
      return "ivf-flat";
    case IndexKind::kIvfPq:
      return "ivf-pq";
  }
  return "flat";
}

std::optional<IndexKind> parse_index_kind(std::string_view name) {
  if (name == "flat") return IndexKind::kFlat;
  if (name == "ivf-flat") return IndexKind::kIvfFlat;
  if (name == "ivf-pq") return IndexKind::kIvfPq;
  return std::nullopt;
}



VectorIndex::VectorIndex(ExtractorDescriptor extractor) : extractor_(std::move(extractor)) {
  if (extractor_.dim == 0) throw Error(ErrorCode::kInvalidArgument, "index dim must be > 0");
}

std::vector<SearchResult> VectorIndex::search(const Embedding& query,
                                              const ExtractorDescriptor& query_extractor,
                                              std::size_t topk,
                                              const SearchParams& params) const {
  require_compatible(extractor_, query_extractor);
  return search(query.values(), topk, params);
}

void VectorIndex::check_vectors(std::span<const RecordId> ids,
                                std::span<const float> vectors) const {
  if (vectors.size() != ids.size() * dim()) {
    throw Error(ErrorCode::kInvalidArgument, "vector block does not match ids x dim");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double norm = l2_norm(vectors.subspan(i * dim(), dim()));
    if (!(std::abs(norm - 1.0) <= 1e-4)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "vector for id " + std::to_string(ids[i]) + " is not unit-norm");
    }
  }
}

void VectorIndex::check_query(std::span<const float> query) const {
  if (query.size() != dim()) {
    throw Error(ErrorCode::kInvalidArgument, "query has dim " + std::to_string(query.size()) +
                                                 ", index expects " + std::to_string(dim()));
  }
}



FlatIndex::FlatIndex(ExtractorDescriptor extractor) : VectorIndex(std::move(extractor)) {}

void FlatIndex::add(std::span<const RecordId> ids, std::span<const float> vectors) {
  check_vectors(ids, vectors);
  ids_.insert(ids_.end(), ids.begin(), ids.end());
  vectors_.insert(vectors_.end(), vectors.begin(), vectors.end());
}

std::vector<SearchResult> FlatIndex::search(std::span<const float> query, std::size_t topk,
                                            const SearchParams&) const {
  check_query(query);
  TopK top(std::min(topk, ids_.size()));
  const std::size_t d = dim();
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    top.push(ids_[i], dot(query, std::span<const float>(vectors_).subspan(i * d, d)));
  }
  return std::move(top).take();
}

void FlatIndex::write_payload(std::ostream& out) const {
  detail::BinaryWriter w(out);
  w.u64s(ids_);
  w.floats(vectors_);
}

void FlatIndex::read_payload(std::istream& in) {
  detail::BinaryReader r(in);
  ids_ = r.u64s();
  vectors_ = r.floats();
  if (vectors_.size() != ids_.size() * dim()) {
    throw Error(ErrorCode::kFormat, "flat index payload size mismatch");
  }
}



IvfBase::IvfBase(ExtractorDescriptor extractor, IvfParams params)
    : VectorIndex(std::move(extractor)), params_(params) {
  if (params_.nlist == 0) throw Error(ErrorCode::kInvalidArgument, "nlist must be > 0");
  if (params_.nprobe == 0) params_.nprobe = ::avsearch::default_nprobe(params_.nlist);
}

void IvfBase::train_coarse(std::span<const float> vectors) {
  const std::size_t d = dim();
  const std::size_t n = vectors.size() / d;
  std::size_t cap = params_.max_train_points_per_centroid * params_.nlist;
  if (params_.max_train_points_per_centroid == 0 || n <= cap) {
    centroids_ = train_kmeans(vectors, d, params_.nlist, params_.kmeans).centroids;
    return;
  }
  // Deterministic strided subsample.
  std::vector<float> sample;
  sample.reserve(cap * d);
  for (std::size_t j = 0; j < cap; ++j) {
    std::size_t i = j * n / cap;
    sample.insert(sample.end(), vectors.begin() + i * d, vectors.begin() + (i + 1) * d);
  }
  centroids_ = train_kmeans(sample, d, params_.nlist, params_.kmeans).centroids;
}

std::uint32_t IvfBase::assign(std::span<const float> vector) const {
  return nearest_centroid(centroids_, dim(), vector);
}

std::vector<std::uint32_t> IvfBase::probe_order(std::span<const float> query,
                                                std::size_t nprobe) const {
  const std::size_t d = dim();
  const std::size_t nlist = centroids_.size() / d;
  nprobe = std::min(nprobe, nlist);
  TopK top(nprobe);
  for (std::size_t c = 0; c < nlist; ++c) {
    top.push(c, dot(query, std::span<const float>(centroids_).subspan(c * d, d)));
  }
  std::vector<std::uint32_t> cells;
  for (const SearchResult& r : std::move(top).take()) cells.push_back(static_cast<std::uint32_t>(r.id));
  return cells;
}

std::size_t IvfBase::effective_nprobe(const SearchParams& params) const {
  return params.nprobe == 0 ? params_.nprobe : params.nprobe;
}

void IvfBase::write_coarse(std::ostream& out) const {
  detail::BinaryWriter w(out);
  w.u64(params_.nlist);
  w.u64(params_.nprobe);
  w.floats(centroids_);
}

void IvfBase::read_coarse(std::istream& in) {
  detail::BinaryReader r(in);
  params_.nlist = r.u64();
  params_.nprobe = r.u64();
  centroids_ = r.floats();
  if (params_.nlist == 0 || centroids_.size() != params_.nlist * dim()) {
    throw Error(ErrorCode::kFormat, "coarse centroids do not match nlist x dim");
  }
}



IvfFlatIndex::IvfFlatIndex(ExtractorDescriptor extractor, IvfParams params)
    : IvfBase(std::move(extractor), params), lists_(params.nlist) {}

void IvfFlatIndex::train(std::span<const float> vectors) {
  if (vectors.size() % dim() != 0) throw Error(ErrorCode::kTraining, "bad training block");
  train_coarse(vectors);
}

void IvfFlatIndex::add(std::span<const RecordId> ids, std::span<const float> vectors) {
  if (!is_trained()) throw Error(ErrorCode::kTraining, "IVF index must be trained before add");
  check_vectors(ids, vectors);
  const std::size_t d = dim();
  std::vector<std::uint32_t> cells(ids.size());
  detail::parallel_for(ids.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) cells[i] = assign(vectors.subspan(i * d, d));
  }, 256);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    List& list = lists_[cells[i]];
    list.ids.push_back(ids[i]);
    list.vectors.insert(list.vectors.end(), vectors.begin() + i * d, vectors.begin() + (i + 1) * d);
  }
  count_ += ids.size();
}

std::vector<SearchResult> IvfFlatIndex::search(std::span<const float> query, std::size_t topk,
                                               const SearchParams& params) const {
  check_query(query);
  if (topk == 0 || count_ == 0) return {};
  const std::size_t d = dim();
  TopK top(std::min(topk, count_));
  for (std::uint32_t cell : probe_order(query, effective_nprobe(params))) {
    const List& list = lists_[cell];
    for (std::size_t i = 0; i < list.ids.size(); ++i) {
      top.push(list.ids[i], dot(query, std::span<const float>(list.vectors).subspan(i * d, d)));
    }
  }
  return std::move(top).take();
}

std::vector<RecordId> IvfFlatIndex::ids() const {
  std::vector<RecordId> out;
  out.reserve(count_);
  for (const List& list : lists_) out.insert(out.end(), list.ids.begin(), list.ids.end());
  return out;
}

void IvfFlatIndex::write_payload(std::ostream& out) const {
  write_coarse(out);
  detail::BinaryWriter w(out);
  for (const List& list : lists_) {
    w.u64s(list.ids);
    w.floats(list.vectors);
  }
}

void IvfFlatIndex::read_payload(std::istream& in) {
  read_coarse(in);
  detail::BinaryReader r(in);
  lists_.assign(params_.nlist, {});
  count_ = 0;
  for (List& list : lists_) {
    list.ids = r.u64s();
    list.vectors = r.floats();
    if (list.vectors.size() != list.ids.size() * dim()) {
      throw Error(ErrorCode::kFormat, "inverted list size mismatch");
    }
    count_ += list.ids.size();
  }
}



IvfPqIndex::IvfPqIndex(ExtractorDescriptor extractor, IvfPqParams params)
    : IvfBase(std::move(extractor), params.ivf), pq_params_(params), lists_(params.ivf.nlist) {
  if (params.m == 0 || dim() % params.m != 0) {
    throw Error(ErrorCode::kConfig, "PQ m=" + std::to_string(params.m) +
                                        " must divide dim=" + std::to_string(dim()));
  }
  if (params.ks == 0 || params.ks > 256) {
    throw Error(ErrorCode::kConfig, "PQ ks must be in [1, 256]");
  }
}

void IvfPqIndex::train(std::span<const float> vectors) {
  const std::size_t d = dim();
  if (vectors.size() % d != 0) throw Error(ErrorCode::kTraining, "bad training block");
  train_coarse(vectors);
  const std::size_t n = vectors.size() / d;
  const std::size_t cap = pq_params_.max_pq_train_points;
  if (cap == 0 || n <= cap) {
    pq_ = ProductQuantizer::train(vectors, d, pq_params_.m, pq_params_.ks, params_.kmeans);
    return;
  }
  std::vector<float> sample;
  sample.reserve(cap * d);
  for (std::size_t j = 0; j < cap; ++j) {
    std::size_t i = j * n / cap;
    sample.insert(sample.end(), vectors.begin() + i * d, vectors.begin() + (i + 1) * d);
  }
  pq_ = ProductQuantizer::train(sample, d, pq_params_.m, pq_params_.ks, params_.kmeans);
}

void IvfPqIndex::add(std::span<const RecordId> ids, std::span<const float> vectors) {
  if (!is_trained() || pq_.empty()) {
    throw Error(ErrorCode::kTraining, "IVF-PQ index must be trained before add");
  }
  check_vectors(ids, vectors);
  const std::size_t d = dim();
  const std::size_t cs = pq_.code_size();
  std::vector<std::uint32_t> cells(ids.size());
  std::vector<std::uint8_t> codes(ids.size() * cs);
  detail::parallel_for(ids.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto v = vectors.subspan(i * d, d);
      cells[i] = assign(v);
      pq_.encode(v, std::span<std::uint8_t>(codes).subspan(i * cs, cs));
    }
  }, 256);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    List& list = lists_[cells[i]];
    list.ids.push_back(ids[i]);
    list.codes.insert(list.codes.end(), codes.begin() + i * cs, codes.begin() + (i + 1) * cs);
  }
  count_ += ids.size();
}

std::vector<SearchResult> IvfPqIndex::search(std::span<const float> query, std::size_t topk,
                                             const SearchParams& params) const {
  check_query(query);
  if (topk == 0 || count_ == 0) return {};
  const std::vector<float> table = pq_.inner_product_table(query);
  const std::size_t cs = pq_.code_size();
  TopK top(std::min(topk, count_));
  for (std::uint32_t cell : probe_order(query, effective_nprobe(params))) {
    const List& list = lists_[cell];
    for (std::size_t i = 0; i < list.ids.size(); ++i) {
      top.push(list.ids[i],
               pq_.adc_score(table, std::span<const std::uint8_t>(list.codes).subspan(i * cs, cs)));
    }
  }
  return std::move(top).take();
}

std::vector<RecordId> IvfPqIndex::ids() const {
  std::vector<RecordId> out;
  out.reserve(count_);
  for (const List& list : lists_) out.insert(out.end(), list.ids.begin(), list.ids.end());
  return out;
}

void IvfPqIndex::write_payload(std::ostream& out) const {
  write_coarse(out);
  detail::BinaryWriter w(out);
  w.u64(pq_params_.m);
  w.u64(pq_params_.ks);
  pq_.write(out);
  for (const List& list : lists_) {
    w.u64s(list.ids);
    w.u8s(list.codes);
  }
}

void IvfPqIndex::read_payload(std::istream& in) {
  read_coarse(in);
  detail::BinaryReader r(in);
  pq_params_.ivf = params_;
  pq_params_.m = r.u64();
  pq_params_.ks = r.u64();
  pq_ = ProductQuantizer::read(in);
  if (pq_.dim() != dim()) throw Error(ErrorCode::kFormat, "PQ dim does not match index dim");
  lists_.assign(params_.nlist, {});
  count_ = 0;
  for (List& list : lists_) {
    list.ids = r.u64s();
    list.codes = r.u8s();
    if (list.codes.size() != list.ids.size() * pq_.code_size()) {
      throw Error(ErrorCode::kFormat, "inverted list code size mismatch");
    }
    count_ += list.ids.size();
  }
}



std::size_t default_nlist(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)))));
}

std::size_t default_nprobe(std::size_t nlist) { return std::max<std::size_t>(1, nlist / 16); }

std::unique_ptr<VectorIndex> build_index(const IndexParams& params,
                                         const ExtractorDescriptor& extractor,
                                         std::span<const RecordId> ids,
                                         std::span<const float> vectors) {
  std::unique_ptr<VectorIndex> index;
  const std::size_t n = ids.size();
  if (params.kind == IndexKind::kFlat || n == 0) {
    index = std::make_unique<FlatIndex>(extractor);
  } else {
    IvfParams ivf;
    ivf.nlist = std::min(params.nlist == 0 ? default_nlist(n) : params.nlist, n);
    ivf.nprobe = params.nprobe == 0 ? default_nprobe(ivf.nlist) : params.nprobe;
    ivf.kmeans = params.kmeans;
    if (params.kind == IndexKind::kIvfFlat) {
      index = std::make_unique<IvfFlatIndex>(extractor, ivf);
    } else {
      IvfPqParams pq;
      pq.ivf = ivf;
      pq.m = params.m;
      pq.ks = params.ks;
      index = std::make_unique<IvfPqIndex>(extractor, pq);
    }
    index->train(vectors);
  }
  index->add(ids, vectors);
  return index;
}

}  // namespace avsearch
