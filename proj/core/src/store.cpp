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

#include "avsearch/store.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "internal.hpp"

namespace avsearch {

namespace {

constexpr char kMagic[8] = {'A', 'V', 'S', 'S', 'T', 'O', 'R', 'E'};

}  // namespace

RecordId EmbeddingStore::append(EmbeddingRecord record, const Embedding& embedding) {
  if (embedding.dim() != extractor_.dim) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding has dim " + std::to_string(embedding.dim()) + ", store expects " +
                    std::to_string(extractor_.dim));
  }
  record.id = records_.size();
  records_.push_back(record);
  vectors_.insert(vectors_.end(), embedding.values().begin(), embedding.values().end());
  return record.id;
}

void EmbeddingStore::remove_media(std::span<const MediaId> media) {
  if (media.empty()) return;
  std::vector<MediaId> drop(media.begin(), media.end());
  std::sort(drop.begin(), drop.end());
  std::vector<EmbeddingRecord> records;
  std::vector<float> vectors;
  const std::size_t d = dim();
  for (const EmbeddingRecord& r : records_) {
    if (std::binary_search(drop.begin(), drop.end(), r.media_id)) continue;
    auto v = vector(r.id);
    EmbeddingRecord copy = r;
    copy.id = records.size();
    records.push_back(copy);
    vectors.insert(vectors.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
  }
  records_ = std::move(records);
  vectors_ = std::move(vectors);
}

const EmbeddingRecord& EmbeddingStore::record(RecordId id) const {
  if (id >= records_.size()) {
    throw Error(ErrorCode::kNotFound, "no embedding record " + std::to_string(id));
  }
  return records_[id];
}

std::span<const float> EmbeddingStore::vector(RecordId id) const {
  if (id >= records_.size()) {
    throw Error(ErrorCode::kNotFound, "no embedding record " + std::to_string(id));
  }
  return std::span<const float>(vectors_).subspan(id * dim(), dim());
}

std::vector<RecordId> EmbeddingStore::ids() const {
  std::vector<RecordId> out(records_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

void save_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    detail::BinaryWriter w(out);
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kStoreFormatVersion);
    const ExtractorDescriptor& e = store.extractor();
    w.str(e.name);
    w.str(e.version);
    w.u8(static_cast<std::uint8_t>(e.modality));
    w.u32(e.dim);
    w.u64(store.size());
    for (const EmbeddingRecord& r : store.records()) {
      w.u64(r.media_id);
      w.f64(r.t_start);
      w.f64(r.t_end);
      w.u8(r.bbox ? 1 : 0);
      if (r.bbox) {
        w.f32(r.bbox->x0);
        w.f32(r.bbox->y0);
        w.f32(r.bbox->x1);
        w.f32(r.bbox->y1);
      }
      w.f32(r.detection_score);
    }
    w.floats(store.vectors());
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot publish " + path.string() + ": " + ec.message());
}

EmbeddingStore load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open embedding store " + path.string());
  detail::BinaryReader r(in);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::kFormat, path.string() + " is not an embedding store");
  }
  if (r.u32() != kStoreFormatVersion) {
    throw Error(ErrorCode::kFormat, "unsupported embedding store version in " + path.string());
  }
  ExtractorDescriptor e;
  e.name = r.str();
  e.version = r.str();
  std::uint8_t modality = r.u8();
  if (modality > static_cast<std::uint8_t>(Modality::kAudio)) {
    throw Error(ErrorCode::kFormat, "bad modality in " + path.string());
  }
  e.modality = static_cast<Modality>(modality);
  e.dim = r.u32();
  std::uint64_t n = r.u64();
  EmbeddingStore store(e);
  std::vector<EmbeddingRecord> records;
  for (std::uint64_t i = 0; i < n; ++i) {
    EmbeddingRecord rec;
    rec.id = i;
    rec.media_id = r.u64();
    rec.t_start = r.f64();
    rec.t_end = r.f64();
    if (r.u8()) {
      BoundingBox b;
      b.x0 = r.f32();
      b.y0 = r.f32();
      b.x1 = r.f32();
      b.y1 = r.f32();
      rec.bbox = b;
    }
    rec.detection_score = r.f32();
    records.push_back(rec);
  }
  std::vector<float> vectors = r.floats();
  if (vectors.size() != n * e.dim) {
    throw Error(ErrorCode::kFormat, "vector block size mismatch in " + path.string());
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<float> v(vectors.begin() + static_cast<std::ptrdiff_t>(i * e.dim),
                         vectors.begin() + static_cast<std::ptrdiff_t>((i + 1) * e.dim));
    store.append(records[i], Embedding::from_unit(std::move(v)));
  }
  return store;
}

}  // namespace avsearch
