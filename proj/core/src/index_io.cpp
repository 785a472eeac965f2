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

#include <cstring>
#include <fstream>

#include "avsearch/vector_index.hpp"
#include "internal.hpp"

namespace avsearch {

namespace {

constexpr char kMagic[8] = {'A', 'V', 'S', 'I', 'N', 'D', 'E', 'X'};

}  // namespace

void write_index(const VectorIndex& index, std::ostream& out) {
  detail::BinaryWriter w(out);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kIndexFormatVersion);
  w.u8(static_cast<std::uint8_t>(index.kind()));
  w.u32(static_cast<std::uint32_t>(index.dim()));
  w.u8(static_cast<std::uint8_t>(Metric::kInnerProduct));
  const ExtractorDescriptor& e = index.extractor();
  w.str(e.name);
  w.str(e.version);
  w.u8(static_cast<std::uint8_t>(e.modality));
  index.write_payload(out);
  if (!out) throw Error(ErrorCode::kIo, "index write failed");
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    write_index(index, out);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot publish " + path.string() + ": " + ec.message());
}

std::unique_ptr<VectorIndex> read_index(std::istream& in,
                                        const std::optional<ExtractorDescriptor>& expected) {
  detail::BinaryReader r(in);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kFormat, "not an index file");
  }
  if (std::uint32_t v = r.u32(); v != kIndexFormatVersion) {
    throw Error(ErrorCode::kFormat, "unsupported index version " + std::to_string(v));
  }
  auto kind = static_cast<IndexKind>(r.u8());
  ExtractorDescriptor e;
  e.dim = r.u32();
  if (r.u8() != static_cast<std::uint8_t>(Metric::kInnerProduct)) {
    throw Error(ErrorCode::kFormat, "unsupported metric");
  }
  e.name = r.str();
  e.version = r.str();
  std::uint8_t modality = r.u8();
  if (modality > static_cast<std::uint8_t>(Modality::kAudio)) {
    throw Error(ErrorCode::kFormat, "unknown modality in index header");
  }
  e.modality = static_cast<Modality>(modality);
  if (expected) require_compatible(e, *expected);

  std::unique_ptr<VectorIndex> index;
  switch (kind) {
    case IndexKind::kFlat:
      index = std::make_unique<FlatIndex>(e);
      break;
    case IndexKind::kIvfFlat:
      index = std::make_unique<IvfFlatIndex>(e, IvfParams{});
      break;
    case IndexKind::kIvfPq: {
      IvfPqParams p;
      p.m = 1;
      p.ks = 1;
      index = std::make_unique<IvfPqIndex>(e, p);
      break;
    }
    default:
      throw Error(ErrorCode::kFormat, "unknown index kind");
  }
  index->read_payload(in);
  return index;
}

std::unique_ptr<VectorIndex> load_index(const std::filesystem::path& path,
                                        const std::optional<ExtractorDescriptor>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open index " + path.string());
  return read_index(in, expected);
}

}  // namespace avsearch
