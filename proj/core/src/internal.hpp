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

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "avsearch/common.hpp"

namespace avsearch::detail {

/// Runs fn(begin, end) over contiguous chunks of [0, n) on up to
/// hardware_concurrency threads. fn must only write to its own chunk.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_chunk = 1024) {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, n / min_chunk));
  if (threads <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t step = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t begin = t * step;
    std::size_t end = std::min(n, begin + step);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

// Little-endian binary writer/reader used by the index and store formats.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  template <typename T>
  void uint(T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, sizeof(T));
  }
  void u8(std::uint8_t v) { uint(v); }
  void u32(std::uint32_t v) { uint(v); }
  void u64(std::uint64_t v) { uint(v); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void floats(std::span<const float> v) {
    u64(v.size());
    if constexpr (std::endian::native == std::endian::little) {
      bytes(v.data(), v.size() * sizeof(float));
    } else {
      for (float f : v) f32(f);
    }
  }
  void u64s(std::span<const std::uint64_t> v) {
    u64(v.size());
    if constexpr (std::endian::native == std::endian::little) {
      bytes(v.data(), v.size() * sizeof(std::uint64_t));
    } else {
      for (auto x : v) u64(x);
    }
  }
  void u8s(std::span<const std::uint8_t> v) {
    u64(v.size());
    bytes(v.data(), v.size());
  }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(ErrorCode::kFormat, "unexpected end of file");
    }
  }
  template <typename T>
  T uint() {
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T{buf[i]} << (8 * i));
    return v;
  }
  std::uint8_t u8() { return uint<std::uint8_t>(); }
  std::uint32_t u32() { return uint<std::uint32_t>(); }
  std::uint64_t u64() { return uint<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    std::uint32_t n = u32();
    check_length(n);
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  std::vector<float> floats() {
    std::uint64_t n = u64();
    check_length(n * sizeof(float));
    std::vector<float> v(n);
    if constexpr (std::endian::native == std::endian::little) {
      bytes(v.data(), n * sizeof(float));
    } else {
      for (auto& f : v) f = f32();
    }
    return v;
  }
  std::vector<std::uint64_t> u64s() {
    std::uint64_t n = u64();
    check_length(n * sizeof(std::uint64_t));
    std::vector<std::uint64_t> v(n);
    if constexpr (std::endian::native == std::endian::little) {
      bytes(v.data(), n * sizeof(std::uint64_t));
    } else {
      for (auto& x : v) x = u64();
    }
    return v;
  }
  std::vector<std::uint8_t> u8s() {
    std::uint64_t n = u64();
    check_length(n);
    std::vector<std::uint8_t> v(n);
    bytes(v.data(), n);
    return v;
  }

 private:
  // Guards allocations against corrupt length fields.
  static void check_length(std::uint64_t n) {
    if (n > (std::uint64_t{1} << 36)) throw Error(ErrorCode::kFormat, "implausible length field");
  }

  std::istream& in_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace avsearch::detail
