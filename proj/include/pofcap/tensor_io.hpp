// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <numeric>
#include <string>
#include <vector>

namespace pofcap {

// Dense row-major float32 tensor. The container format ("POFT") is bit-exact
// across platforms: every field is written little-endian byte by byte.
//
// Record layout:
//   magic   4 bytes  "POFT"
//   version u16      currently 1
//   dtype   u8       1 = float32
//   ndim    u8
//   dims    ndim x u32
//   payload row-major float32
//
// A file may hold several records back to back; readers consume until EOF.
struct TensorF32 {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  TensorF32() = default;
  explicit TensorF32(std::vector<std::uint32_t> d) : dims(std::move(d)) {
    data.assign(element_count(), 0.0f);
  }

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
  }

  // 3-d accessors (channel, row, col); the common case in this project.
  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * dims[1] + y) * dims[2] + x];
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * dims[1] + y) * dims[2] + x];
  }
};

inline constexpr std::uint16_t kPoftVersion = 1;
inline constexpr std::uint8_t kPoftDtypeF32 = 1;

void write_poft(std::ostream& os, const std::vector<TensorF32>& tensors);
std::vector<TensorF32> read_poft(std::istream& is);

void write_poft_file(const std::string& path, const std::vector<TensorF32>& tensors);
std::vector<TensorF32> read_poft_file(const std::string& path);

}  // namespace pofcap
