// SPDX-License-Identifier: Apache-2.0
#include "pofcap/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "pofcap/common.hpp"

namespace pofcap {

namespace {

constexpr bool kHostLittle = std::endian::native == std::endian::little;

void put_u16(std::ostream& os, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  os.write(b, 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

std::uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char*>(b), 2) || is.gcount() != 2)
    throw FormatError("bad container: truncated header");
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4) || is.gcount() != 4)
    throw FormatError("bad container: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_poft(std::ostream& os, const std::vector<TensorF32>& tensors) {
  for (const auto& t : tensors) {
    os.write("POFT", 4);
    put_u16(os, kPoftVersion);
    os.put(static_cast<char>(kPoftDtypeF32));
    os.put(static_cast<char>(t.dims.size()));
    for (auto d : t.dims) put_u32(os, d);
    if (kHostLittle) {
      os.write(reinterpret_cast<const char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * 4));
    } else {
      for (float f : t.data) {
        std::uint32_t v;
        std::memcpy(&v, &f, 4);
        put_u32(os, v);
      }
    }
  }
}

std::vector<TensorF32> read_poft(std::istream& is) {
  std::vector<TensorF32> out;
  char magic[4];
  while (is.read(magic, 4)) {
    if (std::memcmp(magic, "POFT", 4) != 0) throw FormatError("bad container: wrong magic");
    const std::uint16_t version = get_u16(is);
    if (version != kPoftVersion) throw FormatError("bad container: unsupported version");
    char dtype = 0, ndim = 0;
    if (!is.get(dtype) || !is.get(ndim)) throw FormatError("bad container: truncated header");
    if (static_cast<std::uint8_t>(dtype) != kPoftDtypeF32)
      throw FormatError("bad container: unsupported dtype");
    TensorF32 t;
    t.dims.resize(static_cast<std::size_t>(static_cast<unsigned char>(ndim)));
    for (auto& d : t.dims) d = get_u32(is);
    const std::size_t n = t.element_count();
    t.data.resize(n);
    const std::streamsize bytes = static_cast<std::streamsize>(n * 4);
    if (!is.read(reinterpret_cast<char*>(t.data.data()), bytes) || is.gcount() != bytes)
      throw FormatError("bad container: truncated payload");
    if (!kHostLittle) {
      for (auto& f : t.data) {
        std::uint32_t v;
        std::memcpy(&v, &f, 4);
        v = ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
        std::memcpy(&f, &v, 4);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_poft_file(const std::string& path, const std::vector<TensorF32>& tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path);
  write_poft(os, tensors);
  if (!os) throw FormatError("write failed: " + path);
}

std::vector<TensorF32> read_poft_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path);
  return read_poft(is);
}

}  // namespace pofcap
