// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <sstream>

#include "doctest.h"
#include "pofcap/common.hpp"
#include "pofcap/tensor_io.hpp"

using namespace pofcap;

TEST_CASE("poft header bytes are bit-exact") {
  TensorF32 t({1, 2, 2});
  t.data = {1.0f, 0.0f, -2.5f, 3.0f};
  std::ostringstream os(std::ios::binary);
  write_poft(os, {t});
  const std::string bytes = os.str();

  // magic, version u16 LE, dtype u8, ndim u8, dims u32 LE, payload f32 LE
  REQUIRE(bytes.size() == 4 + 2 + 1 + 1 + 3 * 4 + 4 * 4);
  CHECK(bytes.substr(0, 4) == "POFT");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version lo
  CHECK(static_cast<unsigned char>(bytes[5]) == 0);  // version hi
  CHECK(static_cast<unsigned char>(bytes[6]) == 1);  // dtype f32
  CHECK(static_cast<unsigned char>(bytes[7]) == 3);  // ndim
  const unsigned char dims_expected[12] = {1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0};
  CHECK(std::memcmp(bytes.data() + 8, dims_expected, 12) == 0);
  // 1.0f little-endian = 00 00 80 3f
  const unsigned char one[4] = {0x00, 0x00, 0x80, 0x3f};
  CHECK(std::memcmp(bytes.data() + 20, one, 4) == 0);
}

TEST_CASE("poft multi-record round trip") {
  TensorF32 a({2, 3});
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] = static_cast<float>(i) * 0.25f;
  TensorF32 b({4});
  b.data = {-1.5f, 2.25f, 0.0f, 1e-7f};

  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_poft(ss, {a, b});
  const auto back = read_poft(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].dims == a.dims);
  CHECK(back[0].data == a.data);
  CHECK(back[1].dims == b.dims);
  CHECK(back[1].data == b.data);
}

TEST_CASE("poft rejects malformed input") {
  SUBCASE("wrong magic") {
    std::stringstream ss;
    ss << "NOPE" << std::string(16, '\0');
    CHECK_THROWS_AS(read_poft(ss), FormatError);
  }
  SUBCASE("truncated payload") {
    TensorF32 t({2, 2});
    t.data = {1, 2, 3, 4};
    std::ostringstream os(std::ios::binary);
    write_poft(os, {t});
    std::string bytes = os.str();
    bytes.resize(bytes.size() - 5);
    std::istringstream is(bytes, std::ios::binary);
    CHECK_THROWS_AS(read_poft(is), FormatError);
  }
  SUBCASE("unsupported dtype") {
    TensorF32 t({1});
    t.data = {1.0f};
    std::ostringstream os(std::ios::binary);
    write_poft(os, {t});
    std::string bytes = os.str();
    bytes[6] = 9;
    std::istringstream is(bytes, std::ios::binary);
    CHECK_THROWS_AS(read_poft(is), FormatError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(read_poft_file("/nonexistent/x.poft"), FormatError); }
}
