// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ffstab/core/error.hpp"
#include "ffstab/io/flow_io.hpp"
#include "ffstab/io/image_io.hpp"
#include "test_support.hpp"

using namespace ffstab;
namespace ts = test_support;

namespace {

// 8-bit storage round-trip reference: the nearest representable level.
float quantized(float v) {
  const int q = static_cast<int>(v * 255.0f + 0.5f);
  return static_cast<float>(q < 0 ? 0 : (q > 255 ? 255 : q)) / 255.0f;
}

}  // namespace

TEST_CASE("png round-trips rgb frames at 8-bit precision") {
  ts::TempDir dir;
  const Frame f = ts::textured_frame(37, 23, 5, 3);
  const std::string path = dir.file("rgb.png");
  write_image(path, f);
  const Frame back = read_image(path);
  REQUIRE(back.width == 37);
  REQUIRE(back.height == 23);
  REQUIRE(back.channels == 3);
  for (int i = 0; i < 23; ++i)
    for (int j = 0; j < 37; ++j)
      for (int c = 0; c < 3; ++c)
        CHECK(back.at(i, j, c) == doctest::Approx(quantized(f.at(i, j, c))).epsilon(1e-6));
}

TEST_CASE("png round-trips gray frames") {
  ts::TempDir dir;
  const Frame f = ts::textured_frame(16, 16, 6, 1);
  const std::string path = dir.file("gray.png");
  write_image(path, f);
  const Frame back = read_image(path);
  REQUIRE(back.channels == 1);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      CHECK(back.at(i, j) == doctest::Approx(quantized(f.at(i, j))).epsilon(1e-6));
}

TEST_CASE("ppm and pgm round-trip") {
  ts::TempDir dir;
  const Frame rgb = ts::textured_frame(12, 9, 7, 3);
  write_image(dir.file("a.ppm"), rgb);
  const Frame rgb_back = read_image(dir.file("a.ppm"));
  REQUIRE(rgb_back.channels == 3);
  CHECK(ts::max_frame_diff(rgb_back, rgb) < 1.0 / 255.0 + 1e-6);

  const Frame gray = ts::textured_frame(12, 9, 8, 1);
  write_image(dir.file("b.pgm"), gray);
  const Frame gray_back = read_image(dir.file("b.pgm"));
  REQUIRE(gray_back.channels == 1);
  CHECK(ts::max_frame_diff(gray_back, gray) < 1.0 / 255.0 + 1e-6);
}

TEST_CASE("unknown image extension is rejected") {
  ts::TempDir dir;
  const Frame f = ts::textured_frame(4, 4, 9, 1);
  CHECK_THROWS_AS(write_image(dir.file("x.bmp"), f), invalid_argument);
}

TEST_CASE("missing file raises an io error") {
  CHECK_THROWS_AS(read_image("/nonexistent/nowhere.png"), io_error);
  CHECK_THROWS_AS(read_flo("/nonexistent/nowhere.flo"), io_error);
  CHECK_THROWS_AS(read_mask_pgm("/nonexistent/nowhere.pgm"), io_error);
}

TEST_CASE("corrupt png payload raises a format error") {
  ts::TempDir dir;
  const std::string path = dir.file("broken.png");
  std::ofstream(path) << "definitely not a png";
  CHECK_THROWS_AS(read_image(path), format_error);
}

TEST_CASE("mask pgm round-trips bit-exactly") {
  ts::TempDir dir;
  BinaryMask m(19, 11);
  Rng rng(10);
  for (std::size_t p = 0; p < m.data.size(); ++p) m.data[p] = rng.uniform01() < 0.4 ? 1 : 0;
  const std::string path = dir.file("mask.pgm");
  write_mask_pgm(path, m);
  const BinaryMask back = read_mask_pgm(path);
  REQUIRE(back.width == 19);
  REQUIRE(back.height == 11);
  CHECK(back.data == m.data);
}

TEST_CASE("confidence pgm round-trips at 8-bit precision") {
  ts::TempDir dir;
  ConfidenceMap c(9, 7);
  Rng rng(11);
  for (auto& v : c.data) v = static_cast<float>(rng.uniform01());
  const std::string path = dir.file("conf.pgm");
  write_confidence_pgm(path, c);
  const ConfidenceMap back = read_confidence_pgm(path);
  REQUIRE(back.width == 9);
  REQUIRE(back.height == 7);
  for (std::size_t p = 0; p < c.data.size(); ++p)
    CHECK(std::abs(back.data[p] - c.data[p]) < 1.0f / 255.0f + 1e-6f);
}

TEST_CASE("flo files: 1x1 field is exactly 20 bytes and values are float32-exact") {
  ts::TempDir dir;
  FlowField f(1, 1);
  f.u[0] = 3.25;
  f.v[0] = -7.5;
  const std::string path = dir.file("tiny.flo");
  write_flo(path, f);
  CHECK(std::filesystem::file_size(path) == 20);
  const FlowField back = read_flo(path);
  REQUIRE(back.width == 1);
  REQUIRE(back.height == 1);
  CHECK(back.u[0] == doctest::Approx(3.25));
  CHECK(back.v[0] == doctest::Approx(-7.5));
}

TEST_CASE("flo files round-trip larger fields through float32") {
  ts::TempDir dir;
  FlowField f(13, 8);
  Rng rng(12);
  for (std::size_t p = 0; p < f.u.size(); ++p) {
    f.u[p] = rng.uniform(-30.0, 30.0);
    f.v[p] = rng.uniform(-30.0, 30.0);
  }
  const std::string path = dir.file("field.flo");
  write_flo(path, f);
  const FlowField back = read_flo(path);
  REQUIRE(back.width == 13);
  REQUIRE(back.height == 8);
  for (std::size_t p = 0; p < f.u.size(); ++p) {
    CHECK(back.u[p] == doctest::Approx(static_cast<float>(f.u[p])));
    CHECK(back.v[p] == doctest::Approx(static_cast<float>(f.v[p])));
  }
}

TEST_CASE("flo files with a bad magic or truncation are format errors") {
  ts::TempDir dir;
  const std::string bad_magic = dir.file("bad.flo");
  std::ofstream(bad_magic, std::ios::binary) << "XIEB\x01\x00\x00\x00\x01\x00\x00\x00";
  CHECK_THROWS_AS(read_flo(bad_magic), format_error);

  FlowField f(4, 4);
  const std::string short_file = dir.file("short.flo");
  write_flo(short_file, f);
  std::filesystem::resize_file(short_file, 30);
  CHECK_THROWS_AS(read_flo(short_file), format_error);
}

TEST_CASE("write failures surface as io errors") {
  const Frame f = ts::textured_frame(4, 4, 13, 1);
  CHECK_THROWS_AS(write_image("/nonexistent/dir/x.png", f), io_error);
  FlowField fl(2, 2);
  CHECK_THROWS_AS(write_flo("/nonexistent/dir/x.flo", fl), io_error);
}
