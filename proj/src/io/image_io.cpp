// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/io/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "ffstab/core/error.hpp"

namespace ffstab {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw io_error("cannot open " + path);
  return f;
}

std::uint8_t quantize(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

Frame read_png(std::FILE* fp, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw io_error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw io_error("libpng init failed");
  }
  std::vector<std::vector<png_byte>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("malformed PNG: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("unsupported PNG channel count in " + path);
  }
  rows.assign(h, std::vector<png_byte>(png_get_rowbytes(png, info)));
  std::vector<png_bytep> row_ptrs(h);
  for (png_uint_32 i = 0; i < h; ++i) row_ptrs[i] = rows[i].data();
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Frame frame(static_cast<int>(w), static_cast<int>(h), channels);
  for (png_uint_32 i = 0; i < h; ++i)
    for (png_uint_32 j = 0; j < w * channels; ++j)
      frame.data[static_cast<std::size_t>(i) * w * channels + j] = rows[i][j] / 255.0f;
  return frame;
}

void write_png(const std::string& path, const Frame& frame) {
  FilePtr fp = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw io_error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw io_error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw io_error("PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  const int color = frame.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, frame.width, frame.height, 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<std::size_t>(frame.width) * frame.channels);
  for (int i = 0; i < frame.height; ++i) {
    for (int j = 0; j < frame.width; ++j)
      for (int ch = 0; ch < frame.channels; ++ch)
        row[static_cast<std::size_t>(j) * frame.channels + ch] = quantize(frame.at(i, j, ch));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Binary PPM (P6) / PGM (P5) with maxval 255.
void skip_pnm_space(std::FILE* f) {
  int c = std::fgetc(f);
  while (c == '#' || std::isspace(c)) {
    if (c == '#')
      while (c != '\n' && c != EOF) c = std::fgetc(f);
    c = std::fgetc(f);
  }
  if (c != EOF) std::ungetc(c, f);
}

int read_pnm_int(std::FILE* f, const std::string& path) {
  skip_pnm_space(f);
  int v = 0;
  if (std::fscanf(f, "%d", &v) != 1) throw format_error("malformed PNM header: " + path);
  return v;
}

Frame read_pnm(std::FILE* f, char kind, const std::string& path) {
  const int channels = kind == '6' ? 3 : 1;
  const int w = read_pnm_int(f, path);
  const int h = read_pnm_int(f, path);
  const int maxval = read_pnm_int(f, path);
  if (w <= 0 || h <= 0 || maxval != 255) throw format_error("unsupported PNM header: " + path);
  std::fgetc(f);  // single whitespace after maxval
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h * channels);
  if (std::fread(buf.data(), 1, buf.size(), f) != buf.size())
    throw format_error("truncated PNM payload: " + path);
  Frame frame(w, h, channels);
  for (std::size_t k = 0; k < buf.size(); ++k) frame.data[k] = buf[k] / 255.0f;
  return frame;
}

void write_pnm(const std::string& path, const Frame& frame) {
  FilePtr f = open_file(path, "wb");
  std::fprintf(f.get(), "P%c\n%d %d\n255\n", frame.channels == 3 ? '6' : '5', frame.width,
               frame.height);
  std::vector<std::uint8_t> buf(frame.data.size());
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] = quantize(frame.data[k]);
  if (std::fwrite(buf.data(), 1, buf.size(), f.get()) != buf.size())
    throw io_error("short write: " + path);
}

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

Frame read_image(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char magic[2] = {0, 0};
  if (std::fread(magic, 1, 2, f.get()) != 2) throw format_error("empty image file: " + path);
  if (magic[0] == 0x89 && magic[1] == 'P') {
    std::rewind(f.get());
    return read_png(f.get(), path);
  }
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6'))
    return read_pnm(f.get(), static_cast<char>(magic[1]), path);
  throw format_error("unrecognized image format: " + path);
}

void write_image(const std::string& path, const Frame& frame) {
  if (frame.width <= 0 || frame.height <= 0)
    throw invalid_argument("write_image: empty frame");
  if (frame.channels != 1 && frame.channels != 3)
    throw invalid_argument("write_image: channels must be 1 or 3");
  if (has_suffix(path, ".png")) {
    write_png(path, frame);
  } else if (has_suffix(path, ".ppm") || has_suffix(path, ".pgm")) {
    write_pnm(path, frame);
  } else {
    throw invalid_argument("write_image: unsupported extension in " + path);
  }
}

BinaryMask read_mask_pgm(const std::string& path) {
  Frame f = read_image(path);
  if (f.channels != 1) throw format_error("mask must be single-channel: " + path);
  BinaryMask m(f.width, f.height);
  for (std::size_t k = 0; k < f.data.size(); ++k) m.data[k] = f.data[k] >= 0.5f ? 1 : 0;
  return m;
}

void write_mask_pgm(const std::string& path, const BinaryMask& mask) {
  Frame f(mask.width, mask.height, 1);
  for (std::size_t k = 0; k < mask.data.size(); ++k) f.data[k] = mask.data[k] ? 1.0f : 0.0f;
  write_image(path, f);
}

ConfidenceMap read_confidence_pgm(const std::string& path) {
  Frame f = read_image(path);
  if (f.channels != 1) throw format_error("confidence map must be single-channel: " + path);
  ConfidenceMap m(f.width, f.height);
  m.data = f.data;
  return m;
}

void write_confidence_pgm(const std::string& path, const ConfidenceMap& map) {
  Frame f(map.width, map.height, 1);
  f.data = map.data;
  write_image(path, f);
}

}  // namespace ffstab
