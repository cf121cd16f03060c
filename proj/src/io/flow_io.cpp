// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/io/flow_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "ffstab/core/error.hpp"

namespace ffstab {

namespace {

constexpr float kFloMagic = 202021.25f;
constexpr std::int32_t kMaxDim = 1 << 20;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_flo(const std::string& path, const FlowField& flow) {
  if (flow.width <= 0 || flow.height <= 0) throw invalid_argument("write_flo: empty field");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw io_error("cannot open " + path);
  const std::int32_t w = flow.width, h = flow.height;
  std::vector<float> row(static_cast<std::size_t>(w) * 2);
  bool ok = std::fwrite(&kFloMagic, 4, 1, f.get()) == 1 &&
            std::fwrite(&w, 4, 1, f.get()) == 1 && std::fwrite(&h, 4, 1, f.get()) == 1;
  for (int i = 0; ok && i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      row[2 * j] = static_cast<float>(flow.u[flow.idx(i, j)]);
      row[2 * j + 1] = static_cast<float>(flow.v[flow.idx(i, j)]);
    }
    ok = std::fwrite(row.data(), 4, row.size(), f.get()) == row.size();
  }
  if (!ok) throw io_error("short write: " + path);
}

FlowField read_flo(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw io_error("cannot open " + path);
  float magic = 0.0f;
  std::int32_t w = 0, h = 0;
  if (std::fread(&magic, 4, 1, f.get()) != 1) throw format_error("truncated .flo header: " + path);
  if (magic != kFloMagic) throw format_error("bad .flo magic: " + path);
  if (std::fread(&w, 4, 1, f.get()) != 1 || std::fread(&h, 4, 1, f.get()) != 1)
    throw format_error("truncated .flo header: " + path);
  if (w <= 0 || h <= 0 || w > kMaxDim || h > kMaxDim)
    throw format_error("bad .flo dimensions: " + path);
  FlowField flow(w, h);
  std::vector<float> row(static_cast<std::size_t>(w) * 2);
  for (int i = 0; i < h; ++i) {
    if (std::fread(row.data(), 4, row.size(), f.get()) != row.size())
      throw format_error("truncated .flo payload: " + path);
    for (int j = 0; j < w; ++j) {
      flow.u[flow.idx(i, j)] = row[2 * j];
      flow.v[flow.idx(i, j)] = row[2 * j + 1];
    }
  }
  return flow;
}

}  // namespace ffstab
