// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/core/warp.hpp"

#include <algorithm>
#include <cmath>

#include "ffstab/core/error.hpp"

namespace ffstab {

FlowField affine_flow(const AffinePose& pose, int width, int height) {
  validate(pose);
  if (width < 1 || height < 1) throw invalid_argument("affine_flow: empty grid");
  const Vec2 c = frame_center(width, height);
  const double cs = pose.s * std::cos(pose.theta);
  const double sn = pose.s * std::sin(pose.theta);
  FlowField f(width, height);
  for (int i = 0; i < height; ++i) {
    const double ry = i - c.y;
    for (int j = 0; j < width; ++j) {
      const double rx = j - c.x;
      const std::size_t k = f.idx(i, j);
      f.u[k] = cs * rx - sn * ry + c.x + pose.dx - j;
      f.v[k] = sn * rx + cs * ry + c.y + pose.dy - i;
    }
  }
  return f;
}

FlowField residual_flow(const FlowField& y, const AffinePose& pose) {
  validate(pose);
  const FlowField base = affine_flow(pose, y.width, y.height);
  FlowField r(y.width, y.height);
  for (std::size_t k = 0; k < r.u.size(); ++k) {
    r.u[k] = y.u[k] - base.u[k];
    r.v[k] = y.v[k] - base.v[k];
  }
  return r;
}

FlowField induced_flow(const Homography& t2s, int width, int height) {
  validate(t2s);
  FlowField f(width, height);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const Vec2 p = apply(t2s, {double(j), double(i)});
      const std::size_t k = f.idx(i, j);
      f.u[k] = p.x - j;
      f.v[k] = p.y - i;
    }
  }
  return f;
}

Frame warp_frame(const Frame& src, const FlowField& flow) {
  if (src.width <= 0 || src.height <= 0 || flow.width <= 0 || flow.height <= 0)
    throw invalid_argument("warp_frame: empty frame or flow");
  Frame out(flow.width, flow.height, src.channels, 0.0f);
  for (int i = 0; i < flow.height; ++i) {
    for (int j = 0; j < flow.width; ++j) {
      const std::size_t k = flow.idx(i, j);
      const double sx = j + flow.u[k];
      const double sy = i + flow.v[k];
      if (!(sx >= 0.0 && sx <= src.width - 1 && sy >= 0.0 && sy <= src.height - 1)) {
        out.valid.set(i, j, false);
        continue;
      }
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, src.width - 1);
      const int y1 = std::min(y0 + 1, src.height - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;
      const bool all_valid = src.valid.at(y0, x0) && src.valid.at(y0, x1) &&
                             src.valid.at(y1, x0) && src.valid.at(y1, x1);
      out.valid.set(i, j, all_valid);
      for (int ch = 0; ch < src.channels; ++ch) {
        const double top = src.at(y0, x0, ch) * (1.0 - fx) + src.at(y0, x1, ch) * fx;
        const double bot = src.at(y1, x0, ch) * (1.0 - fx) + src.at(y1, x1, ch) * fx;
        out.at(i, j, ch) = static_cast<float>(top * (1.0 - fy) + bot * fy);
      }
    }
  }
  return out;
}

Frame warp_frame(const Frame& src, const Homography& src_to_out) {
  return warp_frame(src, induced_flow(inverse(src_to_out), src.width, src.height));
}

BinaryMask warp_mask(const BinaryMask& mask, const FlowField& flow) {
  if (mask.width <= 0 || mask.height <= 0 || flow.width <= 0 || flow.height <= 0)
    throw invalid_argument("warp_mask: empty mask or flow");
  BinaryMask out(flow.width, flow.height, false);
  for (int i = 0; i < flow.height; ++i) {
    for (int j = 0; j < flow.width; ++j) {
      const std::size_t k = flow.idx(i, j);
      const long sx = std::lround(j + flow.u[k]);
      const long sy = std::lround(i + flow.v[k]);
      if (sx < 0 || sx >= mask.width || sy < 0 || sy >= mask.height) continue;
      out.set(i, j, mask.at(static_cast<int>(sy), static_cast<int>(sx)));
    }
  }
  return out;
}

Vec2 sample_flow(const FlowField& f, double x, double y) {
  const double cx = std::clamp(x, 0.0, double(f.width - 1));
  const double cy = std::clamp(y, 0.0, double(f.height - 1));
  const int x0 = static_cast<int>(std::floor(cx));
  const int y0 = static_cast<int>(std::floor(cy));
  const int x1 = std::min(x0 + 1, f.width - 1);
  const int y1 = std::min(y0 + 1, f.height - 1);
  const double fx = cx - x0;
  const double fy = cy - y0;
  const std::size_t k00 = f.idx(y0, x0), k01 = f.idx(y0, x1);
  const std::size_t k10 = f.idx(y1, x0), k11 = f.idx(y1, x1);
  Vec2 r;
  r.x = (f.u[k00] * (1 - fx) + f.u[k01] * fx) * (1 - fy) + (f.u[k10] * (1 - fx) + f.u[k11] * fx) * fy;
  r.y = (f.v[k00] * (1 - fx) + f.v[k01] * fx) * (1 - fy) + (f.v[k10] * (1 - fx) + f.v[k11] * fx) * fy;
  return r;
}

Frame to_gray(const Frame& f) {
  if (f.channels == 1) return f;
  Frame g(f.width, f.height, 1);
  g.valid = f.valid;
  for (int i = 0; i < f.height; ++i)
    for (int j = 0; j < f.width; ++j)
      g.at(i, j) = 0.299f * f.at(i, j, 0) + 0.587f * f.at(i, j, 1) + 0.114f * f.at(i, j, 2);
  return g;
}

Frame downsample2(const Frame& f) {
  const int w = std::max(1, f.width / 2);
  const int h = std::max(1, f.height / 2);
  Frame out(w, h, f.channels, 0.0f);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      bool any_valid = false;
      for (int ch = 0; ch < f.channels; ++ch) {
        double acc = 0.0;
        int n = 0;
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj) {
            const int y = 2 * i + di, x = 2 * j + dj;
            if (y >= f.height || x >= f.width) continue;
            acc += f.at(y, x, ch);
            ++n;
            any_valid = any_valid || f.valid.at(y, x);
          }
        out.at(i, j, ch) = static_cast<float>(acc / std::max(1, n));
      }
      out.valid.set(i, j, any_valid);
    }
  }
  return out;
}

}  // namespace ffstab
