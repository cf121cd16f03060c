// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/flow/provider.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ffstab/core/error.hpp"
#include "ffstab/core/warp.hpp"

namespace ffstab::flow {

OracleFlowProvider::OracleFlowProvider(const synth::SynthClip& clip, Stream stream) {
  if (stream == Stream::kStable) {
    to_base_ = clip.stable_to_base;
    movers_ = clip.object_masks_stable;
  } else {
    to_base_ = clip.unstable_to_base;
    movers_ = clip.object_masks;
  }
  if (to_base_.empty()) throw invalid_argument("OracleFlowProvider: clip lacks the requested stream");
}

FlowResult OracleFlowProvider::estimate(const Frame& src, const Frame& tgt, int src_idx,
                                        int tgt_idx) {
  const int n = static_cast<int>(to_base_.size());
  if (src_idx < 0 || tgt_idx < 0 || src_idx >= n || tgt_idx >= n)
    throw invalid_argument("OracleFlowProvider: frame indices required and in range");
  // tgt coords -> base -> src coords.
  const Homography t2s = compose(inverse(to_base_[src_idx]), to_base_[tgt_idx]);
  FlowResult r;
  r.flow = induced_flow(t2s, tgt.width, tgt.height);
  r.confidence = ConfidenceMap(tgt.width, tgt.height, 1.0f);
  const bool have_movers = !movers_.empty();
  for (int i = 0; i < tgt.height; ++i) {
    for (int j = 0; j < tgt.width; ++j) {
      const std::size_t k = r.flow.idx(i, j);
      const double sx = j + r.flow.u[k], sy = i + r.flow.v[k];
      bool bad = sx < 0 || sy < 0 || sx > src.width - 1 || sy > src.height - 1;
      if (!bad && have_movers) {
        bad = movers_[tgt_idx].at(i, j);
        if (!bad) {
          const int rx = static_cast<int>(std::lround(sx));
          const int ry = static_cast<int>(std::lround(sy));
          bad = movers_[src_idx].at(std::clamp(ry, 0, src.height - 1),
                                    std::clamp(rx, 0, src.width - 1));
        }
      }
      if (bad) r.confidence.at(i, j) = 0.0f;
    }
  }
  return r;
}

namespace {

struct NodeField {
  int nx = 0, ny = 0, step = 1;
  std::vector<double> u, v;
  std::vector<std::uint8_t> ok;
  std::size_t idx(int gy, int gx) const { return static_cast<std::size_t>(gy) * nx + gx; }
};

double patch_ssd(const Frame& a, const Frame& b, int ax, int ay, int bx, int by, int rad,
                 int* support) {
  double acc = 0.0;
  int n = 0;
  for (int dy = -rad; dy <= rad; ++dy) {
    const int ay2 = std::clamp(ay + dy, 0, a.height - 1);
    const int by2 = std::clamp(by + dy, 0, b.height - 1);
    for (int dx = -rad; dx <= rad; ++dx) {
      const int ax2 = std::clamp(ax + dx, 0, a.width - 1);
      const int bx2 = std::clamp(bx + dx, 0, b.width - 1);
      if (!a.valid.at(ay2, ax2) || !b.valid.at(by2, bx2)) continue;
      const double d = a.at(ay2, ax2) - b.at(by2, bx2);
      acc += d * d;
      ++n;
    }
  }
  *support = n;
  return n > 0 ? acc / n : std::numeric_limits<double>::max();
}

// Offset of the parabola vertex through (-1,l), (0,c), (+1,r), clamped.
double parabola_offset(double l, double c, double r) {
  const double denom = l - 2.0 * c + r;
  if (denom <= 1e-12) return 0.0;
  return std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
}

void median_filter_nodes(NodeField& f) {
  const int rad = 2;  // 5x5
  std::vector<double> nu(f.u.size()), nv(f.v.size());
  std::vector<double> win;
  for (int gy = 0; gy < f.ny; ++gy) {
    for (int gx = 0; gx < f.nx; ++gx) {
      for (int pass = 0; pass < 2; ++pass) {
        win.clear();
        for (int dy = -rad; dy <= rad; ++dy)
          for (int dx = -rad; dx <= rad; ++dx) {
            const int y = std::clamp(gy + dy, 0, f.ny - 1);
            const int x = std::clamp(gx + dx, 0, f.nx - 1);
            win.push_back(pass == 0 ? f.u[f.idx(y, x)] : f.v[f.idx(y, x)]);
          }
        auto mid = win.begin() + win.size() / 2;
        std::nth_element(win.begin(), mid, win.end());
        (pass == 0 ? nu : nv)[f.idx(gy, gx)] = *mid;
      }
    }
  }
  f.u.swap(nu);
  f.v.swap(nv);
}

Vec2 sample_nodes(const NodeField& f, double px, double py) {
  const double gx = std::clamp(px / f.step, 0.0, double(f.nx - 1));
  const double gy = std::clamp(py / f.step, 0.0, double(f.ny - 1));
  const int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
  const int x1 = std::min(x0 + 1, f.nx - 1), y1 = std::min(y0 + 1, f.ny - 1);
  const double fx = gx - x0, fy = gy - y0;
  Vec2 r;
  r.x = (f.u[f.idx(y0, x0)] * (1 - fx) + f.u[f.idx(y0, x1)] * fx) * (1 - fy) +
        (f.u[f.idx(y1, x0)] * (1 - fx) + f.u[f.idx(y1, x1)] * fx) * fy;
  r.y = (f.v[f.idx(y0, x0)] * (1 - fx) + f.v[f.idx(y0, x1)] * fx) * (1 - fy) +
        (f.v[f.idx(y1, x0)] * (1 - fx) + f.v[f.idx(y1, x1)] * fx) * fy;
  return r;
}

NodeField match_level(const Frame& src, const Frame& tgt, const NodeField* init, int step,
                      int radius, int patch_radius) {
  NodeField f;
  f.step = step;
  f.nx = (tgt.width + step - 1) / step;
  f.ny = (tgt.height + step - 1) / step;
  f.u.assign(static_cast<std::size_t>(f.nx) * f.ny, 0.0);
  f.v.assign(f.u.size(), 0.0);
  f.ok.assign(f.u.size(), 1);
  const int min_support = (2 * patch_radius + 1) * (2 * patch_radius + 1) / 2;
  for (int gy = 0; gy < f.ny; ++gy) {
    for (int gx = 0; gx < f.nx; ++gx) {
      const int x = std::min(gx * step, tgt.width - 1);
      const int y = std::min(gy * step, tgt.height - 1);
      double bu = 0.0, bv = 0.0;
      if (init) {
        const Vec2 p = sample_nodes(*init, x * 0.5, y * 0.5);  // init is half resolution
        bu = 2.0 * p.x;
        bv = 2.0 * p.y;
      }
      const int cx = static_cast<int>(std::lround(x + bu));
      const int cy = static_cast<int>(std::lround(y + bv));
      double best = std::numeric_limits<double>::max();
      int best_dx = 0, best_dy = 0, support = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          int sup = 0;
          const double cost = patch_ssd(tgt, src, x, y, cx + dx, cy + dy, patch_radius, &sup);
          if (cost < best) {
            best = cost;
            best_dx = dx;
            best_dy = dy;
            support = sup;
          }
        }
      }
      const std::size_t k = f.idx(gy, gx);
      if (support < min_support || best == std::numeric_limits<double>::max()) {
        f.u[k] = bu;
        f.v[k] = bv;
        f.ok[k] = 0;
        continue;
      }
      // Subpixel: 1D parabola per axis around the winner when neighbors exist.
      double sub_x = 0.0, sub_y = 0.0;
      if (std::abs(best_dx) < radius) {
        int s1, s2;
        const double l = patch_ssd(tgt, src, x, y, cx + best_dx - 1, cy + best_dy, patch_radius, &s1);
        const double r = patch_ssd(tgt, src, x, y, cx + best_dx + 1, cy + best_dy, patch_radius, &s2);
        if (s1 >= min_support && s2 >= min_support) sub_x = parabola_offset(l, best, r);
      }
      if (std::abs(best_dy) < radius) {
        int s1, s2;
        const double t = patch_ssd(tgt, src, x, y, cx + best_dx, cy + best_dy - 1, patch_radius, &s1);
        const double b = patch_ssd(tgt, src, x, y, cx + best_dx, cy + best_dy + 1, patch_radius, &s2);
        if (s1 >= min_support && s2 >= min_support) sub_y = parabola_offset(t, best, b);
      }
      f.u[k] = (cx + best_dx + sub_x) - x;
      f.v[k] = (cy + best_dy + sub_y) - y;
    }
  }
  median_filter_nodes(f);
  return f;
}

FlowField block_match(const Frame& src_gray, const Frame& tgt_gray,
                      const ClassicalFlowProvider::Options& opt) {
  // Pyramids, full resolution first.
  std::vector<Frame> ps{src_gray}, pt{tgt_gray};
  int levels = opt.levels;
  for (int l = 1; l < levels; ++l) {
    if (std::min(ps.back().width, pt.back().height) < 32) break;
    ps.push_back(downsample2(ps.back()));
    pt.push_back(downsample2(pt.back()));
  }
  levels = static_cast<int>(ps.size());

  NodeField nodes;
  for (int l = levels - 1; l >= 0; --l) {
    const int radius = (l == levels - 1) ? opt.search_coarse : opt.search_fine;
    nodes = match_level(ps[l], pt[l], l == levels - 1 ? nullptr : &nodes, opt.grid_step, radius,
                        opt.patch_radius);
  }

  FlowField flow(tgt_gray.width, tgt_gray.height);
  for (int i = 0; i < flow.height; ++i)
    for (int j = 0; j < flow.width; ++j) {
      const Vec2 p = sample_nodes(nodes, j, i);
      flow.u[flow.idx(i, j)] = p.x;
      flow.v[flow.idx(i, j)] = p.y;
    }
  return flow;
}

}  // namespace

FlowResult ClassicalFlowProvider::estimate(const Frame& src, const Frame& tgt, int, int) {
  if (src.width != tgt.width || src.height != tgt.height)
    throw invalid_argument("ClassicalFlowProvider: frame dimension mismatch");
  const Frame sg = to_gray(src);
  const Frame tg = to_gray(tgt);
  FlowResult r;
  r.flow = block_match(sg, tg, opt_);
  const FlowField backward = block_match(tg, sg, opt_);
  r.confidence = fb_confidence(r.flow, backward, opt_.fb_tol);

  // Texture gate: mean squared gradient over a 5x5 window.
  for (int i = 0; i < tg.height; ++i) {
    for (int j = 0; j < tg.width; ++j) {
      double acc = 0.0;
      int n = 0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          const int y = std::clamp(i + dy, 0, tg.height - 1);
          const int x = std::clamp(j + dx, 0, tg.width - 1);
          const int xp = std::min(x + 1, tg.width - 1);
          const int yp = std::min(y + 1, tg.height - 1);
          const double gx = tg.at(y, xp) - tg.at(y, x);
          const double gy = tg.at(yp, x) - tg.at(y, x);
          acc += gx * gx + gy * gy;
          ++n;
        }
      const bool textured = acc / n >= opt_.texture_floor;
      const bool both_valid = tg.valid.at(i, j);
      if (!textured || !both_valid) r.confidence.at(i, j) = 0.0f;
    }
  }
  return r;
}

FlowResult estimate_flow(const Frame& src, const Frame& tgt, FlowProvider& provider, int src_idx,
                         int tgt_idx) {
  if (src.width < 2 || src.height < 2 || tgt.width < 2 || tgt.height < 2)
    throw invalid_argument("estimate_flow: frames must be at least 2x2");
  return provider.estimate(src, tgt, src_idx, tgt_idx);
}

ConfidenceMap fb_confidence(const FlowField& fwd, const FlowField& bwd, double tol) {
  if (!(tol > 0.0)) throw invalid_argument("fb_confidence: tol must be positive");
  if (fwd.width != bwd.width || fwd.height != bwd.height)
    throw invalid_argument("fb_confidence: field dimension mismatch");
  ConfidenceMap c(fwd.width, fwd.height, 0.0f);
  for (int i = 0; i < fwd.height; ++i) {
    for (int j = 0; j < fwd.width; ++j) {
      const std::size_t k = fwd.idx(i, j);
      const double sx = j + fwd.u[k], sy = i + fwd.v[k];
      if (sx < 0 || sy < 0 || sx > bwd.width - 1 || sy > bwd.height - 1) continue;
      const Vec2 b = sample_flow(bwd, sx, sy);
      const double err = std::hypot(fwd.u[k] + b.x, fwd.v[k] + b.y);
      c.at(i, j) = static_cast<float>(std::clamp(std::exp(-err / tol), 0.0, 1.0));
    }
  }
  return c;
}

}  // namespace ffstab::flow
