// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/outpaint/outpaint.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "ffstab/core/error.hpp"
#include "ffstab/core/warp.hpp"

namespace ffstab::outpaint {

double effective_delta_d(const OutpaintConfig& cfg) {
  return cfg.literal_alg3 ? cfg.delta_d_literal : cfg.delta_d;
}

double scaled_eta_u(const OutpaintConfig& cfg, int width, int height) {
  const double ref = static_cast<double>(cfg.ref_width) * cfg.ref_height;
  return cfg.eta_u * (static_cast<double>(width) * height) / ref;
}

double scaled_eta_s(const OutpaintConfig& cfg, int width, int height) {
  const double ref = static_cast<double>(cfg.ref_width) * cfg.ref_height;
  return cfg.eta_s * (static_cast<double>(width) * height) / ref;
}

namespace {

// ---------------------------------------------------------------------------
// Flow outpainting: affine trend fit + harmonic extension of the residual.
// ---------------------------------------------------------------------------

struct AffineFit {
  // channel(x, y) = c0 + c1 * xn + c2 * yn with xn, yn centered/scaled coords.
  double c[3];
};

// Least-squares plane fit per channel over the valid region; falls back to
// the mean when the support is degenerate (e.g. all pixels collinear).
AffineFit fit_plane(const std::vector<double>& vals, const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  AffineFit fit{{0.0, 0.0, 0.0}};
  const std::size_t n = vals.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0, sv = 0, svx = 0, svy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
    sv += vals[i];
    svx += vals[i] * xs[i];
    svy += vals[i] * ys[i];
  }
  const double nn = static_cast<double>(n);
  // Normal equations for [c0, c1, c2].
  double m[3][4] = {{nn, sx, sy, sv}, {sx, sxx, sxy, svx}, {sy, sxy, syy, svy}};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-12 * std::max(1.0, nn)) {
      fit.c[0] = sv / nn;  // degenerate support: constant fallback
      fit.c[1] = fit.c[2] = 0.0;
      return fit;
    }
    std::swap_ranges(m[col], m[col] + 4, m[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  for (int i = 0; i < 3; ++i) fit.c[i] = m[i][3] / m[i][i];
  return fit;
}

// One Gauss-Seidel SOR sweep over the unknown (invalid) pixels of a channel.
// Valid pixels act as Dirichlet data; missing neighbors at the frame border
// are dropped from the stencil (zero normal derivative). Returns the maximum
// absolute update applied.
double sor_sweep(std::vector<double>& u, const std::vector<std::uint8_t>& fixed, int w, int h,
                 double omega) {
  double max_update = 0.0;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const std::size_t p = static_cast<std::size_t>(i) * w + j;
      if (fixed[p]) continue;
      double sum = 0.0;
      int deg = 0;
      if (j > 0) {
        sum += u[p - 1];
        ++deg;
      }
      if (j + 1 < w) {
        sum += u[p + 1];
        ++deg;
      }
      if (i > 0) {
        sum += u[p - w];
        ++deg;
      }
      if (i + 1 < h) {
        sum += u[p + w];
        ++deg;
      }
      if (deg == 0) continue;
      const double target = sum / deg;
      const double upd = omega * (target - u[p]);
      u[p] += upd;
      max_update = std::max(max_update, std::abs(upd));
    }
  }
  return max_update;
}

struct HarmonicLevel {
  int w = 0, h = 0;
  std::vector<std::uint8_t> fixed;
  std::vector<double> u, v;
};

// Solves the two-channel harmonic extension with a coarse-to-fine hierarchy
// of half-resolution problems, each relaxed by SOR until the largest update
// falls below the tolerance.
void harmonic_extend(std::vector<double>& u, std::vector<double>& v,
                     const std::vector<std::uint8_t>& fixed, int w, int h, double tol) {
  std::vector<HarmonicLevel> levels;
  levels.push_back({w, h, fixed, u, v});
  while (levels.back().w > 32 && levels.back().h > 32) {
    const HarmonicLevel& fine = levels.back();
    HarmonicLevel c;
    c.w = (fine.w + 1) / 2;
    c.h = (fine.h + 1) / 2;
    c.fixed.assign(static_cast<std::size_t>(c.w) * c.h, 0);
    c.u.assign(c.fixed.size(), 0.0);
    c.v.assign(c.fixed.size(), 0.0);
    for (int i = 0; i < c.h; ++i) {
      for (int j = 0; j < c.w; ++j) {
        double su = 0.0, sv = 0.0;
        int nfix = 0;
        for (int di = 0; di < 2; ++di) {
          for (int dj = 0; dj < 2; ++dj) {
            const int fi = std::min(2 * i + di, fine.h - 1);
            const int fj = std::min(2 * j + dj, fine.w - 1);
            const std::size_t fp = static_cast<std::size_t>(fi) * fine.w + fj;
            if (fine.fixed[fp]) {
              su += fine.u[fp];
              sv += fine.v[fp];
              ++nfix;
            }
          }
        }
        const std::size_t cp = static_cast<std::size_t>(i) * c.w + j;
        if (nfix > 0) {
          c.fixed[cp] = 1;
          c.u[cp] = su / nfix;
          c.v[cp] = sv / nfix;
        }
      }
    }
    levels.push_back(std::move(c));
  }

  const double omega = 1.9;
  const int max_sweeps = 20000;
  for (int li = static_cast<int>(levels.size()) - 1; li >= 0; --li) {
    HarmonicLevel& lvl = levels[li];
    if (li + 1 < static_cast<int>(levels.size())) {
      // Prolong the coarser solution into this level's unknowns.
      const HarmonicLevel& coarse = levels[li + 1];
      for (int i = 0; i < lvl.h; ++i) {
        for (int j = 0; j < lvl.w; ++j) {
          const std::size_t p = static_cast<std::size_t>(i) * lvl.w + j;
          if (lvl.fixed[p]) continue;
          const double cx = std::min(j / 2.0, coarse.w - 1.0);
          const double cy = std::min(i / 2.0, coarse.h - 1.0);
          const int x0 = std::min(static_cast<int>(cx), coarse.w - 2 >= 0 ? coarse.w - 2 : 0);
          const int y0 = std::min(static_cast<int>(cy), coarse.h - 2 >= 0 ? coarse.h - 2 : 0);
          const int x1 = std::min(x0 + 1, coarse.w - 1);
          const int y1 = std::min(y0 + 1, coarse.h - 1);
          const double fx = cx - x0, fy = cy - y0;
          const auto bl = [&](const std::vector<double>& a) {
            const double a00 = a[static_cast<std::size_t>(y0) * coarse.w + x0];
            const double a10 = a[static_cast<std::size_t>(y0) * coarse.w + x1];
            const double a01 = a[static_cast<std::size_t>(y1) * coarse.w + x0];
            const double a11 = a[static_cast<std::size_t>(y1) * coarse.w + x1];
            return a00 * (1 - fx) * (1 - fy) + a10 * fx * (1 - fy) + a01 * (1 - fx) * fy +
                   a11 * fx * fy;
          };
          lvl.u[p] = bl(coarse.u);
          lvl.v[p] = bl(coarse.v);
        }
      }
    }
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      const double du = sor_sweep(lvl.u, lvl.fixed, lvl.w, lvl.h, omega);
      const double dv = sor_sweep(lvl.v, lvl.fixed, lvl.w, lvl.h, omega);
      if (std::max(du, dv) < tol) break;
    }
  }
  u = std::move(levels[0].u);
  v = std::move(levels[0].v);
}

// ---------------------------------------------------------------------------
// Patch distance.
// ---------------------------------------------------------------------------

struct GrayStats {
  std::vector<double> mean, var;
};

// Local mean/variance over clamped 7x7 windows via summed-area tables.
GrayStats window_stats(const std::vector<float>& g, int w, int h, int radius) {
  std::vector<double> s(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  std::vector<double> s2(s.size(), 0.0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double val = g[static_cast<std::size_t>(i) * w + j];
      const std::size_t p = static_cast<std::size_t>(i + 1) * (w + 1) + (j + 1);
      s[p] = val + s[p - 1] + s[p - (w + 1)] - s[p - (w + 1) - 1];
      s2[p] = val * val + s2[p - 1] + s2[p - (w + 1)] - s2[p - (w + 1) - 1];
    }
  }
  GrayStats st;
  st.mean.resize(static_cast<std::size_t>(w) * h);
  st.var.resize(st.mean.size());
  const auto box = [&](const std::vector<double>& t, int x0, int y0, int x1, int y1) {
    return t[static_cast<std::size_t>(y1 + 1) * (w + 1) + (x1 + 1)] -
           t[static_cast<std::size_t>(y0) * (w + 1) + (x1 + 1)] -
           t[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
           t[static_cast<std::size_t>(y0) * (w + 1) + x0];
  };
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const int x0 = std::max(0, j - radius), x1 = std::min(w - 1, j + radius);
      const int y0 = std::max(0, i - radius), y1 = std::min(h - 1, i + radius);
      const double n = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
      const double m = box(s, x0, y0, x1, y1) / n;
      const double q = box(s2, x0, y0, x1, y1) / n;
      const std::size_t p = static_cast<std::size_t>(i) * w + j;
      st.mean[p] = m;
      st.var[p] = std::max(0.0, q - m * m);
    }
  }
  return st;
}

// Single-scale D = 1 - NCC over clamped windows of the given radius.
std::vector<float> ncc_distance(const std::vector<float>& ga, const std::vector<float>& gb, int w,
                                int h, int radius) {
  const GrayStats sa = window_stats(ga, w, h, radius);
  const GrayStats sb = window_stats(gb, w, h, radius);
  // Cross sum via a summed-area table of a*b.
  std::vector<double> sab(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const std::size_t p0 = static_cast<std::size_t>(i) * w + j;
      const std::size_t p = static_cast<std::size_t>(i + 1) * (w + 1) + (j + 1);
      sab[p] = static_cast<double>(ga[p0]) * gb[p0] + sab[p - 1] + sab[p - (w + 1)] -
               sab[p - (w + 1) - 1];
    }
  }
  std::vector<float> d(static_cast<std::size_t>(w) * h);
  constexpr double kVarEps = 1e-10;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const int x0 = std::max(0, j - radius), x1 = std::min(w - 1, j + radius);
      const int y0 = std::max(0, i - radius), y1 = std::min(h - 1, i + radius);
      const double n = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
      const double ab = (sab[static_cast<std::size_t>(y1 + 1) * (w + 1) + (x1 + 1)] -
                         sab[static_cast<std::size_t>(y0) * (w + 1) + (x1 + 1)] -
                         sab[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
                         sab[static_cast<std::size_t>(y0) * (w + 1) + x0]) /
                        n;
      const std::size_t p = static_cast<std::size_t>(i) * w + j;
      const double va = sa.var[p], vb = sb.var[p];
      double dist;
      if (va < kVarEps || vb < kVarEps) {
        dist = (va < kVarEps && vb < kVarEps) ? 0.0 : 1.0;
      } else {
        const double ncc = (ab - sa.mean[p] * sb.mean[p]) / std::sqrt(va * vb);
        dist = std::clamp(1.0 - ncc, 0.0, 2.0);
      }
      d[p] = static_cast<float>(dist);
    }
  }
  return d;
}

std::vector<float> gray_of(const Frame& f) {
  const Frame g = to_gray(f);
  std::vector<float> out(static_cast<std::size_t>(g.width) * g.height);
  for (int i = 0; i < g.height; ++i)
    for (int j = 0; j < g.width; ++j) out[static_cast<std::size_t>(i) * g.width + j] = g.at(i, j, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Label refinement.
// ---------------------------------------------------------------------------

void max_dilate(const std::vector<std::int8_t>& src, std::vector<std::int8_t>& dst, int w, int h,
                int k) {
  const int r = k / 2;
  // Separable max filter: rows then columns.
  std::vector<std::int8_t> tmp(src.size());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      std::int8_t m = std::numeric_limits<std::int8_t>::min();
      const int x0 = std::max(0, j - r), x1 = std::min(w - 1, j + r);
      for (int x = x0; x <= x1; ++x) m = std::max(m, src[static_cast<std::size_t>(i) * w + x]);
      tmp[static_cast<std::size_t>(i) * w + j] = m;
    }
  }
  for (int j = 0; j < w; ++j) {
    for (int i = 0; i < h; ++i) {
      std::int8_t m = std::numeric_limits<std::int8_t>::min();
      const int y0 = std::max(0, i - r), y1 = std::min(h - 1, i + r);
      for (int y = y0; y <= y1; ++y) m = std::max(m, tmp[static_cast<std::size_t>(y) * w + j]);
      dst[static_cast<std::size_t>(i) * w + j] = m;
    }
  }
}

}  // namespace

FlowField outpaint_flow(const FlowField& flow, const BinaryMask& valid) {
  if (flow.width != valid.width || flow.height != valid.height) {
    throw invalid_argument("outpaint_flow: flow and mask dimensions differ");
  }
  const std::size_t support = valid.count();
  if (support == 0) throw invalid_argument("outpaint_flow: validity mask is empty");

  const int w = flow.width, h = flow.height;
  // Centered, scaled coordinates keep the plane fit well conditioned.
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double sc = 2.0 / std::max(w - 1, h - 1);

  std::vector<double> xs, ys, us, vs;
  xs.reserve(support);
  ys.reserve(support);
  us.reserve(support);
  vs.reserve(support);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (!valid.at(i, j)) continue;
      xs.push_back((j - cx) * sc);
      ys.push_back((i - cy) * sc);
      const std::size_t p = flow.idx(i, j);
      us.push_back(flow.u[p]);
      vs.push_back(flow.v[p]);
    }
  }
  const AffineFit fu = fit_plane(us, xs, ys);
  const AffineFit fv = fit_plane(vs, xs, ys);
  const auto trend_u = [&](int j, int i) {
    return fu.c[0] + fu.c[1] * (j - cx) * sc + fu.c[2] * (i - cy) * sc;
  };
  const auto trend_v = [&](int j, int i) {
    return fv.c[0] + fv.c[1] * (j - cx) * sc + fv.c[2] * (i - cy) * sc;
  };

  // Harmonic extension of the trend-free residual.
  std::vector<double> ru(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<double> rv(ru.size(), 0.0);
  std::vector<std::uint8_t> fixed(ru.size(), 0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (!valid.at(i, j)) continue;
      const std::size_t p = flow.idx(i, j);
      ru[p] = flow.u[p] - trend_u(j, i);
      rv[p] = flow.v[p] - trend_v(j, i);
      fixed[p] = 1;
    }
  }
  if (support < static_cast<std::size_t>(w) * h) {
    harmonic_extend(ru, rv, fixed, w, h, 1e-8);
  }

  FlowField out(w, h);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const std::size_t p = out.idx(i, j);
      if (valid.at(i, j)) {
        out.u[p] = flow.u[p];  // valid pixels pass through untouched
        out.v[p] = flow.v[p];
      } else {
        out.u[p] = trend_u(j, i) + ru[p];
        out.v[p] = trend_v(j, i) + rv[p];
      }
    }
  }
  return out;
}

DistanceMap patch_distance(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height) {
    throw invalid_argument("patch_distance: frame dimensions differ");
  }
  const int w = a.width, h = a.height;
  constexpr int kRadius = 3;  // 7x7 windows

  const std::vector<float> ga = gray_of(a);
  const std::vector<float> gb = gray_of(b);
  std::vector<float> d0 = ncc_distance(ga, gb, w, h, kRadius);

  DistanceMap dm;
  dm.width = w;
  dm.height = h;
  dm.data.resize(d0.size());

  const bool two_scales = w >= 14 && h >= 14;
  if (two_scales) {
    const Frame ha = downsample2(a);
    const Frame hb = downsample2(b);
    const std::vector<float> gha = gray_of(ha);
    const std::vector<float> ghb = gray_of(hb);
    const std::vector<float> d1 = ncc_distance(gha, ghb, ha.width, ha.height, kRadius);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        // Sample the half-resolution map at the corresponding position.
        double x = std::min(j / 2.0, ha.width - 1.0);
        double y = std::min(i / 2.0, ha.height - 1.0);
        const int x0 = std::min(static_cast<int>(x), std::max(0, ha.width - 2));
        const int y0 = std::min(static_cast<int>(y), std::max(0, ha.height - 2));
        const int x1 = std::min(x0 + 1, ha.width - 1);
        const int y1 = std::min(y0 + 1, ha.height - 1);
        const double fx = x - x0, fy = y - y0;
        const double v00 = d1[static_cast<std::size_t>(y0) * ha.width + x0];
        const double v10 = d1[static_cast<std::size_t>(y0) * ha.width + x1];
        const double v01 = d1[static_cast<std::size_t>(y1) * ha.width + x0];
        const double v11 = d1[static_cast<std::size_t>(y1) * ha.width + x1];
        const double up =
            v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy + v11 * fx * fy;
        const std::size_t p = static_cast<std::size_t>(i) * w + j;
        dm.data[p] = static_cast<float>(0.5 * (d0[p] + up));
      }
    }
  } else {
    dm.data = std::move(d0);
  }

  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (!a.valid.at(i, j) || !b.valid.at(i, j)) {
        dm.data[static_cast<std::size_t>(i) * w + j] = 2.0f;
      }
    }
  }
  return dm;
}

double calibrate_patch_threshold(const std::vector<Frame>& targets,
                                 const std::vector<Frame>& candidates, double shift_px) {
  if (targets.empty() || targets.size() != candidates.size()) {
    throw invalid_argument("calibrate_patch_threshold: need matching target/candidate lists");
  }
  if (!(shift_px > 0.0)) throw invalid_argument("calibrate_patch_threshold: shift must be > 0");

  std::vector<float> aligned_samples, misaligned_samples;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const Frame& t = targets[k];
    const Frame& c = candidates[k];
    if (t.width != c.width || t.height != c.height) {
      throw invalid_argument("calibrate_patch_threshold: pair dimensions differ");
    }
    FlowField shift(c.width, c.height);
    std::fill(shift.u.begin(), shift.u.end(), static_cast<float>(shift_px));
    const Frame cs = warp_frame(c, shift);
    const DistanceMap da = patch_distance(t, c);
    const DistanceMap dmis = patch_distance(t, cs);

    // Pool only textured pixels valid in every variant: flat areas carry no
    // alignment signal either way, and the same pixel set feeds both classes.
    const std::vector<float> g = gray_of(t);
    for (int i = 2; i < t.height - 2; ++i) {
      for (int j = 2; j < t.width - 2; ++j) {
        if (!t.valid.at(i, j) || !c.valid.at(i, j) || !cs.valid.at(i, j)) continue;
        double grad = 0.0;
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            const std::size_t p = static_cast<std::size_t>(i + di) * t.width + (j + dj);
            const double gx = g[p + 1] - g[p - 1];
            const double gy = g[p + t.width] - g[p - t.width];
            grad += gx * gx + gy * gy;
          }
        }
        if (grad / 9.0 < 1e-3) continue;
        aligned_samples.push_back(da.at(i, j));
        misaligned_samples.push_back(dmis.at(i, j));
      }
    }
  }
  if (aligned_samples.empty() || misaligned_samples.empty()) {
    throw invalid_argument("calibrate_patch_threshold: no textured samples found");
  }
  std::sort(aligned_samples.begin(), aligned_samples.end());
  std::sort(misaligned_samples.begin(), misaligned_samples.end());

  // Equal-error point of the classifier "aligned iff D <= t".
  double best_t = 0.0;
  double best_gap = std::numeric_limits<double>::max();
  const double na = static_cast<double>(aligned_samples.size());
  const double nm = static_cast<double>(misaligned_samples.size());
  for (int step = 0; step <= 2000; ++step) {
    const float t = static_cast<float>(step * 0.001);
    const auto fn_it = std::upper_bound(aligned_samples.begin(), aligned_samples.end(), t);
    const double fn = (na - static_cast<double>(fn_it - aligned_samples.begin())) / na;
    const auto fp_it = std::upper_bound(misaligned_samples.begin(), misaligned_samples.end(), t);
    const double fp = static_cast<double>(fp_it - misaligned_samples.begin()) / nm;
    const double gap = std::abs(fn - fp);
    if (gap < best_gap) {
      best_gap = gap;
      best_t = t;
    }
  }
  return best_t;
}

OutpaintMaskResult outpaint_mask(const Frame& target, const Frame& crop_target,
                                 const Frame& candidate_warp, const BinaryMask& target_valid,
                                 const BinaryMask& crop_valid, const OutpaintConfig& cfg) {
  const int w = target.width, h = target.height;
  if (crop_target.width != w || crop_target.height != h || candidate_warp.width != w ||
      candidate_warp.height != h || target_valid.width != w || target_valid.height != h ||
      crop_valid.width != w || crop_valid.height != h) {
    throw invalid_argument("outpaint_mask: inputs must share one canvas size");
  }
  if (cfg.k_tin < 1 || cfg.k_tin % 2 == 0) {
    throw invalid_argument("outpaint_mask: k_tin must be odd and >= 1");
  }
  if (cfg.eta_t < 0) throw invalid_argument("outpaint_mask: eta_t must be >= 0");

  const DistanceMap d = patch_distance(crop_target, candidate_warp);
  const double delta = effective_delta_d(cfg);

  OutpaintMaskResult res;
  res.labels.assign(static_cast<std::size_t>(w) * h, 0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const std::size_t p = static_cast<std::size_t>(i) * w + j;
      std::int8_t lab;
      if (!target_valid.at(i, j)) {
        lab = 1;
      } else if (!crop_valid.at(i, j)) {
        lab = 2;
      } else if (d.data[p] < delta) {
        lab = 0;
      } else {
        lab = -1;
      }
      res.labels[p] = lab;
    }
  }

  const std::vector<std::int8_t> seed = res.labels;
  std::vector<std::int8_t> cur = res.labels;
  std::vector<std::int8_t> next(cur.size());
  int changed = 0;
  do {
    max_dilate(cur, next, w, h, cfg.k_tin);
    for (std::size_t p = 0; p < next.size(); ++p) {
      if (seed[p] == 1) next[p] = 1;
      else if (seed[p] == -1) next[p] = -1;
    }
    changed = 0;
    for (std::size_t p = 0; p < next.size(); ++p) changed += next[p] != cur[p];
    cur.swap(next);
    ++res.iterations;
  } while (changed > cfg.eta_t);
  res.last_changed = changed;
  res.labels = cur;

  res.mask = BinaryMask(w, h);
  for (std::size_t p = 0; p < cur.size(); ++p) res.mask.data[p] = cur[p] == 2 ? 1 : 0;
  return res;
}

Frame fuse_margin(const Frame& target, const Frame& candidate_warp, const BinaryMask& keep) {
  if (target.width != candidate_warp.width || target.height != candidate_warp.height ||
      target.channels != candidate_warp.channels || keep.width != target.width ||
      keep.height != target.height) {
    throw invalid_argument("fuse_margin: shape mismatch");
  }
  Frame out(target.width, target.height, target.channels);
  for (int i = 0; i < target.height; ++i) {
    for (int j = 0; j < target.width; ++j) {
      const Frame& src = keep.at(i, j) ? target : candidate_warp;
      for (int c = 0; c < target.channels; ++c) out.at(i, j, c) = src.at(i, j, c);
      out.valid.set(i, j, target.valid.at(i, j) || candidate_warp.valid.at(i, j));
    }
  }
  return out;
}

MultiFuseResult multi_frame_fuse(const Frame& target,
                                 const std::vector<FusionCandidate>& candidates,
                                 const OutpaintConfig& cfg) {
  const int w = target.width, h = target.height;
  for (const FusionCandidate& c : candidates) {
    if (c.result.width != w || c.result.height != h || c.result.channels != target.channels ||
        c.fill_mask.width != w || c.fill_mask.height != h) {
      throw invalid_argument("multi_frame_fuse: candidate shape mismatch");
    }
    if (c.area_stable < 0.0 || c.area_unstable < 0.0) {
      throw invalid_argument("multi_frame_fuse: candidate areas must be >= 0");
    }
  }

  MultiFuseResult res;
  res.fused = target;
  res.decisions.assign(candidates.size(), FuseDecision{});

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].area_stable < candidates[b].area_stable;
  });

  const BinaryMask original_valid = target.valid;
  const double eta_u = scaled_eta_u(cfg, w, h);
  const double eta_s = scaled_eta_s(cfg, w, h);

  for (std::size_t idx : order) {
    const FusionCandidate& c = candidates[idx];
    FuseDecision& dec = res.decisions[idx];
    dec.area_stable = c.area_stable;
    dec.area_unstable = c.area_unstable;
    dec.ratio = c.area_unstable / (c.area_stable + 1.0);
    const bool ratio_ok = cfg.literal_alg3 ? dec.ratio > cfg.eta_r : dec.ratio < cfg.eta_r;
    if (!(c.area_unstable < eta_u && ratio_ok && c.area_stable > eta_s)) continue;

    // Overlap of this candidate's fill region with the running canvas.
    double a_o = 0.0;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        if (c.fill_mask.at(i, j) && res.fused.valid.at(i, j)) a_o += 1.0;
      }
    }
    dec.overlap = c.area_stable > 0.0 ? a_o / c.area_stable : 0.0;
    if (!(dec.overlap < cfg.delta_r)) continue;

    dec.accepted = true;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        if (!c.fill_mask.at(i, j)) continue;
        if (original_valid.at(i, j)) continue;  // never overwrite real target content
        if (!c.result.valid.at(i, j)) continue;
        for (int ch = 0; ch < target.channels; ++ch) {
          res.fused.at(i, j, ch) = c.result.at(i, j, ch);
        }
        res.fused.valid.set(i, j, true);
      }
    }
  }
  return res;
}

Frame fill_holes(const Frame& frame) {
  const int w = frame.width, h = frame.height;
  if (frame.valid.count() == 0) throw invalid_argument("fill_holes: frame has no valid pixels");

  constexpr double kInf = 1e20;
  // Column pass: squared distance to the nearest valid pixel in each column,
  // remembering that pixel's row.
  std::vector<double> dist(static_cast<std::size_t>(w) * h, kInf);
  std::vector<int> row(dist.size(), -1);
  for (int j = 0; j < w; ++j) {
    for (int i = 0; i < h; ++i) {
      const std::size_t p = static_cast<std::size_t>(i) * w + j;
      if (frame.valid.at(i, j)) {
        dist[p] = 0.0;
        row[p] = i;
      } else if (i > 0 && row[p - w] >= 0) {
        const double d = static_cast<double>(i - row[p - w]) * (i - row[p - w]);
        dist[p] = d;
        row[p] = row[p - w];
      }
    }
    for (int i = h - 2; i >= 0; --i) {
      const std::size_t p = static_cast<std::size_t>(i) * w + j;
      const std::size_t q = p + w;
      if (row[q] >= 0) {
        const double d = static_cast<double>(row[q] - i) * (row[q] - i);
        if (d < dist[p]) {
          dist[p] = d;
          row[p] = row[q];
        }
      }
    }
  }

  // Row pass: lower envelope of the parabolas (j - q)^2 + dist(i, q),
  // tracking the source column of each envelope segment. Columns without any
  // valid pixel carry a large sentinel height and never win a query.
  Frame out = frame;
  std::vector<int> vcol(w);
  std::vector<double> z(w + 1);
  for (int i = 0; i < h; ++i) {
    const auto f = [&](int q) { return dist[static_cast<std::size_t>(i) * w + q]; };
    int k = 0;
    vcol[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < w; ++q) {
      double s = ((f(q) + static_cast<double>(q) * q) -
                  (f(vcol[k]) + static_cast<double>(vcol[k]) * vcol[k])) /
                 (2.0 * (q - vcol[k]));
      while (s <= z[k]) {
        --k;
        s = ((f(q) + static_cast<double>(q) * q) -
             (f(vcol[k]) + static_cast<double>(vcol[k]) * vcol[k])) /
            (2.0 * (q - vcol[k]));
      }
      ++k;
      vcol[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
    }
    int kk = 0;
    for (int j = 0; j < w; ++j) {
      if (frame.valid.at(i, j)) continue;
      while (z[kk + 1] < j) ++kk;
      const int q = vcol[kk];
      if (f(q) >= kInf) continue;  // row's columns all empty (cannot happen with >=1 valid px)
      const int src_row = row[static_cast<std::size_t>(i) * w + q];
      for (int c = 0; c < frame.channels; ++c) out.at(i, j, c) = frame.at(src_row, q, c);
      out.valid.set(i, j, true);
    }
  }
  return out;
}

}  // namespace ffstab::outpaint
