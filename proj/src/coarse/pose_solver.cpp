// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/coarse/pose_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ffstab/core/error.hpp"
#include "ffstab/core/warp.hpp"

namespace ffstab::coarse {

namespace {

// Solves a symmetric 4x4 linear system in place via Gaussian elimination with
// partial pivoting. Throws numeric_error when a pivot collapses.
std::array<double, 4> solve4(std::array<std::array<double, 5>, 4> m) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-12) {
      throw numeric_error("pose fit is rank-deficient");
    }
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::array<double, 4> x{};
  for (int i = 0; i < 4; ++i) x[i] = m[i][4] / m[i][i];
  return x;
}

struct Sample {
  double xi_x, xi_y;  // pixel position relative to frame center
  double u, v;        // observed flow
};

// Weighted least-squares similarity fit of the model
//   obs = (a*xi_x - b*xi_y + dx, b*xi_x + a*xi_y + dy),  obs = xi + flow,
// i.e. a = s*cos(theta), b = s*sin(theta) about the frame center.
AffinePose fit_similarity(const std::vector<Sample>& samples, const std::vector<double>& w) {
  std::array<std::array<double, 5>, 4> m{};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const double wi = w[i];
    if (wi <= 0.0) continue;
    const double ox = s.xi_x + s.u;
    const double oy = s.xi_y + s.v;
    // Row for obs_x: a*xi_x - b*xi_y + dx
    // Row for obs_y: a*xi_y + b*xi_x + dy
    // Accumulate normal equations J^T W J and J^T W obs.
    const double xx = s.xi_x, yy = s.xi_y;
    // Unknown order: [a, b, dx, dy].
    const double jx[4] = {xx, -yy, 1.0, 0.0};
    const double jy[4] = {yy, xx, 0.0, 1.0};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) m[r][c] += wi * (jx[r] * jx[c] + jy[r] * jy[c]);
      m[r][4] += wi * (jx[r] * ox + jy[r] * oy);
    }
  }
  const auto sol = solve4(m);
  const double a = sol[0], b = sol[1];
  const double scale = std::hypot(a, b);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw numeric_error("pose fit produced a non-positive scale");
  }
  AffinePose pose;
  pose.theta = std::atan2(b, a);
  pose.s = scale;
  pose.dx = sol[2];
  pose.dy = sol[3];
  return pose;
}

}  // namespace

AffinePose solve_pose(const FlowField& flow, const BinaryMask& mask, const PoseSolveConfig& cfg) {
  if (flow.width != mask.width || flow.height != mask.height) {
    throw invalid_argument("solve_pose: flow and mask dimensions differ");
  }
  if (cfg.max_iters < 1) throw invalid_argument("solve_pose: max_iters must be >= 1");
  if (!(cfg.huber_delta > 0.0)) throw invalid_argument("solve_pose: huber_delta must be > 0");

  const std::size_t support = mask.count();
  if (support < 16) {
    throw numeric_error("pose fit is rank-deficient: mask has fewer than 16 pixels");
  }

  const Vec2 c = frame_center(flow.width, flow.height);
  std::vector<Sample> samples;
  samples.reserve(support);
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < flow.height; ++i) {
    for (int j = 0; j < flow.width; ++j) {
      if (!mask.at(i, j)) continue;
      Sample s;
      s.xi_x = j - c.x;
      s.xi_y = i - c.y;
      const std::size_t k = flow.idx(i, j);
      s.u = flow.u[k];
      s.v = flow.v[k];
      samples.push_back(s);
      mx += s.xi_x;
      my += s.xi_y;
    }
  }
  mx /= static_cast<double>(samples.size());
  my /= static_cast<double>(samples.size());

  // Collinear support makes the downstream use of the fit ill-conditioned:
  // reject when the support's second moment matrix is (near-)singular.
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const Sample& s : samples) {
    const double px = s.xi_x - mx;
    const double py = s.xi_y - my;
    sxx += px * px;
    sxy += px * py;
    syy += py * py;
  }
  const double tr = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  // Smallest eigenvalue of the 2x2 moment matrix.
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double lam_min = tr / 2.0 - disc;
  if (lam_min <= 1e-9 * std::max(1.0, tr)) {
    throw numeric_error("pose fit is rank-deficient: mask support is collinear");
  }

  std::vector<double> w(samples.size(), 1.0);
  std::vector<Sample> corr(samples.size());
  AffinePose pose;  // identity start
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // The correction is itself a similarity about the center, fitted to the
    // correspondences (current prediction -> observed target): obs = delta(pred).
    const double cs = pose.s * std::cos(pose.theta);
    const double sn = pose.s * std::sin(pose.theta);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Sample& s = samples[i];
      const double px = cs * s.xi_x - sn * s.xi_y + pose.dx;  // pose-mapped, center-relative
      const double py = sn * s.xi_x + cs * s.xi_y + pose.dy;
      corr[i].xi_x = px;
      corr[i].xi_y = py;
      corr[i].u = (s.xi_x + s.u) - px;  // observed target minus predicted target
      corr[i].v = (s.xi_y + s.v) - py;
    }
    if (iter > 0) {
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const double r = std::hypot(corr[i].u, corr[i].v);
        w[i] = r <= cfg.huber_delta ? 1.0 : cfg.huber_delta / r;
      }
    }
    const AffinePose delta = fit_similarity(corr, w);
    AffinePose next;
    next.theta = std::remainder(pose.theta + delta.theta, 2.0 * M_PI);
    next.s = pose.s * delta.s;
    next.dx = pose.dx + delta.dx;
    next.dy = pose.dy + delta.dy;
    if (!(next.s > 0.0) || !std::isfinite(next.s)) {
      throw numeric_error("pose refinement produced a non-positive scale");
    }
    pose = next;
    const double step = std::abs(delta.theta) + std::abs(delta.s - 1.0) + std::abs(delta.dx) +
                        std::abs(delta.dy);
    if (step < cfg.tol) break;
  }
  validate(pose);
  return pose;
}

PoseMetrics pose_metrics(const AffinePose& pred, const AffinePose& gt, const CoordGrid& grid,
                         const LossWeights& weights) {
  if (!grid.normalized) {
    throw invalid_argument("pose_metrics: grid must be normalized");
  }
  if (!(gt.s > 0.0)) throw invalid_argument("pose_metrics: ground-truth scale must be > 0");

  PoseMetrics m;
  m.l_gt = weights.theta * std::abs(pred.theta - gt.theta) +
           weights.scale * std::abs(1.0 - pred.s / gt.s) +
           weights.translation * (std::abs(pred.dx - gt.dx) + std::abs(pred.dy - gt.dy));

  // Both poses act on the normalized grid: rotation/scale about the origin
  // (the normalized center), translations converted to normalized units.
  const double tx_scale = grid.width > 1 ? 2.0 / (grid.width - 1) : 2.0;
  const double ty_scale = grid.height > 1 ? 2.0 / (grid.height - 1) : 2.0;
  const auto map = [&](const AffinePose& p, double x, double y) {
    const double cs = p.s * std::cos(p.theta);
    const double sn = p.s * std::sin(p.theta);
    return Vec2{cs * x - sn * y + p.dx * tx_scale, sn * x + cs * y + p.dy * ty_scale};
  };
  double acc = 0.0;
  const std::size_t n = grid.x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = map(pred, grid.x[i], grid.y[i]);
    const Vec2 b = map(gt, grid.x[i], grid.y[i]);
    acc += std::abs(a.x - b.x + weights.epsilon) + std::abs(a.y - b.y + weights.epsilon);
  }
  m.l_grid = acc / (2.0 * static_cast<double>(n));
  m.l_stab = m.l_gt + weights.grid * m.l_grid;
  return m;
}

}  // namespace ffstab::coarse
