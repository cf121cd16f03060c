// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/core/types.hpp"

#include <cmath>
#include <numeric>

#include "ffstab/core/error.hpp"

namespace ffstab {

std::size_t BinaryMask::count() const {
  return std::accumulate(data.begin(), data.end(), std::size_t{0},
                         [](std::size_t acc, std::uint8_t v) { return acc + (v != 0); });
}

void validate(const AffinePose& p) {
  if (!(p.s > 0.0)) throw invalid_argument("AffinePose: scale must be positive");
  if (!(std::fabs(p.theta) < M_PI)) throw invalid_argument("AffinePose: |theta| must be < pi");
  if (!std::isfinite(p.dx) || !std::isfinite(p.dy))
    throw invalid_argument("AffinePose: non-finite translation");
}

void validate(const Homography& h) {
  if (h.h[2][2] != 1.0) throw invalid_argument("Homography: h[2][2] must equal 1");
  if (std::fabs(det3(h)) <= 1e-12) throw invalid_argument("Homography: determinant too small");
}

Vec2 apply(const Homography& h, const Vec2& p) {
  const double w = h.h[2][0] * p.x + h.h[2][1] * p.y + h.h[2][2];
  return {(h.h[0][0] * p.x + h.h[0][1] * p.y + h.h[0][2]) / w,
          (h.h[1][0] * p.x + h.h[1][1] * p.y + h.h[1][2]) / w};
}

Vec2 apply(const AlignMatrix& m, const Vec2& p) {
  return {m.a[0][0] * p.x + m.a[0][1] * p.y + m.a[0][2],
          m.a[1][0] * p.x + m.a[1][1] * p.y + m.a[1][2]};
}

Homography compose(const Homography& outer, const Homography& inner) {
  Homography r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += outer.h[i][k] * inner.h[k][j];
      r.h[i][j] = acc;
    }
  return normalized(r);
}

double det3(const Homography& m) {
  const auto& h = m.h;
  return h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
         h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
         h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
}

Homography inverse(const Homography& m) {
  const double d = det3(m);
  if (std::fabs(d) < 1e-300) throw numeric_error("Homography inverse: singular matrix");
  const auto& h = m.h;
  Homography r;
  r.h[0][0] = (h[1][1] * h[2][2] - h[1][2] * h[2][1]) / d;
  r.h[0][1] = (h[0][2] * h[2][1] - h[0][1] * h[2][2]) / d;
  r.h[0][2] = (h[0][1] * h[1][2] - h[0][2] * h[1][1]) / d;
  r.h[1][0] = (h[1][2] * h[2][0] - h[1][0] * h[2][2]) / d;
  r.h[1][1] = (h[0][0] * h[2][2] - h[0][2] * h[2][0]) / d;
  r.h[1][2] = (h[0][2] * h[1][0] - h[0][0] * h[1][2]) / d;
  r.h[2][0] = (h[1][0] * h[2][1] - h[1][1] * h[2][0]) / d;
  r.h[2][1] = (h[0][1] * h[2][0] - h[0][0] * h[2][1]) / d;
  r.h[2][2] = (h[0][0] * h[1][1] - h[0][1] * h[1][0]) / d;
  return normalized(r);
}

Homography normalized(const Homography& m) {
  const double w = m.h[2][2];
  if (std::fabs(w) < 1e-300) throw numeric_error("Homography normalize: h[2][2] ~ 0");
  Homography r = m;
  for (auto& row : r.h)
    for (auto& v : row) v /= w;
  r.h[2][2] = 1.0;
  return r;
}

Homography homography_from_align(const AlignMatrix& m) {
  Homography h;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) h.h[i][j] = m.a[i][j];
  h.h[2][0] = h.h[2][1] = 0.0;
  h.h[2][2] = 1.0;
  return h;
}

AlignMatrix align_from_homography_affine(const Homography& h) {
  AlignMatrix m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) m.a[i][j] = h.h[i][j];
  return m;
}

Vec2 apply(const AffinePose& p, const Vec2& x, const Vec2& c) {
  const double cs = p.s * std::cos(p.theta);
  const double sn = p.s * std::sin(p.theta);
  const double rx = x.x - c.x, ry = x.y - c.y;
  return {cs * rx - sn * ry + c.x + p.dx, sn * rx + cs * ry + c.y + p.dy};
}

AffinePose compose(const AffinePose& outer, const AffinePose& inner) {
  AffinePose r;
  r.s = outer.s * inner.s;
  double th = outer.theta + inner.theta;
  // Wrap into (-pi, pi].
  th = std::remainder(th, 2.0 * M_PI);
  r.theta = th;
  const double cs = outer.s * std::cos(outer.theta);
  const double sn = outer.s * std::sin(outer.theta);
  r.dx = cs * inner.dx - sn * inner.dy + outer.dx;
  r.dy = sn * inner.dx + cs * inner.dy + outer.dy;
  return r;
}

AffinePose inverse_pose(const AffinePose& p) {
  AffinePose r;
  r.s = 1.0 / p.s;
  r.theta = std::remainder(-p.theta, 2.0 * M_PI);
  const double cs = r.s * std::cos(r.theta);
  const double sn = r.s * std::sin(r.theta);
  r.dx = -(cs * p.dx - sn * p.dy);
  r.dy = -(sn * p.dx + cs * p.dy);
  return r;
}

AlignMatrix align_from_pose(const AffinePose& p, const Vec2& c) {
  const double cs = p.s * std::cos(p.theta);
  const double sn = p.s * std::sin(p.theta);
  AlignMatrix m;
  m.a[0][0] = cs;
  m.a[0][1] = -sn;
  m.a[0][2] = c.x + p.dx - cs * c.x + sn * c.y;
  m.a[1][0] = sn;
  m.a[1][1] = cs;
  m.a[1][2] = c.y + p.dy - sn * c.x - cs * c.y;
  return m;
}

Homography homography_from_pose(const AffinePose& p, const Vec2& c) {
  return homography_from_align(align_from_pose(p, c));
}

AffinePose similarity_from_homography(const Homography& hm, const Vec2& c) {
  // Jacobian of the projective map at the center.
  const auto& h = hm.h;
  const double w = h[2][0] * c.x + h[2][1] * c.y + h[2][2];
  const double fx = h[0][0] * c.x + h[0][1] * c.y + h[0][2];
  const double fy = h[1][0] * c.x + h[1][1] * c.y + h[1][2];
  const double j00 = (h[0][0] * w - fx * h[2][0]) / (w * w);
  const double j01 = (h[0][1] * w - fx * h[2][1]) / (w * w);
  const double j10 = (h[1][0] * w - fy * h[2][0]) / (w * w);
  const double j11 = (h[1][1] * w - fy * h[2][1]) / (w * w);
  AffinePose p;
  p.theta = std::atan2(j10 - j01, j00 + j11);
  p.s = 0.5 * std::hypot(j00 + j11, j10 - j01);
  const Vec2 cm = apply(hm, c);
  p.dx = cm.x - c.x;
  p.dy = cm.y - c.y;
  if (!(p.s > 0.0)) throw numeric_error("similarity_from_homography: vanishing scale");
  return p;
}

}  // namespace ffstab
