// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ffstab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Boolean raster, row-major, 0 = false, 1 = true.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

  bool at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col] != 0; }
  void set(int row, int col, bool v) { data[static_cast<std::size_t>(row) * width + col] = v ? 1 : 0; }
  std::size_t count() const;
  bool empty_mask() const { return count() == 0; }
};

// Image frame: row-major interleaved float samples in [0,1], 1 or 3 channels,
// with a validity mask (false marks pixels carrying no content).
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;
  BinaryMask valid;

  Frame() = default;
  Frame(int w, int h, int c = 1, float fill = 0.0f)
      : width(w),
        height(h),
        channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill),
        valid(w, h, true) {}

  float at(int row, int col, int ch = 0) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  float& at(int row, int col, int ch = 0) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
};

// Dense displacement field, backward-warp convention: the warp of a source
// image samples it at (x + u, y + v) for every target pixel (x, y).
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> u;
  std::vector<double> v;

  FlowField() = default;
  FlowField(int w, int h)
      : width(w),
        height(h),
        u(static_cast<std::size_t>(w) * h, 0.0),
        v(static_cast<std::size_t>(w) * h, 0.0) {}

  std::size_t idx(int row, int col) const { return static_cast<std::size_t>(row) * width + col; }
};

// Per-pixel flow confidence in [0,1].
struct ConfidenceMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  ConfidenceMap() = default;
  ConfidenceMap(int w, int h, float fill = 1.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  float at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
  float& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
};

// Pixel ("x(i,j) = j, y(i,j) = i") or normalized ([-1,1] per axis) coordinate
// raster. Built through make_coord_grid.
struct CoordGrid {
  int width = 0;
  int height = 0;
  bool normalized = false;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t idx(int row, int col) const { return static_cast<std::size_t>(row) * width + col; }
};

// Similarity transform about a frame center: p(x) = s * R(theta) * (x - c) + c + d.
// Invariants: s > 0, |theta| < pi.
struct AffinePose {
  double theta = 0.0;
  double s = 1.0;
  double dx = 0.0;
  double dy = 0.0;
};

// Row-major 3x3 projective transform, normalized so that h[2][2] == 1.
struct Homography {
  std::array<std::array<double, 3>, 3> h{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
};

// Row-major 2x3 affine map.
struct AlignMatrix {
  std::array<std::array<double, 3>, 2> a{{{1, 0, 0}, {0, 1, 0}}};
};

// ---- validation -------------------------------------------------------------

// Throw invalid_argument when an invariant is broken.
void validate(const AffinePose& p);
void validate(const Homography& h);

// ---- homography algebra -----------------------------------------------------

Vec2 apply(const Homography& h, const Vec2& p);
Vec2 apply(const AlignMatrix& m, const Vec2& p);
Homography compose(const Homography& outer, const Homography& inner);
Homography inverse(const Homography& h);
double det3(const Homography& h);
// Rescale so h[2][2] == 1; throws numeric_error if h[2][2] is ~0.
Homography normalized(const Homography& h);

Homography homography_from_align(const AlignMatrix& m);
AlignMatrix align_from_homography_affine(const Homography& h);  // drops the projective row

// ---- pose algebra -----------------------------------------------------------

Vec2 apply(const AffinePose& p, const Vec2& x, const Vec2& center);
// outer(inner(x)) about a shared center.
AffinePose compose(const AffinePose& outer, const AffinePose& inner);
AffinePose inverse_pose(const AffinePose& p);
AlignMatrix align_from_pose(const AffinePose& p, const Vec2& center);
Homography homography_from_pose(const AffinePose& p, const Vec2& center);
// Closest similarity: rotation/scale from the Jacobian at `center`, translation
// from the image of `center`. Exact when h is a similarity about `center`.
AffinePose similarity_from_homography(const Homography& h, const Vec2& center);

inline Vec2 frame_center(int width, int height) {
  return {(width - 1) * 0.5, (height - 1) * 0.5};
}

}  // namespace ffstab
