// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "ffstab/coarse/pose_solver.hpp"
#include "ffstab/coarse/trajectory.hpp"
#include "ffstab/core/error.hpp"
#include "ffstab/flow/provider.hpp"
#include "ffstab/maskprop/maskprop.hpp"

namespace ffstab::eval {

double cropping_ratio(const std::vector<Frame>& input, const std::vector<Frame>& output) {
  if (input.empty() || input.size() != output.size()) {
    throw invalid_argument("cropping_ratio: sequences must be non-empty and matched");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < output.size(); ++k) {
    if (output[k].width != input[k].width || output[k].height != input[k].height) {
      throw invalid_argument("cropping_ratio: frame size mismatch");
    }
    const double area = static_cast<double>(input[k].width) * input[k].height;
    acc += static_cast<double>(output[k].valid.count()) / area;
  }
  return acc / static_cast<double>(output.size());
}

AlignMatrix fit_affine_map(const std::vector<Vec2>& src, const std::vector<Vec2>& dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw numeric_error("fit_affine_map: need at least 3 matched points");
  }
  // Normal equations for x' = a x + b y + c (and likewise y'), shared Gram
  // matrix [xx xy x; xy yy y; x y n].
  double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0;
  double bx[3] = {0, 0, 0}, by[3] = {0, 0, 0};
  const double n = static_cast<double>(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double x = src[i].x, y = src[i].y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    sx += x;
    sy += y;
    bx[0] += dst[i].x * x;
    bx[1] += dst[i].x * y;
    bx[2] += dst[i].x;
    by[0] += dst[i].y * x;
    by[1] += dst[i].y * y;
    by[2] += dst[i].y;
  }
  double m[3][3] = {{sxx, sxy, sx}, {sxy, syy, sy}, {sx, sy, n}};
  // Invert the 3x3 Gram matrix via the adjugate.
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  const double scale = sxx + syy + n;
  if (std::abs(det) < 1e-12 * std::max(1.0, scale * scale * scale)) {
    throw numeric_error("fit_affine_map: degenerate point configuration");
  }
  double inv[3][3];
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;

  AlignMatrix out;
  for (int r = 0; r < 2; ++r) {
    const double* rhs = r == 0 ? bx : by;
    for (int c = 0; c < 3; ++c) {
      out.a[r][c] = inv[c][0] * rhs[0] + inv[c][1] * rhs[1] + inv[c][2] * rhs[2];
    }
  }
  return out;
}

double frame_distortion(const AlignMatrix& input_to_output) {
  const double a = input_to_output.a[0][0], b = input_to_output.a[0][1];
  const double c = input_to_output.a[1][0], d = input_to_output.a[1][1];
  // Singular values from the eigenvalues of M^T M.
  const double p = a * a + c * c;
  const double q = a * b + c * d;
  const double r = b * b + d * d;
  const double tr = p + r;
  const double det = p * r - q * q;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double lo = std::max(0.0, tr / 2.0 - disc);
  const double hi = tr / 2.0 + disc;
  if (hi <= 0.0) return 0.0;
  return std::clamp(std::sqrt(lo / hi), 0.0, 1.0);
}

double distortion_value(const std::vector<AlignMatrix>& input_to_output) {
  if (input_to_output.empty()) {
    throw invalid_argument("distortion_value: no transforms given");
  }
  double worst = 1.0;
  for (const AlignMatrix& m : input_to_output) worst = std::min(worst, frame_distortion(m));
  return worst;
}

AlignMatrix transform_from_warp(const AlignMatrix& align, const FlowField& warp) {
  const double det = align.a[0][0] * align.a[1][1] - align.a[0][1] * align.a[1][0];
  if (std::abs(det) < 1e-15) throw numeric_error("transform_from_warp: singular alignment");
  AlignMatrix inv;
  inv.a[0][0] = align.a[1][1] / det;
  inv.a[0][1] = -align.a[0][1] / det;
  inv.a[1][0] = -align.a[1][0] / det;
  inv.a[1][1] = align.a[0][0] / det;
  inv.a[0][2] = -(inv.a[0][0] * align.a[0][2] + inv.a[0][1] * align.a[1][2]);
  inv.a[1][2] = -(inv.a[1][0] * align.a[0][2] + inv.a[1][1] * align.a[1][2]);

  std::vector<Vec2> src, dst;
  const int step = std::max(1, std::min(warp.width, warp.height) / 16);
  for (int i = 0; i < warp.height; i += step) {
    for (int j = 0; j < warp.width; j += step) {
      const std::size_t p = warp.idx(i, j);
      const Vec2 out_pt{static_cast<double>(j), static_cast<double>(i)};
      const Vec2 q = apply(inv, Vec2{j + warp.u[p], i + warp.v[p]});
      src.push_back(q);       // input-frame position
      dst.push_back(out_pt);  // output-frame position
    }
  }
  return fit_affine_map(src, dst);
}

namespace {

// Energy ratio of one path channel: bins 2-6 over bins 1..N/2.
double channel_score(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  const int half = n / 2;
  double num = 0.0, den = 0.0;
  for (int k = 1; k <= half; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int t = 0; t < n; ++t) {
      const double ang = -2.0 * M_PI * k * t / n;
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    const double e = std::norm(acc);
    den += e;
    if (k >= 2 && k <= 6) num += e;
  }
  if (den < 1e-18) return 1.0;  // constant path: no oscillation to penalize
  return num / den;
}

}  // namespace

double stability_score(const std::vector<AffinePose>& trajectory) {
  if (trajectory.size() < 32) {
    throw invalid_argument("stability_score: need at least 32 trajectory samples");
  }
  const int n = static_cast<int>(trajectory.size());
  std::vector<double> theta(n), dx(n), dy(n);
  theta[0] = trajectory[0].theta;
  for (int i = 1; i < n; ++i) {
    theta[i] =
        theta[i - 1] + std::remainder(trajectory[i].theta - trajectory[i - 1].theta, 2.0 * M_PI);
  }
  for (int i = 0; i < n; ++i) {
    dx[i] = trajectory[i].dx;
    dy[i] = trajectory[i].dy;
  }
  return (channel_score(theta) + channel_score(dx) + channel_score(dy)) / 3.0;
}

double stability_score(const std::vector<Frame>& frames) {
  if (frames.size() < 32) {
    throw invalid_argument("stability_score: need at least 32 frames");
  }
  flow::ClassicalFlowProvider provider;
  std::vector<AffinePose> pair_poses;
  pair_poses.reserve(frames.size() - 1);
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    const flow::FlowResult r = provider.estimate(frames[k + 1], frames[k],
                                                 static_cast<int>(k + 1), static_cast<int>(k));
    BinaryMask mask = maskprop::binarize(r.confidence, 0.5);
    if (mask.count() < 64) {
      // Confidence too sparse: fall back to the frame's own validity.
      mask = frames[k].valid;
    }
    AffinePose pose;
    try {
      pose = coarse::solve_pose(r.flow, mask);
    } catch (const numeric_error&) {
      pose = AffinePose{};  // keep the path defined; identity contributes no motion
    }
    pair_poses.push_back(pose);
  }
  return stability_score(coarse::accumulate_trajectory(pair_poses));
}

namespace {

void check_pair(const Frame& a, const Frame& b, const BinaryMask* region) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw invalid_argument("metric: frame shape mismatch");
  }
  if (region && (region->width != a.width || region->height != a.height)) {
    throw invalid_argument("metric: region mask size mismatch");
  }
}

// Separable Gaussian blur with replicated borders, used by SSIM.
void gaussian_blur(const std::vector<double>& src, std::vector<double>& dst, int w, int h,
                   const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size()) / 2;
  std::vector<double> tmp(src.size());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        const int jj = std::clamp(j + k, 0, w - 1);
        acc += kernel[k + r] * src[static_cast<std::size_t>(i) * w + jj];
      }
      tmp[static_cast<std::size_t>(i) * w + j] = acc;
    }
  }
  dst.resize(src.size());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        const int ii = std::clamp(i + k, 0, h - 1);
        acc += kernel[k + r] * tmp[static_cast<std::size_t>(ii) * w + j];
      }
      dst[static_cast<std::size_t>(i) * w + j] = acc;
    }
  }
}

}  // namespace

double psnr(const Frame& a, const Frame& b, const BinaryMask* region) {
  check_pair(a, b, region);
  double se = 0.0;
  std::size_t n = 0;
  for (int i = 0; i < a.height; ++i) {
    for (int j = 0; j < a.width; ++j) {
      if (region && !region->at(i, j)) continue;
      for (int c = 0; c < a.channels; ++c) {
        const double d = static_cast<double>(a.at(i, j, c)) - b.at(i, j, c);
        se += d * d;
      }
      n += a.channels;
    }
  }
  if (n == 0) throw invalid_argument("psnr: empty comparison region");
  const double mse = se / static_cast<double>(n);
  if (mse <= 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Frame& a, const Frame& b, const BinaryMask* region) {
  check_pair(a, b, region);
  const int w = a.width, h = a.height;

  constexpr int kWindow = 11;
  constexpr double kSigma = 1.5;
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  std::vector<double> kernel(kWindow);
  double ksum = 0.0;
  for (int k = 0; k < kWindow; ++k) {
    const double d = k - kWindow / 2;
    kernel[k] = std::exp(-0.5 * (d / kSigma) * (d / kSigma));
    ksum += kernel[k];
  }
  for (double& k : kernel) k /= ksum;

  double total = 0.0;
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  std::vector<double> xa(plane), xb(plane), mua, mub, saa, sbb, sab;
  std::vector<double> prod(plane);
  for (int c = 0; c < a.channels; ++c) {
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const std::size_t p = static_cast<std::size_t>(i) * w + j;
        xa[p] = a.at(i, j, c);
        xb[p] = b.at(i, j, c);
      }
    }
    gaussian_blur(xa, mua, w, h, kernel);
    gaussian_blur(xb, mub, w, h, kernel);
    for (std::size_t p = 0; p < plane; ++p) prod[p] = xa[p] * xa[p];
    gaussian_blur(prod, saa, w, h, kernel);
    for (std::size_t p = 0; p < plane; ++p) prod[p] = xb[p] * xb[p];
    gaussian_blur(prod, sbb, w, h, kernel);
    for (std::size_t p = 0; p < plane; ++p) prod[p] = xa[p] * xb[p];
    gaussian_blur(prod, sab, w, h, kernel);

    double acc = 0.0;
    std::size_t n = 0;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        if (region && !region->at(i, j)) continue;
        const std::size_t p = static_cast<std::size_t>(i) * w + j;
        const double va = saa[p] - mua[p] * mua[p];
        const double vb = sbb[p] - mub[p] * mub[p];
        const double cov = sab[p] - mua[p] * mub[p];
        const double s = ((2.0 * mua[p] * mub[p] + kC1) * (2.0 * cov + kC2)) /
                         ((mua[p] * mua[p] + mub[p] * mub[p] + kC1) * (va + vb + kC2));
        acc += s;
        ++n;
      }
    }
    if (n == 0) throw invalid_argument("ssim: empty comparison region");
    total += acc / static_cast<double>(n);
  }
  return total / a.channels;
}

}  // namespace ffstab::eval
