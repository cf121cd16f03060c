// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/coarse/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ffstab/core/error.hpp"
#include "ffstab/core/warp.hpp"

namespace ffstab::coarse {

std::vector<AffinePose> accumulate_trajectory(const std::vector<AffinePose>& pair_poses) {
  std::vector<AffinePose> traj(pair_poses.size() + 1);
  traj[0] = AffinePose{};  // identity
  for (std::size_t k = 0; k < pair_poses.size(); ++k) {
    validate(pair_poses[k]);
    traj[k + 1] = compose(pair_poses[k], traj[k]);
  }
  return traj;
}

std::vector<AffinePose> smooth_trajectory(const std::vector<AffinePose>& trajectory,
                                          const SmoothConfig& cfg) {
  if (trajectory.empty()) return {};
  if (cfg.window < 1) throw invalid_argument("smooth_trajectory: window must be >= 1");
  const double sigma = cfg.sigma > 0.0 ? cfg.sigma : cfg.window / 4.0;
  if (!(sigma > 0.0)) throw invalid_argument("smooth_trajectory: sigma must be > 0");

  const int n = static_cast<int>(trajectory.size());
  const int half = cfg.window / 2;

  // Channel extraction: rotation is unwrapped so smoothing never averages
  // across the +/-pi seam; scale is smoothed in log space to stay positive.
  std::vector<double> theta(n), logs(n), dx(n), dy(n);
  theta[0] = trajectory[0].theta;
  for (int i = 1; i < n; ++i) {
    const double d = std::remainder(trajectory[i].theta - trajectory[i - 1].theta, 2.0 * M_PI);
    theta[i] = theta[i - 1] + d;
  }
  for (int i = 0; i < n; ++i) {
    if (!(trajectory[i].s > 0.0)) {
      throw invalid_argument("smooth_trajectory: trajectory scale must be > 0");
    }
    logs[i] = std::log(trajectory[i].s);
    dx[i] = trajectory[i].dx;
    dy[i] = trajectory[i].dy;
  }

  std::vector<double> kernel(2 * half + 1);
  double ksum = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double w = std::exp(-0.5 * (k / sigma) * (k / sigma));
    kernel[k + half] = w;
    ksum += w;
  }
  for (double& w : kernel) w /= ksum;

  const auto smooth_channel = [&](const std::vector<double>& src) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) {
        const int j = std::clamp(i + k, 0, n - 1);  // edge replication
        acc += kernel[k + half] * src[j];
      }
      out[i] = acc;
    }
    return out;
  };

  const std::vector<double> st = smooth_channel(theta);
  const std::vector<double> ss = smooth_channel(logs);
  const std::vector<double> sx = smooth_channel(dx);
  const std::vector<double> sy = smooth_channel(dy);

  std::vector<AffinePose> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].theta = std::remainder(st[i], 2.0 * M_PI);
    out[i].s = std::exp(ss[i]);
    out[i].dx = sx[i];
    out[i].dy = sy[i];
  }
  return out;
}

std::vector<AlignMatrix> align_matrices(const std::vector<AffinePose>& raw,
                                        const std::vector<AffinePose>& smoothed, int width,
                                        int height) {
  if (raw.size() != smoothed.size()) {
    throw invalid_argument("align_matrices: raw and smoothed trajectory lengths differ");
  }
  if (width < 2 || height < 2) throw invalid_argument("align_matrices: frame dims must be >= 2");
  const Vec2 c = frame_center(width, height);
  std::vector<AlignMatrix> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const AffinePose h = compose(smoothed[k], inverse_pose(raw[k]));
    out[k] = align_from_pose(h, c);
  }
  return out;
}

AlignMatrix align_inverse(const AlignMatrix& m) {
  const double a = m.a[0][0], b = m.a[0][1], tx = m.a[0][2];
  const double c = m.a[1][0], d = m.a[1][1], ty = m.a[1][2];
  const double det = a * d - b * c;
  if (std::abs(det) < 1e-15) throw numeric_error("align_inverse: transform is singular");
  AlignMatrix inv;
  inv.a[0][0] = d / det;
  inv.a[0][1] = -b / det;
  inv.a[1][0] = -c / det;
  inv.a[1][1] = a / det;
  inv.a[0][2] = -(inv.a[0][0] * tx + inv.a[0][1] * ty);
  inv.a[1][2] = -(inv.a[1][0] * tx + inv.a[1][1] * ty);
  return inv;
}

Frame apply_alignment(const Frame& frame, const AlignMatrix& align) {
  const AlignMatrix inv = align_inverse(align);
  FlowField flow(frame.width, frame.height);
  for (int i = 0; i < frame.height; ++i) {
    for (int j = 0; j < frame.width; ++j) {
      const Vec2 p = apply(inv, Vec2{static_cast<double>(j), static_cast<double>(i)});
      const std::size_t k = flow.idx(i, j);
      flow.u[k] = p.x - j;
      flow.v[k] = p.y - i;
    }
  }
  return warp_frame(frame, flow);
}

void write_trajectory(const std::string& path, const std::vector<AffinePose>& raw,
                      const std::vector<AffinePose>& smoothed) {
  if (!smoothed.empty() && smoothed.size() != raw.size()) {
    throw invalid_argument("write_trajectory: smoothed length differs from raw");
  }
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw io_error("write_trajectory: cannot open " + path);
  std::fprintf(f, "# idx theta s dx dy\n");
  std::fprintf(f, "[raw]\n");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::fprintf(f, "%zu %.17g %.17g %.17g %.17g\n", i, raw[i].theta, raw[i].s, raw[i].dx,
                 raw[i].dy);
  }
  if (!smoothed.empty()) {
    std::fprintf(f, "[smoothed]\n");
    for (std::size_t i = 0; i < smoothed.size(); ++i) {
      std::fprintf(f, "%zu %.17g %.17g %.17g %.17g\n", i, smoothed[i].theta, smoothed[i].s,
                   smoothed[i].dx, smoothed[i].dy);
    }
  }
  if (std::fclose(f) != 0) throw io_error("write_trajectory: failed writing " + path);
}

std::vector<AffinePose> read_trajectory(const std::string& path, bool smoothed) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw io_error("read_trajectory: cannot open " + path);
  std::vector<AffinePose> raw_poses, smooth_poses;
  std::vector<AffinePose>* cur = nullptr;
  char line[512];
  while (std::fgets(line, sizeof line, f)) {
    std::string s(line);
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    if (s.empty() || s[0] == '#') continue;
    if (s == "[raw]") {
      cur = &raw_poses;
      continue;
    }
    if (s == "[smoothed]") {
      cur = &smooth_poses;
      continue;
    }
    if (!cur) {
      std::fclose(f);
      throw format_error("read_trajectory: data before section header in " + path);
    }
    std::size_t idx = 0;
    AffinePose p;
    if (std::sscanf(s.c_str(), "%zu %lg %lg %lg %lg", &idx, &p.theta, &p.s, &p.dx, &p.dy) != 5) {
      std::fclose(f);
      throw format_error("read_trajectory: malformed line in " + path);
    }
    cur->push_back(p);
  }
  std::fclose(f);
  if (smoothed) {
    if (smooth_poses.empty()) {
      throw format_error("read_trajectory: no [smoothed] section in " + path);
    }
    return smooth_poses;
  }
  return raw_poses;
}

}  // namespace ffstab::coarse
