// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffstab/core/types.hpp"

namespace ffstab::synth {

struct SynthConfig {
  int n_frames = 60;

  // Stable camera-path endpoint ranges; parameters interpolate linearly from
  // identity at frame 0 to the drawn endpoint at frame n_frames-1.
  double theta_max_deg = 10.0;
  double s_min = 0.7;
  double s_max = 1.3;
  double t_max_x = 100.0;
  double t_max_y = 70.0;
  // Perspective factors of the stable path, applied on normalized [-1,1]
  // coordinates (unitless).
  double p_max_x = 0.1;
  double p_max_y = 0.15;

  // Per-frame jitter ranges for the unstable stream.
  double jitter_theta_max_deg = 1.0;
  double jitter_s = 0.02;
  double jitter_t_max_x = 8.0;
  double jitter_t_max_y = 6.0;
  // Jitter perspective magnitude range, pixel coordinates, random sign.
  double unstable_p_min = 1e-5;
  double unstable_p_max = 5e-5;
  // Random-walk jitter (each frame's jitter accumulates on the previous one)
  // instead of independent per-frame draws.
  bool jitter_walk = false;

  int crop_width = 720;
  int crop_height = 480;
  int n_objects_max = 5;
  std::uint64_t rng_seed = 1;
};

struct SynthClip {
  SynthConfig cfg;
  Frame base;
  std::vector<Frame> stable;
  std::vector<Frame> unstable;
  // Exact frame-coordinate -> base-coordinate maps used to render each stream.
  std::vector<Homography> stable_to_base;
  std::vector<Homography> unstable_to_base;
  // Per-frame unstable -> stable map.
  std::vector<Homography> gt_homographies;
  // Per adjacent unstable pair (k -> k+1), similarity decomposition.
  std::vector<AffinePose> gt_poses;
  // Mover footprints per frame, one mask per stream.
  std::vector<BinaryMask> object_masks;
  std::vector<BinaryMask> object_masks_stable;
  // Small-FOV bookkeeping (set by gen_small_fov_pair).
  int fov_width = 0;
  int fov_height = 0;
  std::vector<Vec2> fov_origin;
};

// Procedural multi-octave textured image, deterministic in (seed, dims).
Frame make_base_image(int width, int height, std::uint64_t seed, int channels = 3);

// Smallest base dimensions guaranteed to satisfy the margin requirement for
// any parameter draw within cfg ranges (jitter included).
void required_base_dims(const SynthConfig& cfg, int& width, int& height);

// Renders the stable stream by interpolating a drawn endpoint transform over
// n_frames bins. Throws invalid_argument (reporting the required margin) when
// the base cannot cover some frame's sampling footprint.
SynthClip gen_stable_video(const Frame& base, const SynthConfig& cfg);

// Adds the unstable stream: per-frame jitter homographies on top of the
// stable path, rendered from the base. Frame 0 keeps identity jitter. Fills
// gt_homographies and gt_poses. Must run before insert_movers.
void jitter_video(SynthClip& clip);

// Composites up to cfg.n_objects_max procedurally textured polygonal sprites
// with independent linear trajectories into both streams; fills object masks.
// Per-frame union of footprints stays below 40% of the frame area.
void insert_movers(SynthClip& clip);

// Masks both streams to a sliding window of the given size (frames keep full
// canvas dimensions; pixels outside the window are zeroed and invalid). The
// input clip is the full-frame ground truth; the returned clip records the
// window path. Throws invalid_argument when the window exceeds the frame.
SynthClip gen_small_fov_pair(const SynthClip& clip, int window_width, int window_height,
                             std::uint64_t seed);

// Clip directory layout: stable/%05d.png, unstable/%05d.png, gt.txt
// (flat text: config echo, homography rows, pose tuples, window path),
// object_masks[_stable]/%05d.pgm when movers are present.
void store_clip(const std::string& dir, const SynthClip& clip, bool write_base = true);
SynthClip load_clip(const std::string& dir);

}  // namespace ffstab::synth
