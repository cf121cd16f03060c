// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ffstab/core/types.hpp"

namespace ffstab::coarse {

// Accumulates per-pair poses (frame k -> frame k+1 coordinates) into a camera
// trajectory of length pairs+1 with trajectory[0] = identity and
// trajectory[k+1] = pair[k] composed onto trajectory[k].
std::vector<AffinePose> accumulate_trajectory(const std::vector<AffinePose>& pair_poses);

struct SmoothConfig {
  int window = 20;     // total taps spanned is window+1 (centered)
  double sigma = 0.0;  // <= 0 means window / 4
};

// Gaussian-smooths the trajectory channel-wise: unwrapped rotation, log scale,
// and both translations, with edge replication at the clip boundaries. The
// truncated kernel is renormalized so weights sum to one.
std::vector<AffinePose> smooth_trajectory(const std::vector<AffinePose>& trajectory,
                                          const SmoothConfig& cfg = {});

// Per-frame alignment transform H_k = smoothed_k composed with the inverse of
// raw_k, expressed as a 2x3 matrix acting on pixel coordinates of a
// width x height frame (poses rotate/scale about the frame center).
std::vector<AlignMatrix> align_matrices(const std::vector<AffinePose>& raw,
                                        const std::vector<AffinePose>& smoothed, int width,
                                        int height);

// Warps a frame by the alignment transform: out(x) = frame(H^{-1}(x)) with
// bilinear sampling; samples landing outside the source validity are invalid.
Frame apply_alignment(const Frame& frame, const AlignMatrix& align);

// Inverse of an affine 2x3 transform. Throws numeric_error when singular.
AlignMatrix align_inverse(const AlignMatrix& m);

// Flat-text trajectory dump: header line, then one line per frame
// "idx theta s dx dy" for the raw and (when given) smoothed trajectories.
void write_trajectory(const std::string& path, const std::vector<AffinePose>& raw,
                      const std::vector<AffinePose>& smoothed = {});
std::vector<AffinePose> read_trajectory(const std::string& path, bool smoothed = false);

}  // namespace ffstab::coarse
