// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ffstab/core/types.hpp"

namespace ffstab::eval {

// Mean over frames of (valid output pixels) / (full frame area).
// Sequences must be non-empty and matched in length and size.
double cropping_ratio(const std::vector<Frame>& input, const std::vector<Frame>& output);

// Least-squares affine map src -> dst. Throws numeric_error on degenerate
// (e.g. collinear) support or fewer than 3 points.
AlignMatrix fit_affine_map(const std::vector<Vec2>& src, const std::vector<Vec2>& dst);

// Ratio of the smaller to the larger singular value of the transform's 2x2
// linear part, clamped to [0,1]. 1.0 means isotropic (similarity).
double frame_distortion(const AlignMatrix& input_to_output);

// Worst-case (minimum) frame distortion over a sequence of per-frame
// input->output transforms.
double distortion_value(const std::vector<AlignMatrix>& input_to_output);

// Affine input->output transform realized by an alignment plus a pixel warp
// field: output pixel x samples input at A^{-1}(x + W(x)); the returned
// affine is the least-squares fit of the inverse correspondence sampled on a
// sparse grid.
AlignMatrix transform_from_warp(const AlignMatrix& align, const FlowField& warp);

// Spectral stability of a camera path: per channel (rotation, dx, dy), the
// DFT energy in frequency bins 2-6 over the energy in bins 1..N/2, averaged
// across channels. A channel with zero oscillating energy scores 1 by
// convention. Requires at least 32 samples.
double stability_score(const std::vector<AffinePose>& trajectory);

// Same score with the path extracted from the frames themselves: consecutive
// pose fits on block-matched flow, accumulated into a trajectory.
double stability_score(const std::vector<Frame>& frames);

// Peak signal-to-noise ratio in dB over [0,1] intensities, capped at 99.
// When region is given, only those pixels contribute.
double psnr(const Frame& a, const Frame& b, const BinaryMask* region = nullptr);

// Mean structural similarity with an 11x11 Gaussian window (sigma 1.5),
// standard constants K1=0.01, K2=0.03 on unit dynamic range, replicated
// borders, averaged over channels (and over the region when given).
double ssim(const Frame& a, const Frame& b, const BinaryMask* region = nullptr);

}  // namespace ffstab::eval
