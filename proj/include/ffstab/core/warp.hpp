// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ffstab/core/types.hpp"

namespace ffstab {

// Flow induced by a similarity pose about the frame center:
// flow(x) = s*R*(x - c) + c + d - x. Identity pose yields zero flow.
FlowField affine_flow(const AffinePose& pose, int width, int height);

// y minus the pose-induced flow, elementwise. Identity pose is a no-op.
FlowField residual_flow(const FlowField& y, const AffinePose& pose);

// Backward field of a projective map: flow(x) = H(x) - x, where H takes the
// field's own grid coordinates into the sampled frame's coordinates.
FlowField induced_flow(const Homography& target_to_source, int width, int height);

// Backward bilinear warp: out(x) = src(x + flow(x)). The output takes the
// flow's grid (src dims may differ); a target pixel is valid only when the
// sample lands inside src bounds and every bilinear tap is valid.
Frame warp_frame(const Frame& src, const FlowField& flow);

// Renders the image of src under H (out(H(x)) = src(x)); samples src at H^-1.
Frame warp_frame(const Frame& src, const Homography& src_to_out);

// Nearest-neighbor warp of a mask; out-of-bounds samples are false.
BinaryMask warp_mask(const BinaryMask& mask, const FlowField& flow);

// Clamped bilinear sample of a flow field at fractional coordinates.
Vec2 sample_flow(const FlowField& f, double x, double y);

// Luma copy (Rec.601 weights for 3-channel frames); validity preserved.
Frame to_gray(const Frame& f);

// 2x box-filter downsample of intensities; a coarse pixel is valid when any
// contributing fine pixel is.
Frame downsample2(const Frame& f);

}  // namespace ffstab
