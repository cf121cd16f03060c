// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ffstab/core/types.hpp"
#include "ffstab/flow/provider.hpp"
#include "ffstab/outpaint/outpaint.hpp"
#include "ffstab/pipeline/config.hpp"

namespace ffstab::pipeline {

// Adjacent-pair flow data: flows[k] lives on frame k's grid and points into
// frame k+1 (warping frame k+1 by flows[k] reconstructs frame k).
struct PairData {
  std::vector<FlowField> flows;
  std::vector<ConfidenceMap> confs;
};

PairData estimate_pair_data(const std::vector<Frame>& frames, flow::FlowProvider& provider,
                            int workers);

// Shared-region mask per adjacent pair: the sequence is tiled into windows of
// window_frames frames and each window's flows are back-propagated into
// aggregated masks; out[k] is the mask on frame k's grid.
std::vector<BinaryMask> window_pair_masks(const std::vector<FlowField>& flows,
                                          const std::vector<ConfidenceMap>& confs,
                                          int window_frames, double delta_c);

struct StabilizeResult {
  std::vector<Frame> frames;  // stabilized sequence
  std::vector<AffinePose> pair_poses;
  std::vector<AffinePose> raw_trajectory;
  std::vector<AffinePose> smooth_trajectory;
  std::vector<AlignMatrix> aligns;
  std::vector<FlowField> warps;  // per-frame fine warp fields
  std::vector<std::string> warnings;
};

// Two-stage stabilization: adjacent-pair flows -> confidence masks -> pose
// solve per pair -> trajectory accumulation and Gaussian smoothing ->
// per-frame alignment -> fine warp fields solved on tiled windows -> a single
// combined resampling per frame.
StabilizeResult stabilize_with_flows(const std::vector<Frame>& frames, const PairData& pairs,
                                     const PipelineConfig& cfg);
StabilizeResult stabilize_clip(const std::vector<Frame>& frames, flow::FlowProvider& provider,
                               const PipelineConfig& cfg);

struct OutpaintClipResult {
  std::vector<Frame> frames;  // full-frame outputs (fully valid)
  // Per target frame, per candidate (in neighbor order): fusion decisions.
  std::vector<std::vector<outpaint::FuseDecision>> decisions;
  std::vector<std::string> warnings;
};

// Full-frame rendering: for each target frame, neighboring frames are warped
// onto it with margin-extended flow, re-aligned through a cropped re-estimate,
// composited under the refined keep mask, fused across candidates, and any
// remaining holes are filled from the nearest valid pixel.
// `primary` estimates the target->neighbor flows; the cropped re-alignment
// always uses block matching on the rendered content.
OutpaintClipResult outpaint_clip(const std::vector<Frame>& stabilized,
                                 flow::FlowProvider& primary, const PipelineConfig& cfg);

struct PipelineRunResult {
  StabilizeResult stab;
  OutpaintClipResult outp;
};

// stabilize_clip followed by outpaint_clip; outpainting flows come from block
// matching on the stabilized frames (ground-truth transforms no longer apply
// to warped content).
PipelineRunResult run_pipeline(const std::vector<Frame>& frames, flow::FlowProvider& provider,
                               const PipelineConfig& cfg);

}  // namespace ffstab::pipeline
