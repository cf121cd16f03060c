// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "ffstab/core/types.hpp"

namespace ffstab::outpaint {

struct OutpaintConfig {
  // Patch-distance threshold separating aligned from misaligned content.
  // Frozen from the scripted equal-error calibration (calibrate_patch_threshold
  // on rendered candidates from three seeded synthetic clips, 2 px shift:
  // 0.034 / 0.044 / 0.035); literal mode uses delta_d_literal instead.
  double delta_d = 0.04;
  double delta_d_literal = 0.2;
  int eta_t = 20;        // stop refining once the changed-pixel count drops here
  int k_tin = 11;        // odd dilation kernel width for label refinement
  double eta_u = 25000;  // max unstable-extra area, px at the reference size
  double eta_r = 1.2;    // area-ratio gate between candidate and target
  double eta_s = 2000;   // min stable-extra area, px at the reference size
  double delta_r = 0.8;  // max overlap fraction against already-covered area
  bool literal_alg3 = false;  // flip the ratio gate and use delta_d_literal
  double crop_ratio = 0.9;    // centered crop factor for re-estimation passes
  int ref_width = 720;        // area gates scale with frame area vs this size
  int ref_height = 480;
};

double effective_delta_d(const OutpaintConfig& cfg);
double scaled_eta_u(const OutpaintConfig& cfg, int width, int height);
double scaled_eta_s(const OutpaintConfig& cfg, int width, int height);

// Extends a flow field beyond its validity mask: a global affine trend is
// fitted over the valid region, and the trend-free residual is extended
// harmonically (zero normal derivative at the frame border, matching the
// valid values at the region boundary). Valid pixels keep their input values
// bit for bit; the extension is smooth and reproduces affine fields exactly.
// Throws invalid_argument when the mask is empty.
FlowField outpaint_flow(const FlowField& flow, const BinaryMask& valid);

struct DistanceMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // row-major, range [0, 2]
  float at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

// Local patch dissimilarity D = 1 - NCC over 7x7 windows, averaged across two
// scales (full and half resolution). 0 means identical structure, 1 means
// uncorrelated, 2 means inverted; pixels invalid in either frame get 2.
DistanceMap patch_distance(const Frame& a, const Frame& b);

// Equal-error calibration for the patch-distance threshold. Each (target,
// candidate) pair contributes its per-pixel distances to the "aligned" class
// and, with the candidate translated by shift_px, to the "misaligned" class;
// the returned threshold is where the two error rates cross. Candidates
// should come from the same processing chain the threshold will judge.
// Pixels invalid in either frame of a pair are ignored. Integer shifts add
// no resampling of their own, so both classes see identical blur.
double calibrate_patch_threshold(const std::vector<Frame>& targets,
                                 const std::vector<Frame>& candidates, double shift_px = 2.0);

struct OutpaintMaskResult {
  BinaryMask mask;                  // pixels to take from the warped candidate
  std::vector<std::int8_t> labels;  // final refined label per pixel
  int iterations = 0;
  int last_changed = 0;
};

// Label refinement deciding which pixels of the fused result keep the target
// content: initial labels are 1 outside the target validity, 2 where only the
// target (not the cropped version) is valid, 0 where both are valid and the
// re-aligned candidate matches the cropped target (patch distance between
// crop_target and candidate_warp below threshold), and -1 otherwise.
// Max-dilation with re-clamping of the 1/-1 seeds repeats until the
// changed-pixel count drops to eta_t; the output mask is the label-2 region.
OutpaintMaskResult outpaint_mask(const Frame& target, const Frame& crop_target,
                                 const Frame& candidate_warp, const BinaryMask& target_valid,
                                 const BinaryMask& crop_valid, const OutpaintConfig& cfg = {});

// Composites the warped candidate into the target outside the keep mask;
// validity becomes the union of both validities.
Frame fuse_margin(const Frame& target, const Frame& candidate_warp, const BinaryMask& keep);

struct FusionCandidate {
  Frame result;          // margin-fused frame aligned to the target grid
  BinaryMask fill_mask;  // pixels this candidate can contribute
  double area_stable = 0.0;    // contributable area a_s
  double area_unstable = 0.0;  // leftover misaligned area a_u
};

struct FuseDecision {
  double area_stable = 0.0;
  double area_unstable = 0.0;
  double ratio = 0.0;    // (a_u) / (a_s + 1)
  double overlap = 0.0;  // fraction of fill area already covered
  bool accepted = false;
};

struct MultiFuseResult {
  Frame fused;
  std::vector<FuseDecision> decisions;  // in input candidate order
};

// Merges candidate fills into the target frame, smallest fill area first so
// larger fills take precedence, with gates on unstable area, area ratio,
// minimum fill area, and overlap with already-covered canvas. Pixels valid in
// the original target are never overwritten.
MultiFuseResult multi_frame_fuse(const Frame& target, const std::vector<FusionCandidate>& candidates,
                                 const OutpaintConfig& cfg = {});

// Fills the invalid pixels of a frame with the value of the nearest valid
// pixel (exact Euclidean distance). Output validity covers the whole frame.
// Throws invalid_argument when no pixel is valid.
Frame fill_holes(const Frame& frame);

}  // namespace ffstab::outpaint
