// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ffstab/core/types.hpp"

namespace ffstab::fine {

struct WarpSolveConfig {
  int grid_stride = 16;     // control-node spacing in pixels, >= 4
  int iters = 100;          // gradient-descent iterations
  double step = 0.5;        // initial step size (backtracking adjusts it)
  double lambda_reg = 0.1;  // Laplacian smoothness weight on the control grid
};

// Residual displacement between consecutive aligned frames: both the pixel
// grid and the adjacent-pair flow are taken to normalized coordinates, the
// two alignment transforms are applied, and the difference
//   F(x) = A_{k+1}(x + Y(x)) - A_k(x)
// is converted back to pixel units. Throws invalid_argument when either
// alignment transform is singular.
FlowField residual_pair_flow(const AlignMatrix& align_k, const AlignMatrix& align_k1,
                             const FlowField& pair_flow);

struct WarpSolveResult {
  // One warp field per frame in the window; first and last stay zero.
  std::vector<FlowField> fields;
  // True when every mask was empty: the data term vanished, so the solver
  // returned all-zero fields and the caller should treat this as a warning.
  bool empty_masks = false;
  double objective_initial = 0.0;
  double objective_final = 0.0;
  int iters_run = 0;
};

// Minimizes, over per-frame warp fields W_1..W_{N-1} (W_0 = W_N = 0 pinned),
//   sum_k | F_k + W_k - W_{k+1}(x + F_k(x)) |^2 restricted to mask_k
//   + lambda * sum_k |Laplacian(W_k)|^2 on the control grid,
// by gradient descent on control-grid coefficients with backtracking line
// search (the objective never increases between accepted iterates). The
// returned fields are the control grids bilinearly expanded to full
// resolution.
WarpSolveResult solve_warp_fields(const std::vector<FlowField>& residuals,
                                  const std::vector<BinaryMask>& masks,
                                  const WarpSolveConfig& cfg = {});

// Applies the combined coarse+fine transform in a single resampling pass:
// out(x) = frame(A^{-1}(x + W(x))). Frame k uses align[k] and warps[k].
std::vector<Frame> apply_warps(const std::vector<Frame>& frames,
                               const std::vector<AlignMatrix>& aligns,
                               const std::vector<FlowField>& warps);

}  // namespace ffstab::fine
