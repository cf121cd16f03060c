// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ffstab/core/types.hpp"

namespace ffstab::coarse {

struct PoseSolveConfig {
  int max_iters = 10;
  double tol = 1e-12;       // convergence threshold on the pose increment
  double huber_delta = 1.0; // px, residual magnitude where downweighting starts
};

// Fits the similarity pose whose induced flow best explains `flow` over the
// masked pixels: an iteratively reweighted least-squares fit (Huber weights)
// followed by residual refinement steps applying the update rule
// {theta + dtheta, s * ds, dx + ddx, dy + ddy}. Exact (to solver tolerance)
// on noiseless similarity-induced flow with non-degenerate support.
// Throws numeric_error when the mask has fewer than 16 true pixels or its
// support is collinear (rank-deficient fit).
AffinePose solve_pose(const FlowField& flow, const BinaryMask& mask,
                      const PoseSolveConfig& cfg = {});

struct LossWeights {
  double theta = 1.0;
  double scale = 1.0;
  double translation = 1.5;
  double grid = 2.0;
  double epsilon = 1e-6;  // additive floor inside the grid term
};

struct PoseMetrics {
  double l_gt = 0.0;    // parameter-space loss
  double l_grid = 0.0;  // normalized-grid deviation (mean |delta + eps|)
  double l_stab = 0.0;  // l_gt + grid weight * l_grid
};

// Parameter loss: w_theta*|dtheta| + w_scale*|1 - s_pred/s_gt| +
// w_translation*(|ddx| + |ddy|); grid loss: both poses applied to the
// normalized grid (translations rescaled to normalized units by the grid
// dims), mean absolute deviation with the epsilon floor added inside.
// The grid must be normalized.
PoseMetrics pose_metrics(const AffinePose& pred, const AffinePose& gt, const CoordGrid& grid,
                         const LossWeights& weights = {});

}  // namespace ffstab::coarse
