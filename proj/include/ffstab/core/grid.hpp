// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ffstab/core/types.hpp"

namespace ffstab {

// Pixel grid: x(i,j) = j, y(i,j) = i. Normalized grid: coordinate 0 maps to -1
// and dim-1 maps to +1, per axis. Both dimensions must be >= 2 so the
// normalization denominators are nonzero; smaller dims throw invalid_argument.
CoordGrid make_coord_grid(int width, int height, bool normalized);

inline double to_normalized_x(double x, int width) { return 2.0 * x / (width - 1) - 1.0; }
inline double to_normalized_y(double y, int height) { return 2.0 * y / (height - 1) - 1.0; }
inline double to_pixel_x(double xn, int width) { return (xn + 1.0) * 0.5 * (width - 1); }
inline double to_pixel_y(double yn, int height) { return (yn + 1.0) * 0.5 * (height - 1); }

}  // namespace ffstab
