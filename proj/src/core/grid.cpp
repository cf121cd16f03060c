// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/core/grid.hpp"

#include "ffstab/core/error.hpp"

namespace ffstab {

CoordGrid make_coord_grid(int width, int height, bool normalized) {
  if (width < 2 || height < 2)
    throw invalid_argument("make_coord_grid: both dimensions must be >= 2");
  CoordGrid g;
  g.width = width;
  g.height = height;
  g.normalized = normalized;
  g.x.resize(static_cast<std::size_t>(width) * height);
  g.y.resize(static_cast<std::size_t>(width) * height);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const std::size_t k = g.idx(i, j);
      if (normalized) {
        g.x[k] = to_normalized_x(j, width);
        g.y[k] = to_normalized_y(i, height);
      } else {
        g.x[k] = j;
        g.y[k] = i;
      }
    }
  }
  return g;
}

}  // namespace ffstab
