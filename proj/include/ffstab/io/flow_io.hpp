// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ffstab/core/types.hpp"

namespace ffstab {

// Middlebury .flo: float32 magic 202021.25, little-endian int32 width and
// height, then row-major interleaved float32 (u, v) pairs. A 1x1 field is
// exactly 20 bytes. Values are stored single-precision.
void write_flo(const std::string& path, const FlowField& flow);

// Throws format_error on bad magic, nonsensical dimensions, or truncation.
FlowField read_flo(const std::string& path);

}  // namespace ffstab
