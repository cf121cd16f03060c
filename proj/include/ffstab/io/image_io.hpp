// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ffstab/core/types.hpp"

namespace ffstab {

// Reads a PNG (8-bit gray or RGB; palette/alpha/16-bit inputs are folded to
// those) or a binary PPM/PGM, dispatching on file magic. Samples are
// dequantized to [0,1] and the frame is marked fully valid.
Frame read_image(const std::string& path);

// Writes PNG, PPM, or PGM selected by the file extension (.png/.ppm/.pgm).
// Samples are clamped to [0,1] and quantized to 8 bits; validity is not
// stored (use the mask writers for that).
void write_image(const std::string& path, const Frame& frame);

// Masks as binary PGM, 0 = false, 255 = true.
BinaryMask read_mask_pgm(const std::string& path);
void write_mask_pgm(const std::string& path, const BinaryMask& mask);

// Confidence maps as binary PGM, [0,1] scaled to [0,255].
ConfidenceMap read_confidence_pgm(const std::string& path);
void write_confidence_pgm(const std::string& path, const ConfidenceMap& map);

}  // namespace ffstab
