// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ffstab {

// Invalid configuration or argument values. CLI exit code 1.
class invalid_argument : public std::invalid_argument {
 public:
  explicit invalid_argument(const std::string& msg) : std::invalid_argument(msg) {}
};

// Filesystem-level failures (missing file, short write). CLI exit code 2.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed on-disk payloads (bad magic, truncation). CLI exit code 2.
class format_error : public io_error {
 public:
  explicit format_error(const std::string& msg) : io_error(msg) {}
};

// Numerical failures (rank-deficient systems, no valid data). CLI exit code 3.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ffstab
