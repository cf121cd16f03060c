// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace ffstab {

// Effective worker count: `requested` if positive, else the FFSTAB_THREADS
// environment override, else hardware concurrency.
int resolve_workers(int requested);

// Runs fn(i) for i in [begin, end) across `workers` threads, contiguous
// chunks. Falls back to the calling thread when one worker suffices.
void parallel_for(int begin, int end, int workers, const std::function<void(int)>& fn);

}  // namespace ffstab
