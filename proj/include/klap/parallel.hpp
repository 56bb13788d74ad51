// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace klap {

// Resolve a worker count: 0 means "use hardware concurrency", otherwise the
// requested value. KLAP_THREADS in the environment caps the hardware default.
int resolve_threads(int requested);

// Run fn(i) for i in [0, n). Work items must be independent; any reduction is
// the caller's job and must be performed in index order for determinism.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

} // namespace klap
