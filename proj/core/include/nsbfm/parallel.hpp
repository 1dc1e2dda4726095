#pragma once

#include <cstddef>
#include <functional>

namespace nsbfm {

/// Worker count used by parallel_for. Defaults to NSBFM_THREADS when set,
/// otherwise the hardware concurrency.
int num_threads();
void set_num_threads(int n);

/// Runs body(i) for i in [0, n) over contiguous static chunks. Nested calls
/// from inside a worker run serially. Each index must write only its own
/// output slot; reductions belong to the caller, in index order, which keeps
/// results independent of the worker count.
void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body);

}  // namespace nsbfm
