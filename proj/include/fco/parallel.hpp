#pragma once

#include <cstddef>
#include <functional>

namespace fco {

/// Worker count: FCO_BENCH_THREADS when set and positive, otherwise the hardware count.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers write results
/// into pre-sized slots so output order never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fco
