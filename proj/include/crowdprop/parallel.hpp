#pragma once

#include <cstddef>
#include <functional>

namespace crowdprop {

/// Runs fn(begin, end) over fixed-size blocks of [0, n). Block boundaries do
/// not depend on the thread count, and every index is processed exactly once,
/// so per-index results are identical for any degree of parallelism.
void parallel_for_blocks(std::size_t n, unsigned threads, std::size_t block_size,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace crowdprop
