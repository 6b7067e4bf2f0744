#pragma once

#include <cstddef>
#include <functional>

namespace rodnet {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; callers write into per-index slots and reduce in
/// index order afterwards, which keeps results independent of thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &body);

} // namespace rodnet
