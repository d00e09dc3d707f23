#pragma once

#include <cstddef>
#include <functional>

namespace ihdg {

/// Worker count: HDG_THREADS if set and positive, otherwise all hardware threads.
[[nodiscard]] unsigned worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is visited
/// exactly once; callers must write only to slots owned by i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned max_workers = 0);

} // namespace ihdg
