#pragma once

#include <cstddef>
#include <functional>

namespace pwdyn {

// Worker count used when a caller passes threads = 0.
unsigned default_threads() noexcept;

// Calls fn(i) for i in [0, n) on up to `threads` workers (0 = default).
// Items are handed out in contiguous blocks; fn must only write to slot i of
// its output, so results do not depend on scheduling. The first exception
// thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace pwdyn
