#pragma once

#include <cstddef>
#include <functional>

namespace dcpl {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items are
// claimed from a shared atomic counter; callers write results into slots
// indexed by i, so output never depends on scheduling. The first exception
// thrown by any item is rethrown after all threads have joined.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

// Hardware concurrency, at least 1.
std::size_t default_worker_count();

}  // namespace dcpl
