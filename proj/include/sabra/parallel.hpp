#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sabra {

/// Runs task(j) for j in [0, count) on up to `workers` threads. Tasks write
/// to disjoint per-index slots; the caller merges them in index order, so the
/// result does not depend on the worker count. The first exception thrown by
/// any task is rethrown after all workers join.
template <class Task>
void parallel_for(std::size_t count, unsigned workers, Task &&task) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t j = 0; j < count; ++j) {
            task(j);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t j = next++; j < count; j = next++) {
                try {
                    task(j);
                } catch (...) {
                    const std::scoped_lock lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace sabra
