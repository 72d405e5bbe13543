#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace akt {

/// Process-wide worker count used by parallel_for (1 = run inline).
void set_thread_count(unsigned n);
[[nodiscard]] unsigned thread_count();

/// Seed for task `index` derived from a base seed (splitmix64), so results do
/// not depend on which worker picks up which task.
[[nodiscard]] std::uint64_t task_seed(std::uint64_t base, std::uint64_t index);

/// Runs body(i) for i in [0, count). Tasks are claimed in index order by a
/// fixed pool; callers write into per-index slots so assembly is deterministic.
/// The first exception thrown by any task is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const unsigned workers = std::min<std::size_t>(thread_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr error;
    auto run = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(mu);
                if (next >= count || error) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace akt
