#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ctp {

/// Runs body(i) for i in [0, n) on `threads` workers with static block
/// partitioning.  Each index is processed exactly once and the caller writes
/// results into index-addressed slots, so the outcome is identical for every
/// thread count.  Exceptions must be handled inside `body`.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& body) {
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const size_t workers = std::min<size_t>(static_cast<size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        const size_t lo = n * w / workers;
        const size_t hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &body] {
            for (size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace ctp
