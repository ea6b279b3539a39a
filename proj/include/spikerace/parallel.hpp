#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace spikerace {

/**
 * Runs fn(i) for i in [0, n) on up to `workers` threads. Tasks must write only
 * to their own slot of any shared output so that results are identical for
 * every worker count; do any order-sensitive reduction after this returns.
 */
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (workers <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int n_threads = std::min(workers, n);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace spikerace
