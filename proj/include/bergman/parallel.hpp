#pragma once

// Deterministic data parallelism: bodies write to index-disjoint slots of
// preallocated buffers and every reduction happens afterwards in fixed
// index order, so results are bitwise independent of the worker count.
// BERGMAN_THREADS overrides the worker count (useful for pinning to 1).

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bergman {

inline unsigned worker_count() {
    if (const char* env = std::getenv("BERGMAN_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 64));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

template <class F>
void parallel_for(std::size_t n, const F& body) {
    constexpr std::size_t chunk = 1024;
    const std::size_t max_useful = std::max<std::size_t>(n / chunk, 1);
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(worker_count(), max_useful));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            const std::size_t end = std::min(n, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace bergman
