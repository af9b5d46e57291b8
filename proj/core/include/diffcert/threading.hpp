#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace diffcert {

namespace detail {
inline std::atomic<unsigned>& worker_cap() {
    static std::atomic<unsigned> cap{0};
    return cap;
}
} // namespace detail

/// Process-wide cap on worker threads (0 = hardware concurrency).
inline void set_worker_count(unsigned n) { detail::worker_cap().store(n); }

inline unsigned worker_count() {
    const unsigned cap = detail::worker_cap().load();
    if (cap > 0) return cap;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
/// The chunk decomposition is independent of the worker count, so callers that
/// write per-chunk results and merge them in chunk order get identical output
/// for any number of workers.
inline void parallel_chunks(std::size_t n, std::size_t chunk,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk == 0) chunk = 1;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    const unsigned workers = std::min<std::size_t>(worker_count(), n_chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk, std::min(n, (c + 1) * chunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= n_chunks) return;
                fn(c, c * chunk, std::min(n, (c + 1) * chunk));
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace diffcert
