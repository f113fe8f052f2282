#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <utility>
#include <vector>

namespace vlasim {

// Default worker count: VLASIM_THREADS env var, else 1.
inline int default_thread_count() {
    if (const char* env = std::getenv("VLASIM_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

// Static contiguous partition of [0, n) over `threads` workers.
// Results must not depend on the partition: bodies may only write
// per-index outputs; reductions happen sequentially afterwards.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    if (threads <= 1 || n < 2) {
        body(std::size_t{0}, n);
        return;
    }
    std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace vlasim
