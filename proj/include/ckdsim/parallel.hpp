#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ckd {

// Static block partition of [0, n) over nthreads workers. Each index is
// processed exactly once and results are expected to be written to
// index-addressed storage, so the outcome is independent of the thread
// count. nthreads == 0 selects the hardware concurrency.
template <typename Fn>
void parallel_for(std::size_t n, unsigned nthreads, Fn&& fn) {
    if (n == 0) return;
    if (nthreads == 0) nthreads = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(nthreads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace ckd
