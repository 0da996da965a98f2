#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pqosc {

/// Worker count: PQOSC_THREADS env var if set (>=1), else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("PQOSC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return unsigned(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1u;
}

/// Static block partition of [0, n) across workers. Deterministic: every
/// worker writes only its own index range, so results never depend on the
/// interleaving.
template <class Fn>
void parallel_for(std::size_t n, const Fn& fn, unsigned workers = 0) {
    if (workers == 0) workers = thread_count();
    workers = unsigned(std::min<std::size_t>(workers, n ? n : 1));
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::mutex err_mtx;
    std::exception_ptr error;
    unsigned error_rank = unsigned(-1);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, w, &fn, &err_mtx, &error, &error_rank] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                // lowest-rank worker wins so the surfaced error is deterministic
                std::lock_guard<std::mutex> lk(err_mtx);
                if (w < error_rank) {
                    error_rank = w;
                    error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace pqosc
