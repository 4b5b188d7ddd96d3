#pragma once

#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

#include "phiot/types.hpp"

namespace phiot::detail {

// Worker cap from PHIOT_THREADS (0 or unset means hardware concurrency).
inline int thread_count() {
    static const int cached = [] {
        int n = 0;
        if (const char* env = std::getenv("PHIOT_THREADS")) n = std::atoi(env);
        if (n <= 0) n = int(std::thread::hardware_concurrency());
        return n > 0 ? n : 1;
    }();
    return cached;
}

// Runs f(i) for i in [0, n), chunked over threads. Small ranges stay
// serial. If several chunks throw, the lowest-indexed chunk's exception
// is rethrown.
template <class F>
void parallel_for(Index n, F&& f) {
    const int workers = thread_count();
    if (n < 128 || workers <= 1) {
        for (Index i = 0; i < n; ++i) f(i);
        return;
    }
    const int chunks = int(std::min<Index>(workers, n));
    std::vector<std::exception_ptr> errs(chunks);
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (int c = 0; c < chunks; ++c) {
        const Index lo = n * c / chunks;
        const Index hi = n * (c + 1) / chunks;
        pool.emplace_back([&, lo, hi, c] {
            try {
                for (Index i = lo; i < hi; ++i) f(i);
            } catch (...) {
                errs[c] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace phiot::detail
