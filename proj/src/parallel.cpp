#include "frann/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace frann {

std::size_t thread_count() {
    static const std::size_t count = [] {
        if (const char* env = std::getenv("FRANN_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return std::size_t(v);
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return std::size_t(hw > 0 ? hw : 1);
    }();
    return count;
}

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        fn(0, 0, n);
        return;
    }
    const std::size_t base = n / workers;
    const std::size_t extra = n % workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t lo = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t hi = lo + base + (w < extra ? 1 : 0);
        pool.emplace_back([&fn, w, lo, hi] { fn(w, lo, hi); });
        lo = hi;
    }
    for (auto& t : pool) t.join();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    parallel_chunks(n, [&fn](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
}

}  // namespace frann
