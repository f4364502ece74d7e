#include "kunn/threads.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace kunn {

std::size_t thread_count() {
    static const std::size_t cached = [] {
        if (const char* env = std::getenv("KUNN_THREADS")) {
            try {
                long v = std::stol(env);
                if (v >= 1) return static_cast<std::size_t>(v);
            } catch (const std::exception&) {
                // fall through to hardware default on unparsable values
            }
        }
        unsigned hw = std::thread::hardware_concurrency();
        return static_cast<std::size_t>(hw ? hw : 1);
    }();
    return cached;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t t = std::min(thread_count(), n);
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (std::size_t w = 0; w < t; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : workers) th.join();
}

} // namespace kunn
