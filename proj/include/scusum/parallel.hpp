#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace scusum {

// Worker count: SCUSUM_THREADS overrides hardware_concurrency. Results are
// always indexed by replicate and reduced in index order afterwards, so the
// thread count never changes any result.
inline unsigned effective_threads() {
    if (const char* env = std::getenv("SCUSUM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Evaluates fn(r) for r in [0, n) and returns the results ordered by r.
// fn must be safe to call concurrently for distinct r.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
    std::vector<T> out(n);
    const unsigned workers = std::min<std::size_t>(effective_threads(), n == 0 ? 1 : n);
    if (workers <= 1) {
        for (std::size_t r = 0; r < n; ++r) out[r] = fn(r);
        return out;
    }
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    auto body = [&] {
        for (;;) {
            const std::size_t r = cursor.fetch_add(1);
            if (r >= n || failed.load()) return;
            try {
                out[r] = fn(r);
            } catch (...) {
                if (!failed.exchange(true)) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(first_error);
    return out;
}

}  // namespace scusum
