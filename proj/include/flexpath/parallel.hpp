#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace flexpath {

/// Worker cap: FLEXPATH_THREADS if set to a positive integer, else hardware concurrency.
inline int thread_limit()
{
    if (const char* env = std::getenv("FLEXPATH_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) {
                return n;
            }
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluate fn(0..n-1) on up to `threads` workers; results keep index order.
/// The first exception (lowest index) is rethrown after all workers finish.
template <typename Fn>
auto parallel_map(int n, Fn fn, int threads = thread_limit())
{
    using Result = decltype(fn(0));
    std::vector<Result> results(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                results[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int count = std::clamp(threads, 1, std::max(1, n));
    std::vector<std::thread> pool;
    for (int k = 1; k < count; ++k) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return results;
}

} // namespace flexpath
