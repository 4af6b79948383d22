#pragma once

// Minimal fork-join helper. Work items write to disjoint, pre-sized slots so
// results never depend on the number of threads; reductions stay sequential
// in the callers.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ghfm {

/// Process-wide worker count; 0 means hardware concurrency.
inline std::atomic<int>& thread_setting() {
    static std::atomic<int> threads{1};
    return threads;
}

inline void set_threads(int threads) { thread_setting().store(std::max(threads, 0)); }

inline int effective_threads() {
    int t = thread_setting().load();
    if (t == 0) t = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return t;
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(effective_threads()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ghfm
