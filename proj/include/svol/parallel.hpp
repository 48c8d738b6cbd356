// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace svol {

/// Worker count used by parallel_for. Defaults to 1; the CLI sets it from --threads / SVOL_THREADS.
void set_thread_count(int threads);
int thread_count();

/// Splits [begin, end) into contiguous chunks, one per worker. Every index is visited exactly once,
/// so callers that write only to slot i get identical results for any thread count.
template <class Fn>
void parallel_for(std::int64_t begin, std::int64_t end, Fn&& fn) {
    const std::int64_t n = end - begin;
    if (n <= 0)
        return;
    const int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), n));
    if (workers <= 1) {
        for (std::int64_t i = begin; i < end; ++i)
            fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = begin + w * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi)
            break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::int64_t i = lo; i < hi; ++i)
                    fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace svol
