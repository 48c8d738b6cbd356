// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/parallel.hpp"

#include <atomic>

namespace svol {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) { g_threads.store(std::max(1, threads)); }

int thread_count() { return g_threads.load(); }

} // namespace svol
