// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#include "klap/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace klap {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    int hw = int(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("KLAP_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0 && cap < hw) hw = cap;
    }
    return hw;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = resolve_threads(threads);
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    int workers = threads < n ? threads : n;
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    std::exception_ptr first_error = nullptr;
    std::atomic<bool> failed{false};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace klap
