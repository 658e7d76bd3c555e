#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace spectral {

/// Worker count: SPECTRAL_THREADS if set and positive, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("SPECTRAL_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [begin, end) split into contiguous blocks.
/// Results must not depend on the split; bodies write to disjoint outputs.
template <typename Body>
void parallel_for(long begin, long end, Body&& body, long min_block = 64) {
    const long total = end - begin;
    if (total <= 0) return;
    const long workers = std::min<long>(thread_count(), std::max<long>(1, total / std::max<long>(1, min_block)));
    if (workers <= 1) {
        for (long i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const long block = (total + workers - 1) / workers;
    for (long w = 0; w < workers; ++w) {
        const long lo = begin + w * block;
        const long hi = std::min(end, lo + block);
        if (lo >= hi) break;
        threads.emplace_back([&, lo, hi] {
            try {
                for (long i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace spectral
