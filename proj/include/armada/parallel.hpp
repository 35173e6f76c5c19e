#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace armada {

// Process-wide worker cap, set once by the CLI (--jobs). Results must be
// identical for any value: workers only ever write to disjoint, index-addressed
// slots, and reductions happen after the join in index order.
inline std::atomic<int>& max_jobs_slot() {
    static std::atomic<int> jobs{static_cast<int>(std::thread::hardware_concurrency())};
    return jobs;
}

inline void set_max_jobs(int jobs) { max_jobs_slot().store(jobs < 1 ? 1 : jobs); }
inline int max_jobs() { return std::max(1, max_jobs_slot().load()); }

// Runs body(i) for i in [0, n). Work is claimed from a shared counter; body
// must write only to its own slot i.
template <typename F>
void parallel_for(std::size_t n, F&& body, int jobs = 0) {
    if (jobs <= 0) jobs = max_jobs();
    jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs) - 1);
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace armada
