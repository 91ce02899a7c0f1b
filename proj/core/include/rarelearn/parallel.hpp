#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rarelearn {

// Runs fn(0..n_tasks) across up to `jobs` worker threads. Task bodies must be
// pure given their index (each one owns its RNG stream and result slot), so
// results never depend on the schedule. The first exception thrown by any
// task is rethrown on the caller's thread.
inline void parallel_for(std::size_t n_tasks, std::size_t jobs,
                         const std::function<void(std::size_t)>& fn) {
    if (n_tasks == 0)
        return;
    if (jobs <= 1 || n_tasks == 1) {
        for (std::size_t i = 0; i < n_tasks; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n_tasks)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    std::size_t n_workers = std::min(jobs, n_tasks);
    pool.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace rarelearn
