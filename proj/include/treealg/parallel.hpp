#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace treealg {

// Worker cap: min(hardware, TREEALG_THREADS). Defaults to 1 when the
// variable is unset so exact-arithmetic runs stay deterministic in cost.
inline unsigned thread_budget()
{
    const char* env = std::getenv("TREEALG_THREADS");
    if (!env)
        return 1;
    long v = std::strtol(env, nullptr, 10);
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (v <= 1)
        return 1;
    return std::min<unsigned>(static_cast<unsigned>(v), hw);
}

// Runs fn(0..count-1); tasks must be independent. Falls back to a plain
// loop when the budget is one thread.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn)
{
    unsigned budget = thread_budget();
    if (budget <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    unsigned workers = std::min<std::size_t>(budget, count);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= count)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace treealg
