#ifndef ENTANGLE_PARALLEL_HPP
#define ENTANGLE_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace entangle {

/// Thread count from ENTANGLE_THREADS, else 1.
inline int default_thread_count()
{
    if (const char* env = std::getenv("ENTANGLE_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0)
                return n;
        } catch (...) {
        }
    }
    return 1;
}

/// Run fn(k) for k in [0, n) on up to `threads` workers. Work items must write
/// only to their own output slot; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k)
            fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) {
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace entangle

#endif // ENTANGLE_PARALLEL_HPP
