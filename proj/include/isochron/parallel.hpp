// Deterministic parallel map over index ranges.
//
// Work is split into contiguous blocks and every index writes only its own
// output slot, so results do not depend on the number of workers.

#ifndef ISOCHRON_PARALLEL_HPP
#define ISOCHRON_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace isochron {

namespace detail {
inline std::atomic<unsigned>& thread_cap()
{
    static std::atomic<unsigned> cap{0}; // 0: use hardware concurrency
    return cap;
}
} // namespace detail

/// Caps the number of workers used by library-internal parallel loops.
/// `1` forces sequential execution.
inline void set_max_threads(unsigned n) { detail::thread_cap() = n; }

inline unsigned max_threads()
{
    unsigned cap = detail::thread_cap();
    if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
    return cap;
}

/// Calls body(i) for i in [0, n). The body must only touch state owned by index i.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_block = 64)
{
    const std::size_t workers =
        std::min<std::size_t>(max_threads(), std::max<std::size_t>(1, n / min_block));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t block = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = w * block;
                const std::size_t hi = std::min(n, lo + block);
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace isochron

#endif
