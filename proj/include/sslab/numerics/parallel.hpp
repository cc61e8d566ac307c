#ifndef SSLAB_NUMERICS_PARALLEL_HPP
#define SSLAB_NUMERICS_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace sslab {

/// Runs f(i) for i in [0, n) on up to `jobs` threads. Results must be written to per-index
/// slots so the outcome does not depend on scheduling. The exception of the lowest failing
/// index is rethrown.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
    std::vector<std::exception_ptr> errors(n);
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
        for (std::size_t k = 0; k < w; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace sslab

#endif
