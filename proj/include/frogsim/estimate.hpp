#pragma once

// Monte Carlo estimates and deterministic replica fan-out.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace frogsim {

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::int64_t replicas = 0;
    std::uint64_t seed = 0;
    std::string method;

    double stderr() const noexcept { return stderr_; }
    /// |mean - target| <= k * stderr, with a floor for zero-variance samples.
    bool within(double target, double k = 3.0, double floor = 1e-12) const noexcept {
        return std::abs(mean - target) <= k * stderr_ + floor;
    }
};

/// Sample mean and standard error of the mean, summed in index order.
Estimate estimate_from(const std::vector<double>& values, std::uint64_t seed, std::string method);

/// Binomial proportion estimate from a success count.
Estimate proportion(std::int64_t successes, std::int64_t n, std::uint64_t seed, std::string method);

/// Worker count used by every replica loop. 0 means hardware concurrency.
void set_worker_count(int workers);
int worker_count();

/// Evaluate f(0..n-1) on the worker pool. Results land in index order, so any
/// reduction over the returned vector is independent of the worker count.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F&& f) {
    std::vector<R> out(n);
    const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace frogsim
