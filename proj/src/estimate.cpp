#include "frogsim/estimate.hpp"

#include <algorithm>

#include "frogsim/errors.hpp"

namespace frogsim {

namespace {
std::atomic<int> g_workers{0};
}

Estimate estimate_from(const std::vector<double>& values, std::uint64_t seed, std::string method) {
    Estimate e;
    e.replicas = static_cast<std::int64_t>(values.size());
    e.seed = seed;
    e.method = std::move(method);
    if (values.empty()) return e;
    double s = 0.0;
    for (double v : values) s += v;
    e.mean = s / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - e.mean) * (v - e.mean);
        const double var = ss / static_cast<double>(values.size() - 1);
        e.stderr_ = std::sqrt(var / static_cast<double>(values.size()));
    }
    return e;
}

Estimate proportion(std::int64_t successes, std::int64_t n, std::uint64_t seed, std::string method) {
    if (n <= 0) throw ValidationError("proportion needs at least one trial");
    Estimate e;
    e.replicas = n;
    e.seed = seed;
    e.method = std::move(method);
    e.mean = static_cast<double>(successes) / static_cast<double>(n);
    e.stderr_ = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n));
    return e;
}

void set_worker_count(int workers) {
    if (workers < 0) throw ValidationError("worker count must be >= 0");
    g_workers.store(workers);
}

int worker_count() {
    int w = g_workers.load();
    if (w > 0) return w;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace frogsim
