#pragma once

// Counter-based random streams.
//
// Every random quantity in the simulator is addressed by a tuple of integer
// keys (master seed, experiment tag, replica, vertex, particle, ...). The tuple
// is folded into a 64-bit stream key with the SplitMix64 finalizer and the
// stream itself is SplitMix64 driven by a counter, so any stream can be
// regenerated in isolation and in any order. This is what makes lazy particle
// fields, schedule-independent replays and worker-count independence work.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace frogsim {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Fold a list of keys into one stream key.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = mix64(seed + kGolden);
    for (std::uint64_t k : keys) {
        // the rotation keeps the fold order-sensitive: (a, {b}) != (b, {a})
        h = mix64(((h << 23) | (h >> 41)) ^ mix64(k + kGolden));
    }
    return h;
}

/// FNV-1a, used to turn experiment names into stream tags.
constexpr std::uint64_t hash_name(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// SplitMix64 over an explicit counter. Satisfies UniformRandomBitGenerator.
class Stream {
public:
    using result_type = std::uint64_t;

    constexpr explicit Stream(std::uint64_t key = 0) noexcept : key_(key) {}
    constexpr Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept
        : key_(derive_key(seed, keys)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * kGolden);
    }

    /// Uniform on [0, 1) with 53 bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Exp(1) holding time.
    double exponential() noexcept { return -std::log1p(-uniform()); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        // Lemire's multiply-shift; the tiny bias is irrelevant at our n.
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t position() const noexcept { return counter_; }

    /// Independent child stream.
    constexpr Stream split(std::uint64_t tag) const noexcept { return Stream(derive_key(key_, {tag})); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Smallest k with P(Poisson(mean) <= k) >= u. Non-decreasing in mean for a
/// fixed u, which is what gives the monotone coupling in the particle density.
int poisson_quantile(double mean, double u);

/// Poisson(mean) by inversion from one uniform.
inline int sample_poisson(Stream& s, double mean) { return poisson_quantile(mean, s.uniform()); }

}  // namespace frogsim
