#pragma once

// Continuous-time simple random walks: sampling and exact series.
//
// A walk is its jump chain plus Exp(1) holding times. Holding times are drawn
// before the neighbor at every step, so a trajectory with lifespan t is a
// prefix of the same trajectory with lifespan t' > t.
//
// Exact quantities use uniformization: p_t = sum_k Poi(t, k) P^k.

#include <cstdint>
#include <span>
#include <vector>

#include "frogsim/estimate.hpp"
#include "frogsim/graph.hpp"
#include "frogsim/rng.hpp"

namespace frogsim {

struct Trajectory {
    Vertex start = 0;
    std::vector<Vertex> jumps;  ///< positions after each jump
    double lifespan = 0.0;
    bool hit_boundary = false;  ///< entered an absorbing boundary vertex (recorded as last jump)
    bool killed = false;        ///< entered an open-killing boundary vertex (not recorded)

    std::size_t jump_count() const noexcept { return jumps.size(); }
    /// start followed by jumps, duplicates kept.
    std::vector<Vertex> path() const;
};

/// One walker advanced one legal step at a time.
class WalkCursor {
public:
    WalkCursor() = default;
    WalkCursor(Vertex start, Stream stream) : pos_(start), stream_(stream) {}

    /// Advance one jump. Returns false once the walker is finished (lifespan
    /// exceeded, absorbed or killed); on true, position() is the new vertex.
    bool step(const Graph& g, double t) {
        if (done_) return false;
        if (g.is_boundary(pos_)) {
            done_ = true;
            return false;
        }
        const double h = stream_.exponential();
        if (clock_ + h > t) {
            done_ = true;
            return false;
        }
        clock_ += h;
        const Vertex next = g.sample_neighbor(pos_, stream_.uniform());
        ++jumps_;
        if (g.is_boundary(next)) {
            done_ = true;
            if (g.boundary_mode() == BoundaryMode::open_killing) {
                killed_ = true;
                return false;
            }
            hit_boundary_ = true;
        }
        pos_ = next;
        return true;
    }

    Vertex position() const noexcept { return pos_; }
    bool done() const noexcept { return done_; }
    bool killed() const noexcept { return killed_; }
    bool hit_boundary() const noexcept { return hit_boundary_; }
    int jumps() const noexcept { return jumps_; }
    double clock() const noexcept { return clock_; }

private:
    Vertex pos_ = 0;
    Stream stream_;
    double clock_ = 0.0;
    int jumps_ = 0;
    bool done_ = false;
    bool killed_ = false;
    bool hit_boundary_ = false;
};

/// Run a walker to completion, calling visit(v) on every vertex entered after
/// the start. visit may return false to stop early.
template <class Visit>
WalkCursor run_walk(const Graph& g, Vertex x, double t, Stream stream, Visit&& visit) {
    WalkCursor c(x, stream);
    while (c.step(g, t)) {
        if (!visit(c.position())) break;
    }
    return c;
}

/// Poisson(t) jump count: number of Exp(1) arrivals in [0, t].
int sample_jump_count(double t, Stream& rng);

Trajectory sample_trajectory(const Graph& g, Vertex x, double t, Stream& rng);

/// Poisson(t) weights for uniformization, with a certified bound on the
/// omitted mass.
struct PoissonSeries {
    std::vector<double> pmf;
    double tail_bound = 0.0;
};
/// pmf[0..K] with sum_{k>K} Poi(t,k) <= tail_bound < tol. Throws
/// TruncationError when K would exceed max_terms (default 20 t + 200).
PoissonSeries poisson_series(double t, double tol, int max_terms = -1);

struct KilledWalkTable {
    std::vector<Vertex> domain;
    double horizon = 0.0;
    std::vector<double> exit_prob;  ///< aligned with domain
    double truncation_error = 0.0;
    int terms = 0;

    /// Exit probability of a domain vertex; throws ValidationError otherwise.
    double at(Vertex x) const;
};

/// P_x(tau_{S^c} <= t) for every x in S. S must avoid the truncation boundary.
KilledWalkTable exit_probability_exact(const Graph& g, std::span<const Vertex> S, double t, double tol = 1e-10,
                                       int max_terms = -1);

struct ExactValue {
    double value = 0.0;
    double truncation_error = 0.0;
    double leakage = 0.0;  ///< mass that reached the truncation boundary within the series
};

/// P_x(tau_y <= t).
ExactValue hitting_probability_exact(const Graph& g, Vertex x, Vertex y, double t, double tol = 1e-10);

/// p_t(x, y). Throws TruncationError when boundary leakage exceeds tol.
ExactValue heat_kernel_exact(const Graph& g, Vertex x, Vertex y, double t, double tol = 1e-10);

struct HeatKernelRow {
    std::vector<Vertex> vertices;
    std::vector<double> values;
    double truncation_error = 0.0;
    double leakage = 0.0;
    double sum() const;
};
/// The whole row p_t(x, .), without the leakage check.
HeatKernelRow heat_kernel_row(const Graph& g, Vertex x, double t, double tol = 1e-10);

/// G_t(x, y) = int_0^t p_s(x, y) ds. Throws TruncationError on leakage above tol.
ExactValue truncated_green(const Graph& g, Vertex x, Vertex y, double t, double tol = 1e-10);

/// Monte Carlo P_x(tau_{S^c} <= t), for cross-checking the exact table.
Estimate exit_frequency_mc(const Graph& g, std::span<const Vertex> S, Vertex x, double t, int replicas,
                           std::uint64_t seed);

struct RangeStats {
    Estimate range;            ///< E|R(t)|
    Estimate range_in_region;  ///< E|R(t) ∩ (B \ H)|
    Estimate small_range;      ///< P(|R(t)| <= alpha t)
    double boundary_fraction = 0.0;
};

/// B empty means the whole graph.
RangeStats range_statistics(const Graph& g, Vertex x, double t, std::span<const Vertex> B,
                            std::span<const Vertex> H, double alpha, int replicas, std::uint64_t seed);

struct SelfIntersection {
    Estimate count;
    int terms = 0;  ///< length of the subsampled sequence
    double bound(double rho) const;
    double t = 0.0;
    int m = 1;
};

/// Equal pairs in Y(i) = X(m i), i < floor(t / 2m), of the jump chain started
/// at x. Counting stops when the chain is absorbed at the boundary.
SelfIntersection self_intersection_profile(const Graph& g, Vertex x, double t, int m, int replicas,
                                           std::uint64_t seed);

}  // namespace frogsim
