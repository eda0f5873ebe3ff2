#pragma once

// Frog-model engine.
//
// A ParticleField never stores particles. The count at x and the walk of the
// i-th particle at x are pure functions of (seed, tag, x, i), so any query is
// replayed exactly and no cache is needed. Counts come from Poisson inversion of
// one uniform per vertex, which makes the particle set monotone in lambda;
// walks are prefix-consistent in the lifespan, which makes ranges monotone in t.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "frogsim/estimate.hpp"
#include "frogsim/graph.hpp"
#include "frogsim/rng.hpp"
#include "frogsim/walks.hpp"

namespace frogsim {

struct FrogParams {
    double lambda = 0.0;
    double t = 0.0;
    void validate() const;
};

class ParticleField {
public:
    explicit ParticleField(std::uint64_t seed = 0, std::uint64_t tag = 0) : seed_(seed), tag_(tag) {}

    /// eta_x under density lambda.
    int count(Vertex x, double lambda) const {
        return poisson_quantile(lambda, Stream(key(x), {tag_, x, 0x636f756e74ULL}).uniform());
    }
    /// Random source of particle i at x (i counts from 0).
    Stream particle_stream(Vertex x, int i) const {
        return Stream(key(x), {tag_, x, static_cast<std::uint64_t>(i) + 1});
    }
    Trajectory trajectory(const Graph& g, Vertex x, int i, double t) const;

    /// Same field on `keep`, an independent one (alt_seed) elsewhere.
    ParticleField patched(std::uint64_t alt_seed, std::shared_ptr<const VertexMask> keep) const;

    /// Independent field for a sub-experiment.
    ParticleField child(std::uint64_t tag) const;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t tag() const noexcept { return tag_; }

private:
    std::uint64_t key(Vertex x) const noexcept {
        return (keep_ && !keep_->contains(x)) ? alt_seed_ : seed_;
    }
    std::uint64_t seed_;
    std::uint64_t tag_;
    std::uint64_t alt_seed_ = 0;
    std::shared_ptr<const VertexMask> keep_;
};

enum class Schedule { fifo, lifo, random };
enum class StopReason { exhausted, radius_reached, particle_budget, target_reached };

const char* to_string(Schedule s);
const char* to_string(StopReason s);

struct StopRule {
    int radius = -1;                            ///< stop once a vertex at depth >= radius is activated
    std::int64_t particle_budget = 50'000'000;  ///< stop once more particles than this are activated
    std::size_t activated_target = 0;           ///< stop once this many vertices are activated (0 = off)
};

struct Cluster {
    std::vector<Vertex> activation_order;
    std::int64_t total_particles = 0;
    int reached_radius = 0;  ///< largest depth (distance from the graph origin) activated
    StopReason stop_reason = StopReason::exhausted;
    bool boundary_hit = false;
    std::int64_t steps = 0;  ///< legal operations performed

    std::size_t size() const noexcept { return activation_order.size(); }
    std::vector<Vertex> activated_sorted() const;
};

struct ExploreOptions {
    Vertex start = 0;
    /// Only particles starting in this set take part (nullptr = every vertex).
    const VertexMask* allowed = nullptr;
};

/// Abelian exploration: repeatedly pick an active particle according to the
/// schedule and move it one jump; a jump onto an unvisited allowed vertex
/// activates its particles. `rng` drives only the random schedule.
Cluster explore_cluster(const Graph& g, const FrogParams& p, const ParticleField& field, const StopRule& stop,
                        Schedule schedule = Schedule::fifo, Stream rng = Stream(0), const ExploreOptions& opt = {});

struct RestrictedActivation {
    std::vector<Vertex> S;
    std::vector<std::uint8_t> harpoon;          ///< aligned with S
    std::vector<std::vector<int>> stay_sets;    ///< A_S(x), aligned with S
    std::vector<std::uint8_t> stay_computed;    ///< whether stay_sets[i] was evaluated
    std::int64_t exiters = 0;                   ///< |N(S)|
    std::int64_t exiting_jumps = 0;             ///< total jump count of the exiting particles
    std::vector<Trajectory> exiting;            ///< filled when requested

    std::vector<Vertex> reached() const;
    bool reaches(Vertex x) const;
};

/// Harpoon closure from `root` inside S. When `all_stay_sets` is false, A_S(x)
/// is only evaluated at harpoon-reached vertices, which is all the closure needs.
RestrictedActivation restricted_activation(const Graph& g, std::span<const Vertex> S, const FrogParams& p,
                                           const ParticleField& field, Vertex root = 0,
                                           bool all_stay_sets = false, bool keep_exiting = false);

/// Vertices x of B with |A_x^B| >= |B|/4. Each candidate uses field.child(x)
/// unless `shared_field` is set.
std::vector<Vertex> good_vertices(const Graph& g, std::span<const Vertex> B, const FrogParams& p,
                                  const ParticleField& field, bool shared_field = false);

/// Whether x is good for B under `field`.
bool is_good(const Graph& g, std::span<const Vertex> B, const VertexMask& mask, Vertex x, const FrogParams& p,
             const ParticleField& field);

struct EPSample {
    std::vector<std::int64_t> generations;       ///< Z_k: sum over exiting trajectories of |R| - 1
    std::vector<std::int64_t> jump_generations;  ///< same with jump counts N(t) instead of |R| - 1
    bool budget_hit = false;
    bool truncated = false;  ///< a translated ball touched the truncation boundary
};

/// EP(0) with S = B_v(radius) translated to every parent v. Stops after
/// max_generations or when a generation exceeds `budget` parents.
EPSample ep_exploration_sample(const Graph& g, int radius, const FrogParams& p, std::uint64_t seed,
                               int max_generations = 8, std::int64_t budget = 100'000);

struct SphereProfile {
    std::vector<Estimate> shells;  ///< shells[r] estimates E|A_r|, r = 0..max depth (index 0 unused)
    std::vector<std::size_t> shell_sizes;
};

SphereProfile sphere_activation_profile(const Graph& g, std::span<const Vertex> S, const FrogParams& p,
                                        int replicas, std::uint64_t seed);

struct ConditionalJumps {
    Estimate conditional_mean;  ///< E_x[N(t) | tau_{S^c} <= t]
    Estimate exit_frequency;
    std::int64_t accepted = 0;
    int distance = 0;           ///< D_x = d(x, S^c)
    double bound = 0.0;         ///< Delta^{D_x} (t + D_x)
};

/// Rejection sampler. conditional_mean has replicas = 0 when nothing exited.
ConditionalJumps exit_conditional_jumps(const Graph& g, std::span<const Vertex> S, Vertex x, double t,
                                        int replicas, std::uint64_t seed);

/// Exact E_x[N(t) 1{tau_{S^c} <= t}] = sum_k k Poi(t,k) P(chain leaves S within k jumps).
double exit_jumps_exact(const Graph& g, std::span<const Vertex> S, Vertex x, double t, double tol = 1e-10);

}  // namespace frogsim
