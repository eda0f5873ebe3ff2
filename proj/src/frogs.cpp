#include "frogsim/frogs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <unordered_map>

#include "frogsim/errors.hpp"
#include "frogsim/stamp_set.hpp"

namespace frogsim {

void FrogParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be finite and >= 0");
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("t must be finite and >= 0");
    if (lambda > 500.0) throw ValidationError("lambda above 500 is not supported");
}

Trajectory ParticleField::trajectory(const Graph& g, Vertex x, int i, double t) const {
    Trajectory tr;
    tr.start = x;
    tr.lifespan = t;
    WalkCursor c = run_walk(g, x, t, particle_stream(x, i), [&](Vertex v) {
        tr.jumps.push_back(v);
        return true;
    });
    tr.hit_boundary = c.hit_boundary();
    tr.killed = c.killed();
    return tr;
}

ParticleField ParticleField::patched(std::uint64_t alt_seed, std::shared_ptr<const VertexMask> keep) const {
    ParticleField f = *this;
    f.alt_seed_ = alt_seed;
    f.keep_ = std::move(keep);
    return f;
}

ParticleField ParticleField::child(std::uint64_t tag) const {
    ParticleField f(seed_, derive_key(tag_, {tag}));
    return f;
}

const char* to_string(Schedule s) {
    switch (s) {
        case Schedule::fifo: return "fifo";
        case Schedule::lifo: return "lifo";
        case Schedule::random: return "random";
    }
    return "?";
}

const char* to_string(StopReason s) {
    switch (s) {
        case StopReason::exhausted: return "exhausted";
        case StopReason::radius_reached: return "radius_reached";
        case StopReason::particle_budget: return "particle_budget";
        case StopReason::target_reached: return "target_reached";
    }
    return "?";
}

std::vector<Vertex> Cluster::activated_sorted() const {
    std::vector<Vertex> v = activation_order;
    std::sort(v.begin(), v.end());
    return v;
}

// ---------------------------------------------------------------------------
// Exploration

namespace {

struct Explorer {
    const Graph& g;
    const FrogParams& p;
    const ParticleField& field;
    const StopRule& stop;
    const ExploreOptions& opt;
    StampSet& activated;
    Cluster cluster;
    bool halted = false;

    /// Activate v and hand its fresh walkers to `push`.
    template <class Push>
    void activate(Vertex v, Push&& push) {
        if (opt.allowed && !opt.allowed->contains(v)) return;
        if (!activated.insert(v)) return;
        cluster.activation_order.push_back(v);
        const int d = g.depth(v);
        cluster.reached_radius = std::max(cluster.reached_radius, d);
        const int n = p.lambda > 0.0 ? field.count(v, p.lambda) : 0;
        cluster.total_particles += n;
        if (stop.radius >= 0 && d >= stop.radius) {
            cluster.stop_reason = StopReason::radius_reached;
            halted = true;
            return;
        }
        if (cluster.total_particles > stop.particle_budget) {
            cluster.stop_reason = StopReason::particle_budget;
            halted = true;
            return;
        }
        if (stop.activated_target > 0 && cluster.activation_order.size() >= stop.activated_target) {
            cluster.stop_reason = StopReason::target_reached;
            halted = true;
            return;
        }
        for (int i = 0; i < n; ++i) push(WalkCursor(v, field.particle_stream(v, i)));
    }

    void note_end(const WalkCursor& c) {
        if (c.killed() || c.hit_boundary()) cluster.boundary_hit = true;
    }
};

}  // namespace

Cluster explore_cluster(const Graph& g, const FrogParams& p, const ParticleField& field, const StopRule& stop,
                        Schedule schedule, Stream rng, const ExploreOptions& opt) {
    p.validate();
    if (opt.start >= g.vertex_count()) throw ValidationError("start vertex out of range");
    if (opt.allowed && !opt.allowed->contains(opt.start)) throw ValidationError("start vertex is not allowed");
    if (stop.particle_budget < 0) throw ValidationError("particle budget must be >= 0");
    Explorer ex{g, p, field, stop, opt, scratch_set(g.vertex_count(), 2), {}, false};
    const double t = p.t;

    switch (schedule) {
        case Schedule::fifo: {
            std::deque<WalkCursor> q;
            auto push = [&](WalkCursor c) { q.push_back(c); };
            ex.activate(opt.start, push);
            while (!q.empty() && !ex.halted) {
                WalkCursor c = q.front();
                q.pop_front();
                if (c.step(g, t)) {
                    ++ex.cluster.steps;
                    ex.note_end(c);
                    ex.activate(c.position(), push);
                    q.push_back(c);
                } else {
                    ex.note_end(c);
                }
            }
            break;
        }
        case Schedule::lifo: {
            std::vector<WalkCursor> stack;
            auto push = [&](WalkCursor c) { stack.push_back(c); };
            ex.activate(opt.start, push);
            while (!stack.empty() && !ex.halted) {
                WalkCursor& top = stack.back();
                if (top.step(g, t)) {
                    ++ex.cluster.steps;
                    ex.note_end(top);
                    const Vertex v = top.position();
                    ex.activate(v, push);  // may reallocate; `top` is not used afterwards
                } else {
                    ex.note_end(top);
                    stack.pop_back();
                }
            }
            break;
        }
        case Schedule::random: {
            std::vector<WalkCursor> pool;
            auto push = [&](WalkCursor c) { pool.push_back(c); };
            ex.activate(opt.start, push);
            while (!pool.empty() && !ex.halted) {
                const std::size_t k = static_cast<std::size_t>(rng.below(pool.size()));
                if (pool[k].step(g, t)) {
                    ++ex.cluster.steps;
                    ex.note_end(pool[k]);
                    const Vertex v = pool[k].position();
                    ex.activate(v, push);
                } else {
                    ex.note_end(pool[k]);
                    pool[k] = pool.back();
                    pool.pop_back();
                }
            }
            break;
        }
    }
    return std::move(ex.cluster);
}

// ---------------------------------------------------------------------------
// Restricted activation

std::vector<Vertex> RestrictedActivation::reached() const {
    std::vector<Vertex> out;
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (harpoon[i]) out.push_back(S[i]);
    }
    return out;
}

bool RestrictedActivation::reaches(Vertex x) const {
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (S[i] == x) return harpoon[i] != 0;
    }
    return false;
}

RestrictedActivation restricted_activation(const Graph& g, std::span<const Vertex> S, const FrogParams& p,
                                           const ParticleField& field, Vertex root, bool all_stay_sets,
                                           bool keep_exiting) {
    p.validate();
    RestrictedActivation ra;
    std::unordered_map<Vertex, std::uint32_t> index;
    index.reserve(S.size() * 2);
    for (Vertex v : S) {
        if (v >= g.vertex_count()) throw ValidationError("vertex out of range");
        if (g.is_boundary(v)) throw ValidationError("restricted_activation: S touches the truncation boundary");
        if (index.emplace(v, static_cast<std::uint32_t>(ra.S.size())).second) ra.S.push_back(v);
    }
    auto root_it = index.find(root);
    if (root_it == index.end()) throw ValidationError("restricted_activation: root not in S");
    const std::size_t n = ra.S.size();
    ra.harpoon.assign(n, 0);
    ra.stay_sets.assign(n, {});
    ra.stay_computed.assign(n, 0);

    std::vector<std::uint32_t> queue{root_it->second};
    ra.harpoon[root_it->second] = 1;
    std::vector<Vertex> buffer;

    // Evaluate every particle at S[i]; staying ranges are returned through `on_stay`.
    auto evaluate = [&](std::uint32_t i, bool count_exiters, auto&& on_stay) {
        const Vertex y = ra.S[i];
        const int eta = p.lambda > 0.0 ? field.count(y, p.lambda) : 0;
        ra.stay_computed[i] = 1;
        for (int k = 0; k < eta; ++k) {
            buffer.clear();
            bool exits = false;
            WalkCursor c(y, field.particle_stream(y, k));
            while (c.step(g, p.t)) {
                const Vertex v = c.position();
                buffer.push_back(v);
                if (!exits && !index.count(v)) {
                    exits = true;
                    if (!count_exiters) break;
                }
            }
            if (exits) {
                if (count_exiters) {
                    ++ra.exiters;
                    ra.exiting_jumps += c.jumps();
                    if (keep_exiting) {
                        Trajectory tr;
                        tr.start = y;
                        tr.lifespan = p.t;
                        tr.jumps = buffer;
                        tr.hit_boundary = c.hit_boundary();
                        tr.killed = c.killed();
                        ra.exiting.push_back(std::move(tr));
                    }
                }
                continue;
            }
            ra.stay_sets[i].push_back(k);
            on_stay(buffer);
        }
    };

    for (std::size_t h = 0; h < queue.size(); ++h) {
        evaluate(queue[h], true, [&](const std::vector<Vertex>& range) {
            for (Vertex v : range) {
                const std::uint32_t j = index.at(v);
                if (!ra.harpoon[j]) {
                    ra.harpoon[j] = 1;
                    queue.push_back(j);
                }
            }
        });
    }
    if (all_stay_sets) {
        for (std::uint32_t i = 0; i < n; ++i) {
            if (!ra.stay_computed[i]) evaluate(i, false, [](const std::vector<Vertex>&) {});
        }
    }
    return ra;
}

// ---------------------------------------------------------------------------
// Good vertices

bool is_good(const Graph& g, std::span<const Vertex> B, const VertexMask& mask, Vertex x, const FrogParams& p,
             const ParticleField& field) {
    const double need = static_cast<double>(B.size()) / 4.0;
    StopRule stop;
    stop.activated_target = static_cast<std::size_t>(std::ceil(need));
    if (stop.activated_target == 0) stop.activated_target = 1;
    ExploreOptions opt;
    opt.start = x;
    opt.allowed = &mask;
    Cluster c = explore_cluster(g, p, field, stop, Schedule::fifo, Stream(0), opt);
    return static_cast<double>(c.size()) >= need;
}

std::vector<Vertex> good_vertices(const Graph& g, std::span<const Vertex> B, const FrogParams& p,
                                  const ParticleField& field, bool shared_field) {
    p.validate();
    VertexMask mask(g.vertex_count(), B);
    std::vector<Vertex> good;
    for (Vertex x : B) {
        const ParticleField f = shared_field ? field : field.child(x);
        if (is_good(g, B, mask, x, p, f)) good.push_back(x);
    }
    return good;
}

// ---------------------------------------------------------------------------
// EP(0)

EPSample ep_exploration_sample(const Graph& g, int radius, const FrogParams& p, std::uint64_t seed,
                               int max_generations, std::int64_t budget) {
    p.validate();
    if (radius < 0) throw ValidationError("EP radius must be >= 0");
    EPSample out;
    std::vector<Vertex> parents{g.origin()};
    out.generations.push_back(1);
    out.jump_generations.push_back(1);
    std::vector<Vertex> range;
    for (int gen = 0; gen < max_generations && !parents.empty(); ++gen) {
        std::vector<Vertex> children;
        std::int64_t z = 0;
        std::int64_t jumps = 0;
        for (std::size_t j = 0; j < parents.size(); ++j) {
            const Vertex v = parents[j];
            std::vector<Vertex> S = ball(g, v, radius);
            for (Vertex s : S) {
                if (g.is_boundary(s)) {
                    out.truncated = true;
                    return out;
                }
            }
            ParticleField field(seed, derive_key(static_cast<std::uint64_t>(gen), {j, 0x6570ULL}));
            RestrictedActivation ra = restricted_activation(g, S, p, field, v, false, true);
            for (const Trajectory& tr : ra.exiting) {
                range = tr.jumps;
                std::sort(range.begin(), range.end());
                range.erase(std::unique(range.begin(), range.end()), range.end());
                range.erase(std::remove(range.begin(), range.end(), tr.start), range.end());
                z += static_cast<std::int64_t>(range.size());
                jumps += static_cast<std::int64_t>(tr.jump_count());
                children.insert(children.end(), range.begin(), range.end());
            }
            if (static_cast<std::int64_t>(children.size()) > budget) {
                out.generations.push_back(z);
                out.jump_generations.push_back(jumps);
                out.budget_hit = true;
                return out;
            }
        }
        out.generations.push_back(z);
        out.jump_generations.push_back(jumps);
        parents.swap(children);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shell profile and conditional jumps

SphereProfile sphere_activation_profile(const Graph& g, std::span<const Vertex> S, const FrogParams& p,
                                        int replicas, std::uint64_t seed) {
    p.validate();
    if (replicas < 1) throw ValidationError("replicas must be >= 1");
    auto dist = distance_to_complement(g, S);
    int maxd = 0;
    for (int d : dist) maxd = std::max(maxd, d);
    std::unordered_map<Vertex, int> shell;
    for (std::size_t i = 0; i < S.size(); ++i) shell.emplace(S[i], dist[i]);
    SphereProfile prof;
    prof.shell_sizes.assign(static_cast<std::size_t>(maxd) + 1, 0);
    for (int d : dist) {
        if (d >= 0) ++prof.shell_sizes[static_cast<std::size_t>(d)];
    }
    const std::size_t width = static_cast<std::size_t>(maxd) + 1;
    auto rows = parallel_map<std::vector<double>>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        ParticleField field(seed, derive_key(hash_name("sphere_profile"), {r}));
        RestrictedActivation ra = restricted_activation(g, S, p, field, g.origin());
        std::vector<double> counts(width, 0.0);
        for (Vertex x : ra.reached()) {
            const int d = shell.at(x);
            if (d >= 0) counts[static_cast<std::size_t>(d)] += 1.0;
        }
        return counts;
    });
    prof.shells.resize(width);
    for (std::size_t d = 0; d < width; ++d) {
        std::vector<double> col;
        col.reserve(rows.size());
        for (const auto& row : rows) col.push_back(row[d]);
        prof.shells[d] = estimate_from(col, seed, "mc-shell");
    }
    return prof;
}

ConditionalJumps exit_conditional_jumps(const Graph& g, std::span<const Vertex> S, Vertex x, double t,
                                        int replicas, std::uint64_t seed) {
    if (replicas < 1) throw ValidationError("replicas must be >= 1");
    if (!(t >= 0.0)) throw ValidationError("t must be >= 0");
    std::vector<std::uint8_t> in(g.vertex_count(), 0);
    for (Vertex v : S) in.at(v) = 1;
    if (!in.at(x)) throw ValidationError("exit_conditional_jumps: x not in S");
    struct One {
        double exited = 0.0;
        double jumps = 0.0;
    };
    auto rows = parallel_map<One>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        Stream s(seed, {hash_name("cond_jumps"), r});
        One o;
        Vertex pos = x;
        double clock = 0.0;
        bool exited = false;
        for (;;) {
            clock += s.exponential();
            if (clock > t) break;
            o.jumps += 1.0;
            const double u = s.uniform();
            // after absorption the clock keeps ticking but the walker stays put
            if (!g.is_boundary(pos)) pos = g.sample_neighbor(pos, u);
            if (!in[pos]) exited = true;
        }
        o.exited = exited ? 1.0 : 0.0;
        return o;
    });
    ConditionalJumps cj;
    std::vector<double> exits, accepted;
    for (const auto& o : rows) {
        exits.push_back(o.exited);
        if (o.exited > 0.0) accepted.push_back(o.jumps);
    }
    cj.exit_frequency = estimate_from(exits, seed, "mc-exit");
    cj.accepted = static_cast<std::int64_t>(accepted.size());
    cj.conditional_mean = estimate_from(accepted, seed, "mc-conditional-jumps");
    auto dist = distance_to_complement(g, S);
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (S[i] == x) cj.distance = dist[i];
    }
    const double delta = static_cast<double>(g.max_out_degree());
    cj.bound = std::pow(delta, cj.distance) * (t + cj.distance);
    return cj;
}

double exit_jumps_exact(const Graph& g, std::span<const Vertex> S, Vertex x, double t, double tol) {
    if (!(t >= 0.0)) throw ValidationError("t must be >= 0");
    if (t == 0.0) return 0.0;
    std::unordered_map<Vertex, std::uint32_t> pos;
    std::vector<Vertex> dom;
    for (Vertex v : S) {
        if (pos.emplace(v, static_cast<std::uint32_t>(dom.size())).second) dom.push_back(v);
    }
    auto xi = pos.find(x);
    if (xi == pos.end()) throw ValidationError("exit_jumps_exact: x not in S");
    const std::size_t n = dom.size();
    std::vector<std::size_t> off(n + 1, 0);
    std::vector<std::uint32_t> tgt;
    std::vector<double> prob;
    for (std::size_t i = 0; i < n; ++i) {
        auto nb = g.out_neighbors(dom[i]);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            auto it = pos.find(nb[k]);
            if (it == pos.end()) continue;
            tgt.push_back(it->second);
            prob.push_back(g.transition(dom[i], k));
        }
        off[i + 1] = tgt.size();
    }
    // sum_{k>K} k p_k = t P(Po >= K), so certify the plain tail at tol / t
    PoissonSeries ps = poisson_series(t, tol / std::max(1.0, t));
    const std::size_t K = ps.pmf.size();
    std::vector<double> pmf = ps.pmf;
    pmf.push_back(pmf.back() * t / static_cast<double>(K));
    std::vector<double> v(n, 1.0), w(n, 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        acc += static_cast<double>(k) * pmf[k] * (1.0 - v[xi->second]);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t e = off[i]; e < off[i + 1]; ++e) s += prob[e] * v[tgt[e]];
            w[i] = s;
        }
        v.swap(w);
    }
    return acc;
}

}  // namespace frogsim
