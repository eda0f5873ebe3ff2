#include "frogsim/walks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "frogsim/errors.hpp"
#include "frogsim/stamp_set.hpp"

namespace frogsim {

std::vector<Vertex> Trajectory::path() const {
    std::vector<Vertex> p;
    p.reserve(jumps.size() + 1);
    p.push_back(start);
    p.insert(p.end(), jumps.begin(), jumps.end());
    return p;
}

int sample_jump_count(double t, Stream& rng) {
    if (!(t >= 0.0)) throw ValidationError("lifespan must be >= 0");
    int n = 0;
    double clock = rng.exponential();
    while (clock <= t) {
        ++n;
        clock += rng.exponential();
    }
    return n;
}

Trajectory sample_trajectory(const Graph& g, Vertex x, double t, Stream& rng) {
    if (x >= g.vertex_count()) throw ValidationError("vertex out of range");
    if (!(t >= 0.0)) throw ValidationError("lifespan must be >= 0");
    Trajectory tr;
    tr.start = x;
    tr.lifespan = t;
    WalkCursor c = run_walk(g, x, t, Stream(rng()), [&](Vertex v) {
        tr.jumps.push_back(v);
        return true;
    });
    tr.hit_boundary = c.hit_boundary();
    tr.killed = c.killed();
    return tr;
}

// ---------------------------------------------------------------------------
// Poisson weights

namespace {

int default_max_terms(double t) { return static_cast<int>(20.0 * t) + 200; }

std::vector<double> poisson_pmf(double t, int upto) {
    std::vector<double> p(static_cast<std::size_t>(upto) + 1, 0.0);
    if (t == 0.0) {
        p[0] = 1.0;
        return p;
    }
    double lp = -t;
    const double lt = std::log(t);
    for (int k = 0; k <= upto; ++k) {
        if (k > 0) lp += lt - std::log(static_cast<double>(k));
        p[static_cast<std::size_t>(k)] = std::exp(lp);
    }
    return p;
}

double log_pmf(double t, int k) { return -t + k * std::log(t) - std::lgamma(k + 1.0); }

/// Smallest K whose omitted mass is certified below tol.
/// order 0: sum_{k>K} Poi(k);  order 1: sum_{k>K} P(Po >= k+1).
int certified_terms(double t, double tol, int max_terms, int order, double& bound) {
    if (t == 0.0) {
        bound = 0.0;
        return 0;
    }
    for (int K = 0; K <= max_terms; ++K) {
        const double q = t / (K + 2.0 + order);
        if (q >= 1.0) continue;
        const double p = std::exp(log_pmf(t, K + 1 + order));
        const double b = order == 0 ? p / (1.0 - q) : p / ((1.0 - q) * (1.0 - q));
        if (b < tol) {
            bound = b;
            return K;
        }
    }
    throw TruncationError("uniformization series needs more than " + std::to_string(max_terms) +
                          " terms for t=" + std::to_string(t));
}

void check_series_args(double t, double tol) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("t must be finite and >= 0");
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
}

/// Ball around x in BFS order with a local transition table. Edges leaving the
/// ball are dropped, which is harmless as long as the ball radius is at least
/// the number of steps propagated.
struct LocalBall {
    std::vector<Vertex> verts;
    std::vector<std::size_t> level_end;  // level_end[d] = #vertices at distance <= d
    std::vector<std::size_t> off;
    std::vector<std::uint32_t> tgt;
    std::vector<double> prob;
    std::vector<std::uint8_t> boundary;
    std::unordered_map<Vertex, std::uint32_t> index;

    LocalBall(const Graph& g, Vertex x, int radius) {
        verts = ball(g, x, radius);
        index.reserve(verts.size() * 2);
        for (std::size_t i = 0; i < verts.size(); ++i) index.emplace(verts[i], static_cast<std::uint32_t>(i));
        // recover levels from BFS order
        std::vector<int> dist(verts.size(), 0);
        off.assign(verts.size() + 1, 0);
        boundary.assign(verts.size(), 0);
        for (std::size_t i = 0; i < verts.size(); ++i) {
            const Vertex v = verts[i];
            boundary[i] = g.is_boundary(v) ? 1 : 0;
            auto nb = g.out_neighbors(v);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                auto it = index.find(nb[k]);
                if (it == index.end()) continue;
                if (it->second > i && dist[it->second] == 0 && it->second != 0) dist[it->second] = dist[i] + 1;
                tgt.push_back(it->second);
                prob.push_back(g.transition(v, k));
            }
            off[i + 1] = tgt.size();
        }
        int maxd = 0;
        for (int d : dist) maxd = std::max(maxd, d);
        level_end.assign(static_cast<std::size_t>(maxd) + 1, 0);
        for (int d : dist) ++level_end[static_cast<std::size_t>(d)];
        for (std::size_t d = 1; d < level_end.size(); ++d) level_end[d] += level_end[d - 1];
    }

    std::size_t reach(int k) const {
        if (k < 0) return 0;
        return level_end[std::min<std::size_t>(static_cast<std::size_t>(k), level_end.size() - 1)];
    }

    long long find(Vertex v) const {
        auto it = index.find(v);
        return it == index.end() ? -1 : static_cast<long long>(it->second);
    }
};

/// Forward propagation of delta_x P^k with the boundary absorbing, optionally
/// killing at `kill`. visit(k, mu, absorbed_by_k) is called for k = 0..K.
template <class Visit>
void propagate(const LocalBall& lb, int K, long long kill, Visit&& visit) {
    std::vector<double> cur(lb.verts.size(), 0.0), nxt(lb.verts.size(), 0.0);
    double absorbed = 0.0;
    cur[0] = kill == 0 ? 0.0 : 1.0;
    if (lb.boundary[0]) absorbed += cur[0];
    visit(0, cur, absorbed);
    for (int k = 1; k <= K; ++k) {
        const std::size_t live = lb.reach(k - 1);
        const std::size_t out = lb.reach(k);
        std::fill(nxt.begin(), nxt.begin() + static_cast<std::ptrdiff_t>(out), 0.0);
        for (std::size_t i = 0; i < live; ++i) {
            const double m = cur[i];
            if (m == 0.0 || lb.boundary[i]) continue;
            for (std::size_t e = lb.off[i]; e < lb.off[i + 1]; ++e) nxt[lb.tgt[e]] += m * lb.prob[e];
        }
        if (kill >= 0) nxt[static_cast<std::size_t>(kill)] = 0.0;
        // boundary rows never propagate, so any boundary mass in nxt arrived this step
        for (std::size_t i = 0; i < out; ++i) {
            if (lb.boundary[i]) absorbed += nxt[i];
        }
        cur.swap(nxt);
        visit(k, cur, absorbed);
    }
}

}  // namespace

PoissonSeries poisson_series(double t, double tol, int max_terms) {
    check_series_args(t, tol);
    if (max_terms < 0) max_terms = default_max_terms(t);
    PoissonSeries s;
    const int K = certified_terms(t, tol, max_terms, 0, s.tail_bound);
    s.pmf = poisson_pmf(t, K);
    return s;
}

double KilledWalkTable::at(Vertex x) const {
    auto it = std::find(domain.begin(), domain.end(), x);
    if (it == domain.end()) throw ValidationError("vertex not in the killed-walk domain");
    return exit_prob[static_cast<std::size_t>(it - domain.begin())];
}

KilledWalkTable exit_probability_exact(const Graph& g, std::span<const Vertex> S, double t, double tol,
                                       int max_terms) {
    check_series_args(t, tol);
    if (S.empty()) throw ValidationError("exit_probability_exact: S is empty");
    std::unordered_map<Vertex, std::uint32_t> pos;
    pos.reserve(S.size() * 2);
    KilledWalkTable tab;
    for (Vertex v : S) {
        if (v >= g.vertex_count()) throw ValidationError("vertex out of range");
        if (g.is_boundary(v)) throw ValidationError("exit_probability_exact: S touches the truncation boundary");
        if (pos.emplace(v, static_cast<std::uint32_t>(tab.domain.size())).second) tab.domain.push_back(v);
    }
    const std::size_t n = tab.domain.size();
    std::vector<std::size_t> off(n + 1, 0);
    std::vector<std::uint32_t> tgt;
    std::vector<double> prob;
    for (std::size_t i = 0; i < n; ++i) {
        auto nb = g.out_neighbors(tab.domain[i]);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            auto it = pos.find(nb[k]);
            if (it == pos.end()) continue;  // exit mass is killed
            tgt.push_back(it->second);
            prob.push_back(g.transition(tab.domain[i], k));
        }
        off[i + 1] = tgt.size();
    }
    PoissonSeries ps = poisson_series(t, tol, max_terms);
    std::vector<double> v(n, 1.0), w(n, 0.0), stay(n, 0.0);
    for (std::size_t k = 0; k < ps.pmf.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) stay[i] += ps.pmf[k] * v[i];
        if (k + 1 == ps.pmf.size()) break;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t e = off[i]; e < off[i + 1]; ++e) s += prob[e] * v[tgt[e]];
            w[i] = s;
        }
        v.swap(w);
    }
    tab.horizon = t;
    tab.terms = static_cast<int>(ps.pmf.size());
    tab.truncation_error = ps.tail_bound;
    tab.exit_prob.resize(n);
    for (std::size_t i = 0; i < n; ++i) tab.exit_prob[i] = std::clamp(1.0 - stay[i], 0.0, 1.0);
    return tab;
}

ExactValue hitting_probability_exact(const Graph& g, Vertex x, Vertex y, double t, double tol) {
    check_series_args(t, tol);
    if (x >= g.vertex_count() || y >= g.vertex_count()) throw ValidationError("vertex out of range");
    ExactValue r;
    if (x == y) {
        r.value = 1.0;
        return r;
    }
    if (t == 0.0) return r;
    PoissonSeries ps = poisson_series(t, tol);
    const int K = static_cast<int>(ps.pmf.size()) - 1;
    LocalBall lb(g, x, K);
    const long long ky = lb.find(y);
    if (ky < 0) {
        // y is further than K jumps away
        r.truncation_error = ps.tail_bound;
        return r;
    }
    double not_hit = 0.0;
    propagate(lb, K, ky, [&](int k, const std::vector<double>& mu, double absorbed) {
        double s = 0.0;
        for (std::size_t i = 0; i < lb.reach(k); ++i) s += mu[i];
        // absorbed walkers sit on the boundary and are part of mu only at arrival
        double sitting = 0.0;
        for (std::size_t i = 0; i < lb.reach(k); ++i) {
            if (lb.boundary[i]) sitting += mu[i];
        }
        not_hit += ps.pmf[static_cast<std::size_t>(k)] * (s - sitting + absorbed);
        r.leakage += ps.pmf[static_cast<std::size_t>(k)] * absorbed;
    });
    r.value = std::clamp(1.0 - not_hit, 0.0, 1.0);
    r.truncation_error = ps.tail_bound;
    return r;
}

HeatKernelRow heat_kernel_row(const Graph& g, Vertex x, double t, double tol) {
    check_series_args(t, tol);
    if (x >= g.vertex_count()) throw ValidationError("vertex out of range");
    PoissonSeries ps = poisson_series(t, tol);
    const int K = static_cast<int>(ps.pmf.size()) - 1;
    LocalBall lb(g, x, K);
    std::vector<double> acc(lb.verts.size(), 0.0);
    HeatKernelRow row;
    propagate(lb, K, -1, [&](int k, const std::vector<double>& mu, double absorbed) {
        const double w = ps.pmf[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < lb.reach(k); ++i) {
            if (!lb.boundary[i]) acc[i] += w * mu[i];
        }
        row.leakage += w * absorbed;
    });
    for (std::size_t i = 0; i < lb.verts.size(); ++i) {
        if (acc[i] > 0.0) {
            row.vertices.push_back(lb.verts[i]);
            row.values.push_back(acc[i]);
        }
    }
    row.truncation_error = ps.tail_bound;
    return row;
}

double HeatKernelRow::sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

ExactValue heat_kernel_exact(const Graph& g, Vertex x, Vertex y, double t, double tol) {
    check_series_args(t, tol);
    if (x >= g.vertex_count() || y >= g.vertex_count()) throw ValidationError("vertex out of range");
    ExactValue r;
    if (t == 0.0) {
        r.value = x == y ? 1.0 : 0.0;
        return r;
    }
    PoissonSeries ps = poisson_series(t, tol);
    const int K = static_cast<int>(ps.pmf.size()) - 1;
    LocalBall lb(g, x, K);
    const long long ky = lb.find(y);
    propagate(lb, K, -1, [&](int k, const std::vector<double>& mu, double absorbed) {
        const double w = ps.pmf[static_cast<std::size_t>(k)];
        if (ky >= 0 && !lb.boundary[static_cast<std::size_t>(ky)]) r.value += w * mu[static_cast<std::size_t>(ky)];
        r.leakage += w * absorbed;
    });
    r.truncation_error = ps.tail_bound;
    if (r.leakage > tol) {
        throw TruncationError("heat kernel: boundary leakage " + std::to_string(r.leakage) + " exceeds tol");
    }
    return r;
}

ExactValue truncated_green(const Graph& g, Vertex x, Vertex y, double t, double tol) {
    check_series_args(t, tol);
    if (x >= g.vertex_count() || y >= g.vertex_count()) throw ValidationError("vertex out of range");
    ExactValue r;
    if (t == 0.0) return r;
    double bound = 0.0;
    const int K = certified_terms(t, tol, default_max_terms(t), 1, bound);
    // upper tails P(Po(t) >= k + 1), summed from the far end for accuracy
    double tail0 = 0.0;
    const int M = certified_terms(t, tol * 1e-6, default_max_terms(t) + 200, 0, tail0);
    const int top = std::max(M, K + 1);
    std::vector<double> pmf = poisson_pmf(t, top);
    std::vector<double> upper(static_cast<std::size_t>(top) + 2, 0.0);
    upper[static_cast<std::size_t>(top) + 1] = tail0;
    for (int k = top; k >= 0; --k) upper[static_cast<std::size_t>(k)] = upper[static_cast<std::size_t>(k) + 1] + pmf[static_cast<std::size_t>(k)];
    LocalBall lb(g, x, K);
    const long long ky = lb.find(y);
    propagate(lb, K, -1, [&](int k, const std::vector<double>& mu, double absorbed) {
        const double w = upper[static_cast<std::size_t>(k) + 1];
        if (ky >= 0 && !lb.boundary[static_cast<std::size_t>(ky)]) r.value += w * mu[static_cast<std::size_t>(ky)];
        r.leakage += w * absorbed;
    });
    r.truncation_error = bound;
    if (r.leakage > tol) {
        throw TruncationError("green function: boundary leakage " + std::to_string(r.leakage) + " exceeds tol");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo

Estimate exit_frequency_mc(const Graph& g, std::span<const Vertex> S, Vertex x, double t, int replicas,
                           std::uint64_t seed) {
    if (replicas < 1) throw ValidationError("replicas must be >= 1");
    std::vector<std::uint8_t> in(g.vertex_count(), 0);
    for (Vertex v : S) in.at(v) = 1;
    if (!in.at(x)) throw ValidationError("exit_frequency_mc: x not in S");
    auto hits = parallel_map<double>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        bool exited = false;
        run_walk(g, x, t, Stream(seed, {hash_name("exit_mc"), r}), [&](Vertex v) {
            exited = !in[v];
            return !exited;
        });
        return exited ? 1.0 : 0.0;
    });
    return estimate_from(hits, seed, "mc-exit");
}

RangeStats range_statistics(const Graph& g, Vertex x, double t, std::span<const Vertex> B,
                            std::span<const Vertex> H, double alpha, int replicas, std::uint64_t seed) {
    if (replicas < 1) throw ValidationError("replicas must be >= 1");
    if (x >= g.vertex_count()) throw ValidationError("vertex out of range");
    std::vector<std::uint8_t> region(g.vertex_count(), B.empty() ? 1 : 0);
    for (Vertex v : B) region.at(v) = 1;
    for (Vertex v : H) region.at(v) = 0;
    struct One {
        double size = 0, in_region = 0, small = 0, boundary = 0;
    };
    auto rows = parallel_map<One>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        StampSet& seen = scratch_set(g.vertex_count(), 1);
        One o;
        auto add = [&](Vertex v) {
            if (seen.insert(v)) {
                o.size += 1;
                o.in_region += region[v];
            }
            return true;
        };
        add(x);
        WalkCursor c = run_walk(g, x, t, Stream(seed, {hash_name("range"), r}), add);
        o.small = o.size <= alpha * t ? 1.0 : 0.0;
        o.boundary = (c.hit_boundary() || c.killed()) ? 1.0 : 0.0;
        return o;
    });
    std::vector<double> a, b, c;
    double bd = 0.0;
    for (const auto& o : rows) {
        a.push_back(o.size);
        b.push_back(o.in_region);
        c.push_back(o.small);
        bd += o.boundary;
    }
    RangeStats s;
    s.range = estimate_from(a, seed, "mc-range");
    s.range_in_region = estimate_from(b, seed, "mc-range-region");
    s.small_range = estimate_from(c, seed, "mc-small-range");
    s.boundary_fraction = bd / replicas;
    return s;
}

double SelfIntersection::bound(double rho) const {
    const double rm = std::pow(rho, m);
    return t * rm / (2.0 * m * (1.0 - rm));
}

SelfIntersection self_intersection_profile(const Graph& g, Vertex x, double t, int m, int replicas,
                                           std::uint64_t seed) {
    if (m < 1) throw ValidationError("m must be >= 1");
    if (replicas < 1) throw ValidationError("replicas must be >= 1");
    if (!(t >= 0.0)) throw ValidationError("t must be >= 0");
    SelfIntersection out;
    out.t = t;
    out.m = m;
    out.terms = static_cast<int>(std::floor(t / (2.0 * m)));
    const int L = out.terms;
    auto counts = parallel_map<double>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        if (L < 2) return 0.0;
        Stream s(seed, {hash_name("self_intersection"), r});
        std::vector<Vertex> ys{x};
        Vertex pos = x;
        bool absorbed = false;
        for (int i = 1; i < L && !absorbed; ++i) {
            for (int j = 0; j < m; ++j) {
                pos = g.sample_neighbor(pos, s.uniform());
                if (g.is_boundary(pos)) {
                    absorbed = true;
                    break;
                }
            }
            if (!absorbed) ys.push_back(pos);
        }
        std::sort(ys.begin(), ys.end());
        double pairs = 0.0;
        for (std::size_t i = 0; i < ys.size();) {
            std::size_t j = i;
            while (j < ys.size() && ys[j] == ys[i]) ++j;
            const double c = static_cast<double>(j - i);
            pairs += c * (c - 1.0) / 2.0;
            i = j;
        }
        return pairs;
    });
    out.count = estimate_from(counts, seed, "mc-self-intersection");
    return out;
}

}  // namespace frogsim
