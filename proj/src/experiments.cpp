#include "frogsim/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "frogsim/errors.hpp"
#include "frogsim/estimators.hpp"
#include "frogsim/stamp_set.hpp"
#include "frogsim/walks.hpp"

namespace frogsim {

// ---------------------------------------------------------------------------
// Reports

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool ExperimentReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const MetricRow* ExperimentReport::find(const std::string& metric) const {
    for (const auto& m : metrics) {
        if (m.metric == metric) return &m;
    }
    return nullptr;
}

const Check* ExperimentReport::find_check(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

void ExperimentReport::add(std::string metric, const GraphSpec& g, double lambda, double t, int n, Estimate e) {
    metrics.push_back(MetricRow{std::move(metric), g.describe(), lambda, t, n, std::move(e)});
}

void ExperimentReport::check(std::string check_name, bool pass, std::string detail) {
    checks.push_back(Check{std::move(check_name), pass, std::move(detail)});
}

const char* ExperimentReport::csv_header() { return "experiment,graph,lambda,t,n,replicas,seed,metric,mean,stderr"; }

std::string ExperimentReport::csv_rows() const {
    std::string out;
    for (const auto& m : metrics) {
        out += name;
        out += ',';
        out += m.graph;
        out += ',';
        out += format_number(m.lambda);
        out += ',';
        out += format_number(m.t);
        out += ',';
        out += std::to_string(m.n);
        out += ',';
        out += std::to_string(m.value.replicas);
        out += ',';
        out += std::to_string(seed);
        out += ',';
        out += m.metric;
        out += ',';
        out += format_number(m.value.mean);
        out += ',';
        out += format_number(m.value.stderr());
        out += '\n';
    }
    return out;
}

std::string ExperimentReport::json() const {
    using nlohmann::ordered_json;
    ordered_json j;
    j["name"] = name;
    j["seed"] = seed;
    ordered_json in = ordered_json::object();
    for (const auto& [k, v] : inputs) in[k] = v;
    j["inputs"] = in;
    ordered_json ms = ordered_json::array();
    for (const auto& m : metrics) {
        ordered_json row;
        row["metric"] = m.metric;
        row["graph"] = m.graph;
        row["lambda"] = m.lambda;
        row["t"] = m.t;
        row["n"] = m.n;
        row["mean"] = format_number(m.value.mean);
        row["stderr"] = format_number(m.value.stderr());
        row["replicas"] = m.value.replicas;
        row["seed"] = m.value.seed;
        row["method"] = m.value.method;
        ms.push_back(row);
    }
    j["metrics"] = ms;
    ordered_json cs = ordered_json::array();
    for (const auto& c : checks) cs.push_back(ordered_json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    j["checks"] = cs;
    j["notes"] = notes;
    j["passed"] = passed();
    return j.dump(2) + "\n";
}

namespace {

Estimate exact_value(double v, std::string method) {
    Estimate e;
    e.mean = v;
    e.replicas = 1;
    e.method = std::move(method);
    return e;
}

double slope_of(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) return 0.0;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxx == 0.0 ? 0.0 : sxy / sxx;
}

void require_undirected(const Graph& g, const char* what) {
    if (g.directed()) throw ValidationError(std::string(what) + " requires an undirected graph");
}

}  // namespace

// ---------------------------------------------------------------------------
// Edge coupling

ExperimentReport bernoulli_edge_coupling(const Graph& g, const FrogParams& p, int replicas, std::uint64_t seed,
                                         int correlation_pairs) {
    p.validate();
    require_undirected(g, "bernoulli_edge_coupling");
    if (replicas < 2) throw ValidationError("edge coupling needs at least 2 replicas");
    const std::size_t Delta = g.max_out_degree();
    const std::size_t nv = g.vertex_count();

    std::vector<std::pair<Vertex, Vertex>> rated;
    for (Vertex x = 0; x < nv; ++x) {
        if (g.is_boundary(x) || g.out_degree(x) != Delta) continue;
        for (Vertex y : g.out_neighbors(x)) {
            if (x < y && !g.is_boundary(y) && g.out_degree(y) == Delta) rated.emplace_back(x, y);
        }
    }
    if (rated.empty()) throw ValidationError("no interior edge with both endpoints of maximal degree");
    std::vector<std::size_t> paired;
    {
        std::vector<std::uint8_t> used(nv, 0);
        for (std::size_t e = 0; e < rated.size() && paired.size() < 2 * static_cast<std::size_t>(correlation_pairs); ++e) {
            auto [x, y] = rated[e];
            if (used[x] || used[y]) continue;
            // keep pairs apart so they do not share a neighborhood either
            for (Vertex z : g.out_neighbors(x)) used[z] = 1;
            for (Vertex z : g.out_neighbors(y)) used[z] = 1;
            used[x] = used[y] = 1;
            paired.push_back(e);
        }
        if (paired.size() % 2) paired.pop_back();
    }

    struct Row {
        std::int64_t open = 0;
        std::vector<std::uint8_t> pair_bits;
        int inclusion = -1;  // -1 not checkable, 0 violated, 1 ok
        std::size_t open_cluster = 0;
    };
    auto rows = parallel_map<Row>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        ParticleField field(seed, derive_key(hash_name("edge_coupling"), {r}));
        // first-jump targets per vertex
        std::vector<std::vector<Vertex>> first(nv);
        for (Vertex x = 0; x < nv; ++x) {
            if (g.is_boundary(x)) continue;
            const int eta = p.lambda > 0.0 ? field.count(x, p.lambda) : 0;
            for (int i = 0; i < eta; ++i) {
                WalkCursor c(x, field.particle_stream(x, i));
                if (c.step(g, p.t)) first[x].push_back(c.position());
            }
        }
        auto half = [&](Vertex x, Vertex y) {
            return std::find(first[x].begin(), first[x].end(), y) != first[x].end();
        };
        auto open = [&](Vertex x, Vertex y) { return half(x, y) && half(y, x); };
        Row row;
        std::vector<std::uint8_t> is_open(rated.size(), 0);
        for (std::size_t e = 0; e < rated.size(); ++e) {
            is_open[e] = open(rated[e].first, rated[e].second);
            row.open += is_open[e];
        }
        for (std::size_t e : paired) row.pair_bits.push_back(is_open[e]);

        // open cluster of the origin versus the frog cluster on the same field
        std::vector<Vertex> queue{g.origin()};
        std::vector<std::uint8_t> seen(nv, 0);
        seen[g.origin()] = 1;
        for (std::size_t h = 0; h < queue.size(); ++h) {
            const Vertex x = queue[h];
            for (Vertex y : g.out_neighbors(x)) {
                if (!seen[y] && open(x, y)) {
                    seen[y] = 1;
                    queue.push_back(y);
                }
            }
        }
        row.open_cluster = queue.size();
        StopRule stop;
        stop.particle_budget = 2'000'000;
        Cluster c = explore_cluster(g, p, field, stop);
        if (c.stop_reason == StopReason::exhausted) {
            StampSet& act = scratch_set(nv, 3);
            act.clear();
            for (Vertex v : c.activation_order) act.insert(v);
            row.inclusion = 1;
            for (Vertex v : queue) {
                if (!act.contains(v)) row.inclusion = 0;
            }
        }
        return row;
    });

    ExperimentReport rep;
    rep.name = "edge_coupling";
    rep.seed = seed;
    rep.inputs = {{"graph", g.spec().describe()},
                  {"lambda", format_number(p.lambda)},
                  {"t", format_number(p.t)},
                  {"replicas", std::to_string(replicas)},
                  {"Delta", std::to_string(Delta)}};
    std::int64_t open = 0;
    for (const Row& row : rows) open += row.open;
    const std::int64_t trials = static_cast<std::int64_t>(rated.size()) * replicas;
    Estimate rate = proportion(open, trials, seed, "mc-edge-open");
    const double target = std::pow(-std::expm1(-p.lambda * (-std::expm1(-p.t)) / static_cast<double>(Delta)), 2.0);
    rep.add("edge_open_rate", g.spec(), p.lambda, p.t, 0, rate);
    rep.add("edge_open_closed_form", g.spec(), p.lambda, p.t, 0, exact_value(target, "closed-form"));
    rep.check("edge_rate_within_3se", rate.within(target),
              "rate " + format_number(rate.mean) + " vs " + format_number(target) + " (se " +
                  format_number(rate.stderr()) + ", " + std::to_string(trials) + " trials)");

    // pairwise correlation of disjoint edges
    const std::size_t npairs = paired.size() / 2;
    if (npairs > 0) {
        double sum_r = 0.0;
        double max_abs = 0.0;
        for (std::size_t k = 0; k < npairs; ++k) {
            double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
            for (const Row& row : rows) {
                const double a = row.pair_bits[2 * k], b = row.pair_bits[2 * k + 1];
                sa += a;
                sb += b;
                sab += a * b;
                saa += a * a;
                sbb += b * b;
            }
            const double n = replicas;
            const double cov = sab / n - (sa / n) * (sb / n);
            const double va = saa / n - (sa / n) * (sa / n);
            const double vb = sbb / n - (sb / n) * (sb / n);
            const double r = (va > 0 && vb > 0) ? cov / std::sqrt(va * vb) : 0.0;
            sum_r += r;
            max_abs = std::max(max_abs, std::abs(r));
        }
        Estimate corr;
        corr.mean = sum_r / static_cast<double>(npairs);
        corr.stderr_ = 1.0 / std::sqrt(static_cast<double>(npairs) * replicas);
        corr.replicas = replicas;
        corr.seed = seed;
        corr.method = "mean pearson over disjoint pairs";
        rep.add("edge_pair_correlation", g.spec(), p.lambda, p.t, static_cast<int>(npairs), corr);
        rep.check("edge_independence", std::abs(corr.mean) <= 3.0 * corr.stderr(),
                  "mean correlation " + format_number(corr.mean) + " over " + std::to_string(npairs) +
                      " pairs, max |r| " + format_number(max_abs));
    }

    std::int64_t checked = 0, violated = 0;
    std::vector<double> sizes;
    for (const Row& row : rows) {
        sizes.push_back(static_cast<double>(row.open_cluster));
        if (row.inclusion >= 0) {
            ++checked;
            if (row.inclusion == 0) ++violated;
        }
    }
    rep.add("open_cluster_size", g.spec(), p.lambda, p.t, 0, estimate_from(sizes, seed, "mc-open-cluster"));
    rep.check("open_cluster_inside_frog_cluster", violated == 0,
              std::to_string(checked) + " replicas checked, " + std::to_string(violated) + " violations");
    if (checked < replicas)
        rep.notes.push_back(std::to_string(replicas - checked) + " replicas hit the particle budget; inclusion not checked");
    return rep;
}

// ---------------------------------------------------------------------------
// Renormalization

int NetConfig::neighbor_distance() const { return static_cast<int>(std::floor(4.0 * beta * a + 1e-9)); }

int NetConfig::box_radius() const {
    if (halo > 0) return extent * a + neighbor_distance() + ball_radius() + halo;
    return extent * a + neighbor_distance() + ball_radius() + 3 * a;
}

namespace {

Vertex lattice_vertex(const Graph& box, int x, int y) {
    const int c[2] = {x, y};
    const long long v = box.find_coordinates(c);
    if (v < 0) throw ValidationError("net point outside the box");
    return static_cast<Vertex>(v);
}

std::vector<std::pair<int, int>> net_offsets(const NetConfig& net) {
    std::vector<std::pair<int, int>> out;
    const int D = net.neighbor_distance();
    const int m = D / net.a;
    for (int i = -m; i <= m; ++i) {
        for (int j = -m; j <= m; ++j) {
            if ((i || j) && net.a * (std::abs(i) + std::abs(j)) <= D) out.emplace_back(i, j);
        }
    }
    return out;
}

}  // namespace

OpenState net_vertex_state(const Graph& box, const NetConfig& net, Vertex center, double lambda,
                           const ParticleField& phase1, const ParticleField& phase2) {
    const double t = static_cast<double>(net.a) * net.a;
    const FrogParams half{lambda / 2.0, t};
    const auto cc = box.coordinates(center);
    const int cx = cc[0], cy = cc[1];
    const std::vector<Vertex> B = ball(box, center, net.ball_radius());
    VertexMask inB(box.vertex_count(), B);

    // conquest targets: the union of the neighboring balls
    std::vector<Vertex> targets;
    for (auto [i, j] : net_offsets(net)) {
        for (Vertex v : ball(box, lattice_vertex(box, cx + net.a * i, cy + net.a * j), net.ball_radius()))
            targets.push_back(v);
    }
    std::unordered_map<Vertex, std::size_t> tindex;
    for (std::size_t k = 0; k < targets.size(); ++k) tindex.emplace(targets[k], k);
    const std::size_t words = (targets.size() + 63) / 64;

    // phase 2: targets hit by the ranges of the particles at each vertex of B
    std::vector<std::vector<std::uint64_t>> hit(B.size(), std::vector<std::uint64_t>(words, 0));
    for (std::size_t b = 0; b < B.size(); ++b) {
        const Vertex y = B[b];
        const int eta = half.lambda > 0.0 ? phase2.count(y, half.lambda) : 0;
        auto mark = [&](Vertex v) {
            auto it = tindex.find(v);
            if (it != tindex.end()) hit[b][it->second / 64] |= std::uint64_t{1} << (it->second % 64);
        };
        for (int i = 0; i < eta; ++i) {
            mark(y);
            run_walk(box, y, t, phase2.particle_stream(y, i), [&](Vertex v) {
                mark(v);
                return true;
            });
        }
    }
    std::unordered_map<Vertex, std::size_t> bindex;
    for (std::size_t b = 0; b < B.size(); ++b) bindex.emplace(B[b], b);

    OpenState st;
    const double need = static_cast<double>(B.size()) / 4.0;
    for (Vertex x : B) {
        ExploreOptions opt;
        opt.start = x;
        opt.allowed = &inB;
        Cluster c = explore_cluster(box, half, phase1, StopRule{}, Schedule::fifo, Stream(0), opt);
        if (static_cast<double>(c.size()) < need) continue;
        ++st.good_count;
        if (st.open) continue;
        std::vector<std::uint64_t> cover(words, 0);
        for (Vertex v : c.activation_order) {
            const auto& h = hit[bindex.at(v)];
            for (std::size_t w = 0; w < words; ++w) cover[w] |= h[w];
        }
        bool full = true;
        for (std::size_t k = 0; k < targets.size() && full; ++k) {
            if (!(cover[k / 64] >> (k % 64) & 1)) full = false;
        }
        if (full) st.open = true;
    }
    return st;
}

NoGoodEstimate no_good_vertex_decay(const Graph& box, int a, double lambda, const std::vector<int>& sizes,
                                    int replicas, int direct_replicas, std::uint64_t seed) {
    if (sizes.empty()) throw ValidationError("no set sizes given");
    if (replicas < 1 || direct_replicas < 1) throw ValidationError("replicas must be >= 1");
    const FrogParams p{lambda, static_cast<double>(a) * a};
    p.validate();
    const std::vector<Vertex> B = ball(box, box.origin(), a);
    for (Vertex v : B) {
        if (box.is_boundary(v)) throw ValidationError("B_0(a) touches the box boundary");
    }
    const int kmax = *std::max_element(sizes.begin(), sizes.end());
    if (kmax > static_cast<int>(B.size()) || *std::min_element(sizes.begin(), sizes.end()) < 1)
        throw ValidationError("set sizes must lie in [1, |B_0(a)|]");
    VertexMask inB(box.vertex_count(), B);
    const double empty = std::exp(-lambda);

    struct Cand {
        double q = 1.0;
        double var = 0.0;
    };
    auto cands = parallel_map<Cand>(static_cast<std::size_t>(kmax), [&](std::size_t i) {
        const Vertex x = B[i];
        int accepted = 0, not_good = 0;
        for (int attempt = 0; accepted < replicas && attempt < 4 * replicas + 100; ++attempt) {
            ParticleField f(seed, derive_key(hash_name("no_good"), {x, static_cast<std::uint64_t>(attempt)}));
            if (lambda <= 0.0 || f.count(x, lambda) == 0) continue;
            ++accepted;
            if (!is_good(box, B, inB, x, p, f)) ++not_good;
        }
        Cand c;
        if (accepted == 0) return c;
        const double ph = static_cast<double>(not_good) / accepted;
        const double pv = (not_good + 1.0) / (accepted + 2.0);  // keeps the variance positive at 0 and 1
        c.q = empty + (1.0 - empty) * ph;
        c.var = (1.0 - empty) * (1.0 - empty) * pv * (1.0 - pv) / accepted;
        return c;
    });

    // direct estimate: one shared field, first good candidate in BFS order
    auto first_good = parallel_map<int>(static_cast<std::size_t>(direct_replicas), [&](std::size_t r) {
        ParticleField f(seed, derive_key(hash_name("no_good_direct"), {r}));
        for (int i = 0; i < kmax; ++i) {
            if (is_good(box, B, inB, B[static_cast<std::size_t>(i)], p, f)) return i;
        }
        return kmax;
    });

    NoGoodEstimate out;
    out.sizes = sizes;
    std::vector<double> xs, ys;
    for (int k : sizes) {
        double lp = 0.0, var = 0.0;
        for (int i = 0; i < k; ++i) {
            const Cand& c = cands[static_cast<std::size_t>(i)];
            lp += std::log(c.q);
            var += c.var / (c.q * c.q);
        }
        Estimate e;
        e.mean = lp;
        e.stderr_ = std::sqrt(var);
        e.replicas = replicas;
        e.seed = seed;
        e.method = "product of independent candidate estimates (log)";
        out.log_probability.push_back(e);
        std::int64_t none = 0;
        for (int fg : first_good) none += fg >= k;
        out.direct.push_back(proportion(none, direct_replicas, seed, "mc-shared-field"));
        xs.push_back(k);
        ys.push_back(lp);
    }
    out.slope = slope_of(xs, ys);
    return out;
}

ExperimentReport renormalization_experiment(const NetConfig& net, double lambda, const RenormalizationOptions& opt,
                                            std::uint64_t seed) {
    if (net.a < 3) throw ValidationError("net spacing a must be >= 3");
    if (!(net.beta > 0.0)) throw ValidationError("beta must be > 0");
    if (net.extent < 0) throw ValidationError("net extent must be >= 0");
    if (opt.replicas < 1) throw ValidationError("replicas must be >= 1");
    FrogParams{lambda, 0.0}.validate();

    ExperimentReport rep;
    rep.name = "renormalization";
    rep.seed = seed;
    const double t = static_cast<double>(net.a) * net.a;

    // open frequency of one configuration; returns per-replica open fractions and aux
    struct Run {
        std::vector<double> open_fraction, no_good, cluster;
        std::vector<std::vector<std::uint8_t>> states;
        GraphSpec spec;
        std::size_t net_size = 0;
    };
    auto run = [&](const NetConfig& cfg, int replicas, std::uint64_t tag) {
        Run out;
        out.spec = GraphSpec::lattice_box(2, cfg.box_radius());
        Graph box = build_graph(out.spec);
        std::vector<std::pair<int, int>> pts;
        for (int i = -cfg.extent; i <= cfg.extent; ++i)
            for (int j = -cfg.extent; j <= cfg.extent; ++j)
                if (std::abs(i) + std::abs(j) <= cfg.extent) pts.emplace_back(i, j);
        std::vector<Vertex> centers;
        for (auto [i, j] : pts) centers.push_back(lattice_vertex(box, cfg.a * i, cfg.a * j));
        out.net_size = centers.size();
        const auto offs = net_offsets(cfg);
        std::unordered_map<long long, std::size_t> at;
        for (std::size_t k = 0; k < pts.size(); ++k) at.emplace((long long)pts[k].first * 100003 + pts[k].second, k);
        std::size_t origin_index = at.at(0);

        struct Rep {
            std::vector<std::uint8_t> open;
            double no_good = 0.0;
            double cluster = 0.0;
        };
        auto reps = parallel_map<Rep>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
            ParticleField p1(seed, derive_key(tag, {r, 1}));
            ParticleField p2(seed, derive_key(tag, {r, 2}));
            Rep o;
            o.open.resize(centers.size());
            std::size_t none = 0;
            for (std::size_t k = 0; k < centers.size(); ++k) {
                OpenState st = net_vertex_state(box, cfg, centers[k], lambda, p1, p2);
                o.open[k] = st.open;
                none += st.good_count == 0;
            }
            o.no_good = static_cast<double>(none) / centers.size();
            // open cluster of the origin in the net graph
            if (o.open[origin_index]) {
                std::vector<std::size_t> q{origin_index};
                std::vector<std::uint8_t> seen(centers.size(), 0);
                seen[origin_index] = 1;
                for (std::size_t h = 0; h < q.size(); ++h) {
                    auto [i, j] = pts[q[h]];
                    for (auto [di, dj] : offs) {
                        auto it = at.find((long long)(i + di) * 100003 + (j + dj));
                        if (it == at.end() || seen[it->second] || !o.open[it->second]) continue;
                        seen[it->second] = 1;
                        q.push_back(it->second);
                    }
                }
                o.cluster = static_cast<double>(q.size());
            }
            return o;
        });
        for (const Rep& o : reps) {
            double s = 0.0;
            for (auto b : o.open) s += b;
            out.open_fraction.push_back(s / static_cast<double>(o.open.size()));
            out.no_good.push_back(o.no_good);
            out.cluster.push_back(o.cluster);
            out.states.push_back(o.open);
        }
        return out;
    };

    rep.inputs = {{"a", std::to_string(net.a)},
                  {"beta", format_number(net.beta)},
                  {"extent", std::to_string(net.extent)},
                  {"lambda", format_number(lambda)},
                  {"t", format_number(t)},
                  {"replicas", std::to_string(opt.replicas)}};

    Run main = run(net, opt.replicas, hash_name("renormalization"));
    rep.inputs.emplace_back("box", main.spec.describe());
    rep.inputs.emplace_back("net_vertices", std::to_string(main.net_size));
    rep.inputs.emplace_back("net_neighbors", std::to_string(net_offsets(net).size()));
    Estimate open = estimate_from(main.open_fraction, seed, "mc-open-fraction");
    rep.add("open_frequency", main.spec, lambda, t, net.a, open);
    // least open net vertex
    double min_freq = 1.0;
    for (std::size_t k = 0; k < main.net_size; ++k) {
        double s = 0.0;
        for (const auto& st : main.states) s += st[k];
        min_freq = std::min(min_freq, s / static_cast<double>(main.states.size()));
    }
    rep.add("open_frequency_min_vertex", main.spec, lambda, t, net.a, exact_value(min_freq, "min over net vertices"));
    rep.add("no_good_vertex_frequency", main.spec, lambda, t, net.a,
            estimate_from(main.no_good, seed, "mc-no-good-in-ball"));
    rep.add("origin_open_cluster", main.spec, lambda, t, net.a, estimate_from(main.cluster, seed, "mc-net-cluster"));
    rep.check("open_frequency_at_least_0.75", open.mean >= 0.75,
              "mean open frequency " + format_number(open.mean) + " (se " + format_number(open.stderr()) + ")");

    // beta diagnostics
    for (double b : {0.5, 1.0}) {
        if (b == net.beta) continue;
        NetConfig alt = net;
        alt.beta = b;
        alt.extent = std::min(net.extent, 1);
        const int reps = std::max(1, opt.replicas / 4);
        Run r = run(alt, reps, derive_key(hash_name("renormalization_beta"), {static_cast<std::uint64_t>(b * 100)}));
        rep.add("open_frequency_beta_" + format_number(b), r.spec, lambda, t, net.a,
                estimate_from(r.open_fraction, seed, "mc-open-fraction"));
    }
    if (opt.a_scan_replicas > 0) {
        for (int a : {8, 12, 16, 20, 24}) {
            NetConfig alt = net;
            alt.a = a;
            alt.extent = std::min(net.extent, 1);
            Run r = run(alt, opt.a_scan_replicas, derive_key(hash_name("renormalization_a"), {static_cast<std::uint64_t>(a)}));
            rep.add("open_frequency_a_scan", r.spec, lambda, static_cast<double>(a) * a, a,
                    estimate_from(r.open_fraction, seed, "mc-open-fraction"));
        }
    }

    // locality: resample every particle outside B_v(a/3) and recompute
    {
        Graph box = build_graph(main.spec);
        std::vector<Vertex> centers;
        for (int i = -net.extent; i <= net.extent; ++i)
            for (int j = -net.extent; j <= net.extent; ++j)
                if (std::abs(i) + std::abs(j) <= net.extent) centers.push_back(lattice_vertex(box, net.a * i, net.a * j));
        auto diffs = parallel_map<int>(static_cast<std::size_t>(opt.locality_replicas), [&](std::size_t r) {
            ParticleField p1(seed, derive_key(hash_name("locality"), {r, 1}));
            ParticleField p2(seed, derive_key(hash_name("locality"), {r, 2}));
            int bad = 0;
            for (Vertex c : centers) {
                auto keep = std::make_shared<VertexMask>(box.vertex_count(), ball(box, c, net.ball_radius()));
                const std::uint64_t alt = derive_key(seed, {hash_name("locality_alt"), r, c});
                OpenState a0 = net_vertex_state(box, net, c, lambda, p1, p2);
                OpenState a1 = net_vertex_state(box, net, c, lambda, p1.patched(alt, keep), p2.patched(alt + 1, keep));
                if (a0.open != a1.open || a0.good_count != a1.good_count) ++bad;
            }
            return bad;
        });
        const int bad = std::accumulate(diffs.begin(), diffs.end(), 0);
        rep.check("openness_is_local", bad == 0,
                  std::to_string(opt.locality_replicas) + " replicas x " + std::to_string(centers.size()) +
                      " net vertices, " + std::to_string(bad) + " changed states");
    }

    // P(no good vertex in A), A nested in B_0(a)
    if (!opt.tail_sizes.empty()) {
        GraphSpec spec = GraphSpec::lattice_box(2, net.a + 3 * net.a);
        Graph box = build_graph(spec);
        NoGoodEstimate ng =
            no_good_vertex_decay(box, net.a, lambda, opt.tail_sizes, opt.tail_replicas, opt.direct_replicas, seed);
        bool decreasing = true;
        for (std::size_t k = 0; k < ng.sizes.size(); ++k) {
            rep.add("log_p_no_good", spec, lambda, t, ng.sizes[k], ng.log_probability[k]);
            rep.add("p_no_good_direct", spec, lambda, t, ng.sizes[k], ng.direct[k]);
            if (k > 0 && !(ng.log_probability[k].mean < ng.log_probability[k - 1].mean)) decreasing = false;
        }
        rep.add("log_p_no_good_slope", spec, lambda, t, 0, exact_value(ng.slope, "least squares"));
        rep.check("no_good_strictly_decreasing", decreasing && ng.slope < 0.0,
                  "slope of log P vs |A|: " + format_number(ng.slope));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Abelian property

ExperimentReport abelian_invariance_check(const Graph& g, const FrogParams& p, const std::vector<std::uint64_t>& seeds) {
    p.validate();
    struct Row {
        int mismatch = 0;  // 0 none, 1 fifo/lifo, 2 fifo/random
        bool exhausted = true;
        std::size_t size = 0;
    };
    auto rows = parallel_map<Row>(seeds.size(), [&](std::size_t k) {
        const std::uint64_t s = seeds[k];
        ParticleField field(s, hash_name("abelian"));
        StopRule stop;
        Cluster a = explore_cluster(g, p, field, stop, Schedule::fifo);
        Cluster b = explore_cluster(g, p, field, stop, Schedule::lifo);
        Cluster c = explore_cluster(g, p, field, stop, Schedule::random, Stream(s, {hash_name("schedule")}));
        Row row;
        row.size = a.size();
        row.exhausted = a.stop_reason == StopReason::exhausted && b.stop_reason == StopReason::exhausted &&
                        c.stop_reason == StopReason::exhausted;
        const auto sa = a.activated_sorted();
        if (sa != b.activated_sorted()) row.mismatch = 1;
        else if (sa != c.activated_sorted()) row.mismatch = 2;
        return row;
    });
    ExperimentReport rep;
    rep.name = "abelian";
    rep.seed = seeds.empty() ? 0 : seeds.front();
    rep.inputs = {{"graph", g.spec().describe()},
                  {"lambda", format_number(p.lambda)},
                  {"t", format_number(p.t)},
                  {"seeds", std::to_string(seeds.size())}};
    std::int64_t matches = 0, truncated = 0;
    std::string first;
    std::vector<double> sizes;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        sizes.push_back(static_cast<double>(rows[k].size));
        if (!rows[k].exhausted) ++truncated;
        if (rows[k].mismatch == 0) {
            ++matches;
        } else if (first.empty()) {
            first = "seed " + std::to_string(seeds[k]) + (rows[k].mismatch == 1 ? ": fifo vs lifo" : ": fifo vs random");
        }
    }
    rep.add("abelian_match_fraction", g.spec(), p.lambda, p.t, 0,
            proportion(matches, static_cast<std::int64_t>(seeds.size()), rep.seed, "exact-set-equality"));
    rep.add("cluster_size", g.spec(), p.lambda, p.t, 0, estimate_from(sizes, rep.seed, "mc-cluster-size"));
    rep.check("abelian_all_match", matches == static_cast<std::int64_t>(seeds.size()),
              first.empty() ? std::to_string(matches) + " of " + std::to_string(seeds.size()) + " seeds" : first);
    rep.check("abelian_unstopped", truncated == 0, std::to_string(truncated) + " explorations hit the particle budget");
    return rep;
}

// ---------------------------------------------------------------------------
// Linear growth

ExperimentReport linear_growth_experiment(int width, int length, const FrogParams& p, const std::vector<int>& radii,
                                          int replicas, std::uint64_t seed, int annulus_outer) {
    p.validate();
    if (radii.empty()) throw ValidationError("no survival radii given");
    const GraphSpec spec = GraphSpec::ladder(width, length);
    const Graph g = build_graph(spec);
    ExperimentReport rep;
    rep.name = "linear_growth";
    rep.seed = seed;
    rep.inputs = {{"graph", spec.describe()},
                  {"lambda", format_number(p.lambda)},
                  {"t", format_number(p.t)},
                  {"replicas", std::to_string(replicas)}};
    std::vector<int> sorted = radii;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::vector<std::uint8_t>> ind;
    for (int n : sorted) {
        SurvivalResult s = survival_probability(g, p, n, replicas, seed);
        rep.add("survival", spec, p.lambda, p.t, n, s.survival);
        ind.push_back(std::move(s.indicators));
    }
    bool monotone = true;
    for (std::size_t k = 1; k < ind.size(); ++k) {
        for (std::size_t r = 0; r < ind[k].size(); ++r) {
            if (ind[k][r] > ind[k - 1][r]) monotone = false;
        }
    }
    rep.check("survival_nonincreasing_in_n", monotone, "per replica, on the coupled fields");

    // blocking event on the annulus B(outer) \ B(outer / 2)
    if (annulus_outer > 1 && annulus_outer < g.truncation_radius()) {
        const int inner = annulus_outer / 2;
        const std::vector<Vertex> Bout = ball(g, g.origin(), annulus_outer);
        KilledWalkTable ex = exit_probability_exact(g, Bout, p.t);
        std::vector<Vertex> annulus;
        double sum = 0.0;
        for (std::size_t i = 0; i < ex.domain.size(); ++i) {
            if (g.depth(ex.domain[i]) > inner) {
                annulus.push_back(ex.domain[i]);
                sum += ex.exit_prob[i];
            }
        }
        const double blocking = std::exp(-p.lambda * sum);
        Estimate closed = exact_value(blocking, "exp(-lambda sum exact exit)");
        closed.stderr_ = 0.0;
        rep.add("blocking_probability", spec, p.lambda, p.t, annulus_outer, closed);
        VertexMask inside(g.vertex_count(), Bout);
        auto blocked = parallel_map<std::uint8_t>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
            ParticleField field(seed, derive_key(hash_name("blocking"), {r}));
            for (Vertex x : annulus) {
                const int eta = p.lambda > 0.0 ? field.count(x, p.lambda) : 0;
                for (int i = 0; i < eta; ++i) {
                    bool out = false;
                    run_walk(g, x, p.t, field.particle_stream(x, i), [&](Vertex v) {
                        if (!inside.contains(v)) out = true;
                        return !out;
                    });
                    if (out) return std::uint8_t{0};
                }
            }
            return std::uint8_t{1};
        });
        std::int64_t nb = 0;
        for (auto b : blocked) nb += b;
        Estimate mc = proportion(nb, replicas, seed, "mc-blocking");
        rep.add("blocking_probability_mc", spec, p.lambda, p.t, annulus_outer, mc);
        rep.check("blocking_positive", blocking > 0.0, "closed form " + format_number(blocking));
        // binomial s.e. under the exact value, so that zero counts are judged fairly
        const double null_se = std::sqrt(blocking * (1.0 - blocking) / replicas);
        rep.check("blocking_mc_agrees", std::abs(mc.mean - blocking) <= 3.0 * null_se + 1e-12,
                  "mc " + format_number(mc.mean) + " vs " + format_number(blocking) + " (binomial se " +
                      format_number(null_se) + ")");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Non-amenable pipeline

Estimate escape_probability(const Graph& g, std::span<const Vertex> A, int replicas, std::uint64_t seed, int horizon) {
    if (replicas < 1) throw ValidationError("replicas must be >= 1");
    VertexMask inA(g.vertex_count(), A);
    auto freq = parallel_map<double>(A.size(), [&](std::size_t i) {
        const Vertex x = A[i];
        int esc = 0;
        for (int r = 0; r < replicas; ++r) {
            Stream s(seed, {hash_name("escape"), x, static_cast<std::uint64_t>(r)});
            Vertex pos = x;
            bool returned = false;
            for (int k = 0; k < horizon; ++k) {
                if (g.is_boundary(pos)) break;
                pos = g.sample_neighbor(pos, s.uniform());
                if (inA.contains(pos)) {
                    returned = true;
                    break;
                }
            }
            esc += !returned;
        }
        return static_cast<double>(esc) / replicas;
    });
    double piA = 0.0;
    for (Vertex x : A) piA += g.pi(x);
    Estimate e;
    double var = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        const double w = g.pi(A[i]) / piA;
        e.mean += w * freq[i];
        var += w * w * freq[i] * (1.0 - freq[i]) / replicas;
    }
    e.stderr_ = std::sqrt(var);
    e.replicas = replicas;
    e.seed = seed;
    e.method = "mc-escape (pi-weighted)";
    return e;
}

ExperimentReport nonamenable_pipeline(const Graph& g, double lambda, const NonamenableOptions& opt,
                                      std::uint64_t seed) {
    require_undirected(g, "nonamenable_pipeline");
    if (!(lambda > 0.0)) throw ValidationError("lambda must be > 0");
    SpectralEstimate sp = spectral_radius_estimate(g, g.origin(), opt.spectral_nmax);
    const double rho = sp.estimate;
    if (!(rho < 0.99)) throw ValidationError("spectral radius estimate " + format_number(rho) + " too close to 1");
    const double K = stationary_control_constant(g, true);
    NonamenableBound nb = nonamenable_t_bound(rho, K, lambda);

    ExperimentReport rep;
    rep.name = "nonamenable";
    rep.seed = seed;
    rep.inputs = {{"graph", g.spec().describe()},
                  {"lambda", format_number(lambda)},
                  {"radius", std::to_string(opt.radius)},
                  {"replicas", std::to_string(opt.replicas)}};
    rep.add("spectral_radius", g.spec(), lambda, 0.0, opt.spectral_nmax, exact_value(rho, "return-probability ratio"));
    rep.add("control_constant", g.spec(), lambda, 0.0, 0, exact_value(K, "max pi / min pi (interior)"));
    rep.add("t_bound", g.spec(), lambda, 0.0, 0, exact_value(nb.bound, "closed form"));
    rep.add("alpha", g.spec(), lambda, 0.0, 0, exact_value(nb.alpha, "closed form"));
    if (sp.truncation_warning) rep.notes.push_back("spectral estimate carries a truncation warning");

    std::vector<double> ts = opt.t_list;
    std::sort(ts.begin(), ts.end());
    std::optional<double> hi, lo;
    std::vector<Estimate> surv;
    for (double t : ts) {
        Estimate e = survival_probability(g, FrogParams{lambda, t}, opt.radius, opt.replicas, seed).survival;
        rep.add("survival", g.spec(), lambda, t, opt.radius, e);
        surv.push_back(e);
        if (!hi && e.mean - 3.0 * e.stderr() > opt.threshold) hi = t;
    }
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (hi && ts[k] >= *hi) break;
        if (surv[k].mean + 3.0 * surv[k].stderr() < opt.threshold) lo = ts[k];
    }
    if (hi) {
        rep.add("t_c_bracket_hi", g.spec(), lambda, *hi, opt.radius, exact_value(*hi, "grid"));
        rep.add("t_c_bracket_lo", g.spec(), lambda, lo.value_or(0.0), opt.radius, exact_value(lo.value_or(0.0), "grid"));
    }
    rep.check("bracket_below_bound", hi.has_value() && *hi <= nb.bound,
              hi ? "empirical hi " + format_number(*hi) + " vs bound " + format_number(nb.bound)
                 : "no grid value with survival above the threshold");

    const std::vector<Vertex> A = ball(g, g.origin(), opt.escape_radius);
    Estimate esc = escape_probability(g, A, opt.escape_replicas, seed);
    rep.add("escape_probability", g.spec(), lambda, 0.0, opt.escape_radius, esc);
    rep.check("escape_at_least_one_minus_rho", esc.mean >= (1.0 - rho) - 0.05,
              format_number(esc.mean) + " vs 1 - rho = " + format_number(1.0 - rho));

    const double tmax = ts.empty() ? 1.0 : ts.back();
    GoodSet gs = good_set_G_A(g, A, tmax, nb.alpha, rho, K, 200, seed);
    rep.add("G_A_fraction", g.spec(), lambda, tmax, opt.escape_radius, exact_value(gs.fraction, "mc-threshold"));
    rep.add("G_A_reference_bound", g.spec(), lambda, tmax, opt.escape_radius, exact_value(gs.reference_bound, "closed form"));
    return rep;
}

}  // namespace frogsim
