#include "frogsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "frogsim/errors.hpp"
#include "frogsim/stamp_set.hpp"

namespace frogsim {

StampSet& scratch_set(std::size_t n, int slot) {
    thread_local std::map<int, StampSet> sets;
    StampSet& s = sets[slot];
    s.resize(n);
    s.clear();
    return s;
}

// ---------------------------------------------------------------------------
// GraphSpec

GraphSpec GraphSpec::lattice_box(int d, int radius, BoundaryMode mode) {
    GraphSpec s;
    s.family = GraphFamily::lattice_box;
    s.dim = d;
    s.radius = radius;
    s.boundary = mode;
    return s;
}

GraphSpec GraphSpec::regular_tree(int degree, int depth, BoundaryMode mode) {
    GraphSpec s;
    s.family = GraphFamily::regular_tree;
    s.degree = degree;
    s.depth = depth;
    s.boundary = mode;
    return s;
}

GraphSpec GraphSpec::ladder(int width, int length, BoundaryMode mode) {
    GraphSpec s;
    s.family = GraphFamily::ladder;
    s.width = width;
    s.length = length;
    s.boundary = mode;
    return s;
}

GraphSpec GraphSpec::weighted_file(std::string path, BoundaryMode mode) {
    GraphSpec s;
    s.family = GraphFamily::weighted_file;
    s.path = std::move(path);
    s.boundary = mode;
    return s;
}

std::string GraphSpec::describe() const {
    std::ostringstream os;
    switch (family) {
        case GraphFamily::lattice_box: os << "Z" << dim << "box(" << radius << ")"; break;
        case GraphFamily::regular_tree: os << "tree(" << degree << "," << depth << ")"; break;
        case GraphFamily::ladder: os << "ladder(" << width << "," << length << ")"; break;
        case GraphFamily::weighted_file: {
            auto slash = path.find_last_of('/');
            os << "file(" << (slash == std::string::npos ? path : path.substr(slash + 1)) << ")";
            break;
        }
    }
    return os.str();
}

VertexMask::VertexMask(std::size_t n, std::span<const Vertex> members) : bits_(n, 0) {
    for (Vertex v : members) bits_.at(v) = 1;
}

// ---------------------------------------------------------------------------
// Graph

struct GraphAccess {
    static Graph& fill(Graph& g, std::vector<std::size_t> offsets, std::vector<Vertex> targets,
                       std::vector<double> weights, bool directed, std::vector<Vertex> boundary,
                       const GraphSpec& spec) {
        g.offsets_ = std::move(offsets);
        g.targets_ = std::move(targets);
        g.weights_ = std::move(weights);
        g.directed_ = directed;
        g.boundary_ = std::move(boundary);
        g.mode_ = spec.boundary;
        g.spec_ = spec;
        g.finalize();
        return g;
    }
    static void set_coordinates(Graph& g, std::vector<int> coords, int dim) {
        g.coords_ = std::move(coords);
        g.coord_dim_ = dim;
    }
};

double Graph::weight(Vertex x, Vertex y) const noexcept {
    auto nb = out_neighbors(x);
    double w = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) {
        if (nb[k] == y) w += edge_weight(x, k);
    }
    return w;
}

Vertex Graph::sample_neighbor(Vertex x, double u) const noexcept {
    const std::size_t lo = offsets_[x];
    const std::size_t deg = offsets_[x + 1] - lo;
    if (weights_.empty()) {
        std::size_t k = static_cast<std::size_t>(u * static_cast<double>(deg));
        if (k >= deg) k = deg - 1;
        return targets_[lo + k];
    }
    auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(lo);
    auto last = first + static_cast<std::ptrdiff_t>(deg);
    auto it = std::upper_bound(first, last, u);
    if (it == last) --it;
    return targets_[lo + static_cast<std::size_t>(it - first)];
}

std::span<const Vertex> Graph::in_neighbors(Vertex x) const noexcept {
    if (!directed_) return out_neighbors(x);
    return {in_targets_.data() + in_offsets_[x], in_targets_.data() + in_offsets_[x + 1]};
}

long long Graph::find_coordinates(std::span<const int> c) const {
    if (coord_dim_ == 0 || static_cast<int>(c.size()) != coord_dim_) return -1;
    // Coordinates are only looked up in tests and experiment setup; a scan is fine.
    const std::size_t n = vertex_count();
    for (std::size_t v = 0; v < n; ++v) {
        if (std::equal(c.begin(), c.end(), coords_.begin() + static_cast<std::ptrdiff_t>(v * coord_dim_))) {
            return static_cast<long long>(v);
        }
    }
    return -1;
}

void Graph::finalize() {
    const std::size_t n = vertex_count();
    pi_.assign(n, 0.0);
    max_out_degree_ = 0;
    if (!weights_.empty()) cumulative_.assign(targets_.size(), 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        const std::size_t deg = offsets_[x + 1] - offsets_[x];
        max_out_degree_ = std::max(max_out_degree_, deg);
        if (weights_.empty()) {
            pi_[x] = static_cast<double>(deg);
        } else {
            double s = 0.0;
            for (std::size_t k = offsets_[x]; k < offsets_[x + 1]; ++k) s += weights_[k];
            pi_[x] = s;
            double c = 0.0;
            for (std::size_t k = offsets_[x]; k < offsets_[x + 1]; ++k) {
                c += weights_[k] / s;
                cumulative_[k] = c;
            }
            if (deg > 0) cumulative_[offsets_[x + 1] - 1] = 1.0;
        }
    }
    if (directed_) {
        in_offsets_.assign(n + 1, 0);
        for (Vertex y : targets_) ++in_offsets_[y + 1];
        for (std::size_t v = 0; v < n; ++v) in_offsets_[v + 1] += in_offsets_[v];
        in_targets_.assign(targets_.size(), 0);
        std::vector<std::size_t> pos(in_offsets_.begin(), in_offsets_.end() - 1);
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t k = offsets_[x]; k < offsets_[x + 1]; ++k) {
                in_targets_[pos[targets_[k]]++] = static_cast<Vertex>(x);
            }
        }
    }
    boundary_flag_.assign(n, 0);
    std::sort(boundary_.begin(), boundary_.end());
    boundary_.erase(std::unique(boundary_.begin(), boundary_.end()), boundary_.end());
    for (Vertex b : boundary_) boundary_flag_.at(b) = 1;

    depth_.assign(n, -1);
    truncation_radius_ = 0;
    if (n == 0) return;
    std::vector<Vertex> queue{0};
    depth_[0] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        Vertex x = queue[head];
        for (Vertex y : out_neighbors(x)) {
            if (depth_[y] < 0) {
                depth_[y] = depth_[x] + 1;
                truncation_radius_ = std::max(truncation_radius_, depth_[y]);
                queue.push_back(y);
            }
        }
    }
}

void Graph::check_invariants() const {
    const std::size_t n = vertex_count();
    if (n == 0) throw ValidationError("graph has no vertices");
    if (is_boundary(origin())) throw ValidationError("origin lies in the boundary set");
    for (std::size_t x = 0; x < n; ++x) {
        const Vertex v = static_cast<Vertex>(x);
        if (out_degree(v) == 0) throw ValidationError("vertex " + std::to_string(x) + " has no out-neighbors");
        double s = 0.0;
        for (std::size_t k = 0; k < out_degree(v); ++k) {
            double w = edge_weight(v, k);
            if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("non-positive weight at vertex " + std::to_string(x));
            s += w;
            if (!directed_) {
                Vertex y = out_neighbors(v)[k];
                double back = weight(y, v);
                double fwd = weight(v, y);
                if (std::abs(back - fwd) > 1e-12 * std::max(1.0, fwd)) {
                    throw ValidationError("asymmetric weight on edge " + std::to_string(x) + "-" + std::to_string(y));
                }
            }
        }
        if (std::abs(s - pi_[x]) > 1e-12 * s) throw ValidationError("pi mismatch at vertex " + std::to_string(x));
    }
}

Graph Graph::from_adjacency(std::vector<std::vector<Vertex>> adj, std::vector<std::vector<double>> weights,
                            bool directed, std::vector<Vertex> boundary, BoundaryMode mode, GraphSpec spec) {
    const std::size_t n = adj.size();
    std::vector<std::size_t> offsets(n + 1, 0);
    for (std::size_t x = 0; x < n; ++x) offsets[x + 1] = offsets[x] + adj[x].size();
    std::vector<Vertex> targets;
    targets.reserve(offsets[n]);
    std::vector<double> w;
    bool any_weight = false;
    if (!weights.empty()) {
        if (weights.size() != n) throw ValidationError("weights do not match adjacency");
        for (std::size_t x = 0; x < n; ++x) {
            if (weights[x].size() != adj[x].size()) throw ValidationError("weights do not match adjacency");
            for (double v : weights[x]) any_weight = any_weight || v != 1.0;
        }
    }
    for (std::size_t x = 0; x < n; ++x) {
        for (Vertex y : adj[x]) {
            if (y >= n) throw ValidationError("neighbor id out of range");
            targets.push_back(y);
        }
        if (any_weight) w.insert(w.end(), weights[x].begin(), weights[x].end());
    }
    spec.boundary = mode;
    Graph g;
    GraphAccess::fill(g, std::move(offsets), std::move(targets), std::move(w), directed, std::move(boundary), spec);
    return g;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

void check_budget(double count, const GraphSpec& spec) {
    if (count > static_cast<double>(spec.vertex_budget)) {
        std::ostringstream os;
        os << spec.describe() << " needs " << count << " vertices, budget is " << spec.vertex_budget;
        throw BudgetError(os.str());
    }
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Generic coordinate BFS for lattice-like families. `inside` decides
/// membership, `is_boundary` marks the truncation frontier.
template <class Inside, class IsBoundary>
Graph coordinate_graph(int dim, const GraphSpec& spec, Inside inside, IsBoundary is_boundary_fn,
                       const std::vector<std::vector<int>>& moves) {
    auto encode = [dim](const int* c) {
        std::uint64_t k = 0;
        for (int i = 0; i < dim; ++i) k = k * 0x100000ULL + static_cast<std::uint64_t>(c[i] + 0x80000);
        return k;
    };
    std::vector<int> coords(static_cast<std::size_t>(dim), 0);
    std::unordered_map<std::uint64_t, Vertex> index;
    index.emplace(encode(coords.data()), 0);
    std::vector<Vertex> boundary;
    std::vector<std::size_t> offsets{0};
    std::vector<Vertex> targets;
    std::vector<int> nb(static_cast<std::size_t>(dim));
    // BFS: coords grows as vertices are discovered; vertex v occupies coords[v*dim ...].
    for (std::size_t v = 0; v * dim < coords.size(); ++v) {
        const int* c = coords.data() + v * dim;
        std::vector<int> here(c, c + dim);
        if (is_boundary_fn(here.data())) boundary.push_back(static_cast<Vertex>(v));
        for (const auto& mv : moves) {
            for (int i = 0; i < dim; ++i) nb[i] = here[i] + mv[i];
            if (!inside(nb.data())) continue;
            auto key = encode(nb.data());
            auto [it, fresh] = index.emplace(key, static_cast<Vertex>(index.size()));
            if (fresh) coords.insert(coords.end(), nb.begin(), nb.end());
            targets.push_back(it->second);
        }
        offsets.push_back(targets.size());
    }
    Graph g;
    GraphAccess::fill(g, std::move(offsets), std::move(targets), {}, false, std::move(boundary), spec);
    GraphAccess::set_coordinates(g, std::move(coords), dim);
    return g;
}

Graph build_lattice_box(const GraphSpec& spec) {
    if (spec.dim < 1) throw ValidationError("lattice_box: dim must be >= 1");
    if (spec.radius < 1) throw ValidationError("lattice_box: radius must be >= 1");
    if (spec.radius > 0x7FFFF) throw ValidationError("lattice_box: radius too large");
    double count = 0.0;
    for (int k = 0; k <= std::min(spec.dim, spec.radius); ++k) {
        count += std::ldexp(binom(spec.dim, k) * binom(spec.radius, k), k);
    }
    check_budget(count, spec);
    const int d = spec.dim;
    const int R = spec.radius;
    auto l1 = [d](const int* c) {
        int s = 0;
        for (int i = 0; i < d; ++i) s += std::abs(c[i]);
        return s;
    };
    std::vector<std::vector<int>> moves;
    for (int i = 0; i < d; ++i) {
        for (int sgn : {1, -1}) {
            std::vector<int> m(static_cast<std::size_t>(d), 0);
            m[i] = sgn;
            moves.push_back(m);
        }
    }
    return coordinate_graph(d, spec, [&](const int* c) { return l1(c) <= R; },
                            [&](const int* c) { return l1(c) == R; }, moves);
}

Graph build_ladder(const GraphSpec& spec) {
    if (spec.width < 1) throw ValidationError("ladder: width must be >= 1");
    if (spec.length < 1) throw ValidationError("ladder: length must be >= 1");
    check_budget(static_cast<double>(spec.width) * (2.0 * spec.length + 1.0), spec);
    const int L = spec.length;
    const int W = spec.width;
    std::vector<std::vector<int>> moves{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    return coordinate_graph(2, spec,
                            [&](const int* c) { return std::abs(c[0]) <= L && c[1] >= 0 && c[1] < W; },
                            [&](const int* c) { return std::abs(c[0]) == L; }, moves);
}

Graph build_tree(const GraphSpec& spec) {
    if (spec.degree < 3) throw ValidationError("regular_tree: degree must be >= 3");
    if (spec.depth < 1) throw ValidationError("regular_tree: depth must be >= 1");
    const std::size_t d = static_cast<std::size_t>(spec.degree);
    // level sizes: 1, d, d(d-1), ...
    double count = 1.0;
    double level = 1.0;
    std::vector<std::size_t> level_start{0};
    for (int k = 1; k <= spec.depth; ++k) {
        level = (k == 1) ? static_cast<double>(d) : level * static_cast<double>(d - 1);
        count += level;
        check_budget(count, spec);
        level_start.push_back(static_cast<std::size_t>(count - level));
    }
    const std::size_t n = static_cast<std::size_t>(count);
    const std::size_t first_leaf = level_start.back();
    auto parent = [d](std::size_t u) -> std::size_t { return u <= d ? 0 : (u - d - 1) / (d - 1) + 1; };
    auto first_child = [d](std::size_t v) -> std::size_t { return v == 0 ? 1 : d + 1 + (v - 1) * (d - 1); };

    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<Vertex> targets;
    targets.reserve(2 * (n - 1));
    for (std::size_t v = 0; v < n; ++v) {
        if (v != 0) targets.push_back(static_cast<Vertex>(parent(v)));
        if (v < first_leaf) {
            const std::size_t kids = v == 0 ? d : d - 1;
            const std::size_t c0 = first_child(v);
            for (std::size_t j = 0; j < kids; ++j) targets.push_back(static_cast<Vertex>(c0 + j));
        }
        offsets[v + 1] = targets.size();
    }
    std::vector<Vertex> boundary;
    boundary.reserve(n - first_leaf);
    for (std::size_t v = first_leaf; v < n; ++v) boundary.push_back(static_cast<Vertex>(v));
    Graph g;
    GraphAccess::fill(g, std::move(offsets), std::move(targets), {}, false, std::move(boundary), spec);
    return g;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Graph parse_weighted_graph(const std::string& text, const GraphSpec& spec_in) {
    GraphSpec spec = spec_in;
    spec.family = GraphFamily::weighted_file;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    bool have_header = false;
    bool directed = false;
    // keyed by original id so that ordering is reproducible
    std::map<long long, std::map<long long, double>> out;
    std::map<long long, int> seen;
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (!have_header) {
            std::string magic, version, kind, extra;
            ls >> magic >> version >> kind;
            if (magic != "frogsim-graph" || version != "v1") throw ParseError("expected header 'frogsim-graph v1 <directed|undirected>'", lineno);
            if (kind == "directed") directed = true;
            else if (kind == "undirected") directed = false;
            else throw ParseError("header must say directed or undirected", lineno);
            if (ls >> extra) throw ParseError("trailing text after header", lineno);
            have_header = true;
            continue;
        }
        long long u = 0, v = 0;
        double w = 0.0;
        std::string extra;
        if (!(ls >> u >> v >> w)) throw ParseError("expected 'u v w'", lineno);
        if (ls >> extra) throw ParseError("trailing text after edge", lineno);
        if (!(w > 0.0) || !std::isfinite(w)) throw ParseError("weight must be positive", lineno);
        out[u][v] += w;
        if (!directed && u != v) out[v][u] += w;
        seen.emplace(u, lineno);
        seen.emplace(v, lineno);
    }
    if (!have_header) throw ParseError("missing header", lineno == 0 ? 1 : lineno);
    if (seen.empty()) throw ParseError("no edges", lineno);
    for (const auto& [id, line] : seen) {
        if (!out.count(id)) throw ParseError("vertex " + std::to_string(id) + " has no outgoing edge", line);
    }
    check_budget(static_cast<double>(seen.size()), spec);

    // BFS relabelling from the smallest id; unreachable vertices follow in id order.
    std::map<long long, Vertex> label;
    std::vector<long long> order;
    auto visit = [&](long long root) {
        if (label.count(root)) return;
        label[root] = static_cast<Vertex>(order.size());
        order.push_back(root);
        for (std::size_t h = order.size() - 1; h < order.size(); ++h) {
            for (const auto& [y, w] : out[order[h]]) {
                (void)w;
                if (!label.count(y)) {
                    label[y] = static_cast<Vertex>(order.size());
                    order.push_back(y);
                }
            }
        }
    };
    for (const auto& [id, line] : seen) {
        (void)line;
        visit(id);
    }
    std::vector<std::vector<Vertex>> adj(order.size());
    std::vector<std::vector<double>> wts(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (const auto& [y, w] : out[order[i]]) {
            adj[i].push_back(label[y]);
            wts[i].push_back(w);
        }
    }
    return Graph::from_adjacency(std::move(adj), std::move(wts), directed, {}, spec.boundary, spec);
}

Graph build_graph(const GraphSpec& spec) {
    Graph g;
    switch (spec.family) {
        case GraphFamily::lattice_box: g = build_lattice_box(spec); break;
        case GraphFamily::regular_tree: g = build_tree(spec); break;
        case GraphFamily::ladder: g = build_ladder(spec); break;
        case GraphFamily::weighted_file: {
            std::ifstream f(spec.path);
            if (!f) throw ValidationError("cannot open graph file " + spec.path);
            std::stringstream ss;
            ss << f.rdbuf();
            g = parse_weighted_graph(ss.str(), spec);
            break;
        }
    }
    g.check_invariants();
    return g;
}

// ---------------------------------------------------------------------------
// Queries

namespace {
void check_vertex(const Graph& g, Vertex x) {
    if (x >= g.vertex_count()) throw ValidationError("vertex " + std::to_string(x) + " out of range");
}
}  // namespace

std::vector<Vertex> ball(const Graph& g, Vertex x, int r) {
    check_vertex(g, x);
    if (r < 0) throw ValidationError("ball radius must be >= 0");
    StampSet& seen = scratch_set(g.vertex_count(), 7);
    std::vector<Vertex> out{x};
    seen.insert(x);
    std::size_t level_begin = 0;
    for (int d = 0; d < r; ++d) {
        const std::size_t level_end = out.size();
        for (std::size_t i = level_begin; i < level_end; ++i) {
            for (Vertex y : g.out_neighbors(out[i])) {
                if (seen.insert(y)) out.push_back(y);
            }
        }
        if (out.size() == level_end) break;
        level_begin = level_end;
    }
    return out;
}

std::vector<Vertex> sphere(const Graph& g, Vertex x, int r) {
    check_vertex(g, x);
    if (r < 0) throw ValidationError("sphere radius must be >= 0");
    StampSet& seen = scratch_set(g.vertex_count(), 7);
    std::vector<Vertex> frontier{x};
    seen.insert(x);
    for (int d = 0; d < r && !frontier.empty(); ++d) {
        std::vector<Vertex> next;
        for (Vertex v : frontier) {
            for (Vertex y : g.out_neighbors(v)) {
                if (seen.insert(y)) next.push_back(y);
            }
        }
        frontier.swap(next);
    }
    return frontier;
}

std::vector<int> distances_from(const Graph& g, Vertex x, int max_r) {
    check_vertex(g, x);
    std::vector<int> dist(g.vertex_count(), -1);
    std::vector<Vertex> queue{x};
    dist[x] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
        Vertex v = queue[h];
        if (max_r >= 0 && dist[v] >= max_r) continue;
        for (Vertex y : g.out_neighbors(v)) {
            if (dist[y] < 0) {
                dist[y] = dist[v] + 1;
                queue.push_back(y);
            }
        }
    }
    return dist;
}

std::vector<int> distance_to_complement(const Graph& g, std::span<const Vertex> set) {
    const std::size_t n = g.vertex_count();
    std::unordered_map<Vertex, std::size_t> pos;
    pos.reserve(set.size() * 2);
    for (std::size_t i = 0; i < set.size(); ++i) {
        check_vertex(g, set[i]);
        pos.emplace(set[i], i);
    }
    (void)n;
    std::vector<int> dist(set.size(), -1);
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (Vertex y : g.out_neighbors(set[i])) {
            if (!pos.count(y)) {
                dist[i] = 1;
                queue.push_back(i);
                break;
            }
        }
    }
    for (std::size_t h = 0; h < queue.size(); ++h) {
        const Vertex v = set[queue[h]];
        for (Vertex u : g.in_neighbors(v)) {
            auto it = pos.find(u);
            if (it != pos.end() && dist[it->second] < 0) {
                dist[it->second] = dist[queue[h]] + 1;
                queue.push_back(it->second);
            }
        }
    }
    return dist;
}

GrowthProfile growth_profile(const Graph& g, Vertex x, int rmax) {
    check_vertex(g, x);
    if (rmax < 2) throw ValidationError("growth_profile: rmax must be >= 2");
    auto dist = distances_from(g, x, rmax + 1);
    // The ball of radius rmax must not touch the truncation frontier.
    for (Vertex b : g.boundary()) {
        if (dist[b] >= 0 && dist[b] <= rmax) {
            throw ValidationError("growth_profile: rmax reaches the truncation boundary");
        }
    }
    GrowthProfile p;
    p.volumes.assign(static_cast<std::size_t>(rmax) + 1, 0);
    for (int d : dist) {
        if (d >= 0 && d <= rmax) ++p.volumes[static_cast<std::size_t>(d)];
    }
    for (std::size_t i = 1; i < p.volumes.size(); ++i) p.volumes[i] += p.volumes[i - 1];
    const int lo = rmax / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int r = std::max(lo, 1); r <= rmax; ++r) {
        double lx = std::log(static_cast<double>(r));
        double ly = std::log(static_cast<double>(p.volumes[static_cast<std::size_t>(r)]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    p.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    p.nearest_integer = static_cast<int>(std::lround(p.exponent));
    p.exponential_rate = (std::log(static_cast<double>(p.volumes.back())) -
                          std::log(static_cast<double>(p.volumes[static_cast<std::size_t>(lo)]))) /
                         static_cast<double>(rmax - lo);
    return p;
}

double cheeger_of_set(const Graph& g, std::span<const Vertex> set) {
    if (set.empty()) throw ValidationError("cheeger_of_set: empty set");
    StampSet& in = scratch_set(g.vertex_count(), 8);
    for (Vertex v : set) {
        check_vertex(g, v);
        in.insert(v);
    }
    double out = 0.0;
    double vol = 0.0;
    StampSet& counted = scratch_set(g.vertex_count(), 9);
    for (Vertex a : set) {
        if (!counted.insert(a)) continue;
        vol += g.pi(a);
        auto nb = g.out_neighbors(a);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (!in.contains(nb[k])) out += g.edge_weight(a, k);
        }
    }
    return out / vol;
}

SpectralEstimate spectral_radius_estimate(const Graph& g, Vertex x, int nmax, double boundary_tol) {
    check_vertex(g, x);
    if (nmax < 4 || nmax % 2 != 0) throw ValidationError("spectral_radius_estimate: nmax must be even and >= 4");
    const int half = nmax / 2;
    // Mass further than nmax/2 from x cannot return by step nmax.
    std::vector<Vertex> local = ball(g, x, half);
    std::unordered_map<Vertex, std::uint32_t> idx;
    idx.reserve(local.size() * 2);
    for (std::size_t i = 0; i < local.size(); ++i) idx.emplace(local[i], static_cast<std::uint32_t>(i));
    // local CSR with transition probabilities; -1 marks an edge leaving the local ball
    std::vector<std::size_t> off(local.size() + 1, 0);
    std::vector<std::int64_t> tgt;
    std::vector<double> prob;
    for (std::size_t i = 0; i < local.size(); ++i) {
        Vertex v = local[i];
        auto nb = g.out_neighbors(v);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            auto it = idx.find(nb[k]);
            tgt.push_back(it == idx.end() ? -1 : static_cast<std::int64_t>(it->second));
            prob.push_back(g.transition(v, k));
        }
        off[i + 1] = tgt.size();
    }
    int dist_to_boundary = -1;
    {
        auto d = distances_from(g, x, nmax);
        for (Vertex b : g.boundary()) {
            if (d[b] >= 0 && (dist_to_boundary < 0 || d[b] < dist_to_boundary)) dist_to_boundary = d[b];
        }
    }

    SpectralEstimate est;
    std::vector<double> cur(local.size(), 0.0), nxt(local.size(), 0.0);
    cur[0] = 1.0;
    for (int step = 1; step <= nmax; ++step) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (std::size_t i = 0; i < local.size(); ++i) {
            const double m = cur[i];
            if (m == 0.0) continue;
            if (g.is_boundary(local[i])) {
                est.boundary_mass += m;  // killed at the truncation
                continue;
            }
            for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
                if (tgt[k] >= 0) nxt[static_cast<std::size_t>(tgt[k])] += m * prob[k];
            }
        }
        cur.swap(nxt);
        if (step % 2 == 0) {
            est.return_probabilities.push_back(cur[0]);
            const double n2 = static_cast<double>(step);
            est.root_sequence.push_back(cur[0] > 0 ? std::pow(cur[0], 1.0 / n2) : 0.0);
        }
    }
    // mass that reached the boundary can only bias returns if it could come back in time
    est.truncation_warning = dist_to_boundary >= 0 && 2 * dist_to_boundary <= nmax && est.boundary_mass > boundary_tol;

    const auto& p = est.return_probabilities;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] > p[i - 1] * (1.0 + 1e-12)) est.monotone = false;
    }
    // r_n = sqrt(p_{2n+2} / p_{2n}) with p indexed from n = 1
    std::vector<double> r;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        if (p[i] > 0 && p[i + 1] > 0) r.push_back(std::sqrt(p[i + 1] / p[i]));
    }
    if (r.empty()) {
        est.ratio_estimate = est.root_sequence.empty() ? 0.0 : est.root_sequence.back();
        est.estimate = est.ratio_estimate;
        return est;
    }
    est.ratio_estimate = r.back();
    if (r.size() >= 2) {
        const double n = static_cast<double>(r.size() - 1);  // r.back() is r_{n+1} with n = size-1
        est.estimate = (n + 1.0) * r.back() - n * r[r.size() - 2];
    } else {
        est.estimate = est.ratio_estimate;
    }
    return est;
}

double stationary_control_constant(const Graph& g, bool interior_only) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t x = 0; x < g.vertex_count(); ++x) {
        const Vertex v = static_cast<Vertex>(x);
        if (interior_only && g.is_boundary(v)) continue;
        lo = std::min(lo, g.pi(v));
        hi = std::max(hi, g.pi(v));
    }
    if (hi == 0.0) throw ValidationError("stationary_control_constant: no vertices");
    return hi / lo;
}

}  // namespace frogsim
