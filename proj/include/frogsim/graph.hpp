#pragma once

// Finite graphs on which every simulation runs.
//
// Infinite graphs (Z^d, regular trees, ladders) are truncated to a finite ball
// around the origin. Vertex ids are dense and assigned in BFS order from the
// origin, so the origin is always vertex 0. The truncation frontier is kept in
// `boundary()`; walks treat it according to `BoundaryMode`.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace frogsim {

using Vertex = std::uint32_t;

enum class BoundaryMode {
    absorbing,     ///< boundary vertices are sinks: a walk entering one stops there
    open_killing,  ///< a walk entering the boundary is killed before recording it
};

enum class GraphFamily { lattice_box, regular_tree, ladder, weighted_file };

struct GraphSpec {
    GraphFamily family = GraphFamily::lattice_box;
    int dim = 2;
    int radius = 1;
    int degree = 3;
    int depth = 1;
    int width = 1;
    int length = 1;
    std::string path;
    BoundaryMode boundary = BoundaryMode::absorbing;
    std::size_t vertex_budget = 20'000'000;

    static GraphSpec lattice_box(int d, int radius, BoundaryMode mode = BoundaryMode::absorbing);
    static GraphSpec regular_tree(int degree, int depth, BoundaryMode mode = BoundaryMode::absorbing);
    static GraphSpec ladder(int width, int length, BoundaryMode mode = BoundaryMode::absorbing);
    static GraphSpec weighted_file(std::string path, BoundaryMode mode = BoundaryMode::absorbing);

    /// Short stable label such as "tree(3,12)", used in CSV rows.
    std::string describe() const;
};

/// Compact membership test over the vertices of one graph.
class VertexMask {
public:
    VertexMask() = default;
    explicit VertexMask(std::size_t n) : bits_(n, 0) {}
    VertexMask(std::size_t n, std::span<const Vertex> members);

    bool contains(Vertex v) const noexcept { return v < bits_.size() && bits_[v] != 0; }
    void insert(Vertex v) { bits_[v] = 1; }
    void erase(Vertex v) { bits_[v] = 0; }
    std::size_t universe() const noexcept { return bits_.size(); }

private:
    std::vector<std::uint8_t> bits_;
};

class Graph {
public:
    std::size_t vertex_count() const noexcept { return offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return targets_.size(); }

    std::span<const Vertex> out_neighbors(Vertex x) const noexcept {
        return {targets_.data() + offsets_[x], targets_.data() + offsets_[x + 1]};
    }
    std::size_t out_degree(Vertex x) const noexcept { return offsets_[x + 1] - offsets_[x]; }
    std::size_t max_out_degree() const noexcept { return max_out_degree_; }

    /// Conductance of the k-th out-edge of x.
    double edge_weight(Vertex x, std::size_t k) const noexcept {
        return weights_.empty() ? 1.0 : weights_[offsets_[x] + k];
    }
    /// w(x, y); zero when y is not an out-neighbor of x.
    double weight(Vertex x, Vertex y) const noexcept;
    /// pi(x) = sum_y w(x, y).
    double pi(Vertex x) const noexcept { return pi_[x]; }
    /// P(x, k-th out-neighbor).
    double transition(Vertex x, std::size_t k) const noexcept { return edge_weight(x, k) / pi_[x]; }
    bool weighted() const noexcept { return !weights_.empty(); }

    /// Neighbor chosen with probability w(x, y) / pi(x) from one uniform u in [0, 1).
    Vertex sample_neighbor(Vertex x, double u) const noexcept;

    bool directed() const noexcept { return directed_; }
    Vertex origin() const noexcept { return 0; }

    bool is_boundary(Vertex x) const noexcept { return boundary_flag_[x] != 0; }
    const std::vector<Vertex>& boundary() const noexcept { return boundary_; }
    BoundaryMode boundary_mode() const noexcept { return mode_; }

    /// Graph distance from the origin (following out-edges); -1 if unreachable.
    int depth(Vertex x) const noexcept { return depth_[x]; }
    /// Largest finite distance from the origin.
    int truncation_radius() const noexcept { return truncation_radius_; }

    /// Lattice coordinates for lattice_box and ladder graphs (empty otherwise).
    int coordinate_dim() const noexcept { return coord_dim_; }
    std::span<const int> coordinates(Vertex x) const noexcept {
        return {coords_.data() + static_cast<std::size_t>(x) * coord_dim_, static_cast<std::size_t>(coord_dim_)};
    }
    /// Vertex with the given lattice coordinates, or -1.
    long long find_coordinates(std::span<const int> c) const;

    const GraphSpec& spec() const noexcept { return spec_; }

    /// Reverse adjacency (in-neighbors). Equal to out_neighbors for undirected graphs.
    std::span<const Vertex> in_neighbors(Vertex x) const noexcept;

    /// Throws ValidationError describing the first violated invariant.
    void check_invariants() const;

    /// Raw CSR construction. Lists need not be sorted. Used by the builders
    /// and by tests that need small hand-made graphs.
    static Graph from_adjacency(std::vector<std::vector<Vertex>> adj,
                                std::vector<std::vector<double>> weights,
                                bool directed,
                                std::vector<Vertex> boundary,
                                BoundaryMode mode,
                                GraphSpec spec = {});

private:
    friend struct GraphAccess;

    GraphSpec spec_;
    std::vector<std::size_t> offsets_{0};
    std::vector<Vertex> targets_;
    std::vector<double> weights_;   // empty when every weight is 1
    std::vector<double> cumulative_;  // per-row cumulative transition probabilities (weighted only)
    std::vector<double> pi_;
    std::vector<std::size_t> in_offsets_;
    std::vector<Vertex> in_targets_;
    std::vector<std::uint8_t> boundary_flag_;
    std::vector<Vertex> boundary_;
    std::vector<int> depth_;
    std::vector<int> coords_;
    int coord_dim_ = 0;
    int truncation_radius_ = 0;
    std::size_t max_out_degree_ = 0;
    bool directed_ = false;
    BoundaryMode mode_ = BoundaryMode::absorbing;

    void finalize();
};

/// Build one of the graph families. Throws ValidationError on out-of-range
/// fields, BudgetError when the vertex budget would be exceeded and
/// ParseError on malformed files.
Graph build_graph(const GraphSpec& spec);

/// Parse the `frogsim-graph v1` text format.
Graph parse_weighted_graph(const std::string& text, const GraphSpec& spec = {});

/// Vertices at distance <= r from x, in BFS order (x first).
std::vector<Vertex> ball(const Graph& g, Vertex x, int r);
/// Vertices at distance exactly r from x.
std::vector<Vertex> sphere(const Graph& g, Vertex x, int r);
/// BFS distances from x (-1 where unreachable), optionally capped at max_r.
std::vector<int> distances_from(const Graph& g, Vertex x, int max_r = -1);
/// d(x, S^c) for every x in `set`, following out-edges. -1 if S^c is unreachable.
std::vector<int> distance_to_complement(const Graph& g, std::span<const Vertex> set);

struct GrowthProfile {
    std::vector<std::size_t> volumes;  ///< |B_x(n)| for n = 0..rmax
    double exponent = 0.0;             ///< least-squares slope of log g(n) vs log n on [rmax/2, rmax]
    int nearest_integer = 0;
    double exponential_rate = 0.0;     ///< (log g(rmax) - log g(rmax/2)) / (rmax - rmax/2)
};

/// Ball-volume profile. Throws ValidationError when rmax reaches the truncation.
GrowthProfile growth_profile(const Graph& g, Vertex x, int rmax);

/// Boundary weight over volume of a finite set: sum_{a in A, b notin A} w(a,b) / pi(A).
double cheeger_of_set(const Graph& g, std::span<const Vertex> set);

struct SpectralEstimate {
    std::vector<double> return_probabilities;  ///< p_{2n}(x,x), n = 1..nmax/2
    std::vector<double> root_sequence;         ///< p_{2n}(x,x)^{1/2n}
    double ratio_estimate = 0.0;               ///< sqrt(p_{2n+2}/p_{2n}) at the largest n
    double estimate = 0.0;                     ///< Richardson-extrapolated ratio
    bool monotone = true;                      ///< p_{2n}(x,x) non-increasing in n
    double boundary_mass = 0.0;                ///< mass absorbed at the truncation by step nmax
    bool truncation_warning = false;
};

/// Spectral radius from return probabilities of the jump chain. nmax must be even and >= 4.
SpectralEstimate spectral_radius_estimate(const Graph& g, Vertex x, int nmax, double boundary_tol = 1e-9);

/// max pi / min pi, over every vertex or over the non-boundary vertices only.
double stationary_control_constant(const Graph& g, bool interior_only = false);

}  // namespace frogsim
