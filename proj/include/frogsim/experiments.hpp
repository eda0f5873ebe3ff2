#pragma once

// Runnable experiments built on the coupling and renormalization constructions.
// Every experiment returns an ExperimentReport: metric rows in the CSV schema
// plus named pass/fail checks.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "frogsim/estimate.hpp"
#include "frogsim/frogs.hpp"
#include "frogsim/graph.hpp"

namespace frogsim {

struct MetricRow {
    std::string metric;
    std::string graph;
    double lambda = 0.0;
    double t = 0.0;
    int n = 0;
    Estimate value;
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentReport {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<MetricRow> metrics;
    std::vector<Check> checks;
    std::vector<std::string> notes;

    bool passed() const;
    const MetricRow* find(const std::string& metric) const;
    const Check* find_check(const std::string& check) const;

    void add(std::string metric, const GraphSpec& g, double lambda, double t, int n, Estimate e);
    void check(std::string name, bool pass, std::string detail = {});

    static const char* csv_header();  ///< without trailing newline
    std::string csv_rows() const;     ///< one line per metric row
    std::string json() const;
};

/// Shortest round-trip decimal form used in every CSV and JSON number.
std::string format_number(double v);

// ---------------------------------------------------------------------------

/// First-jump edge coupling: {x,y} is open when a particle at x makes its first
/// jump to y and a particle at y makes its first jump to x. Only edges whose
/// endpoints are both interior and of degree Delta enter the rate estimate.
ExperimentReport bernoulli_edge_coupling(const Graph& g, const FrogParams& p, int replicas, std::uint64_t seed,
                                         int correlation_pairs = 16);

struct NetConfig {
    int a = 8;
    double beta = 0.25;
    int extent = 4;       ///< net vertices a (i, j) with |i| + |j| <= extent
    int halo = 0;         ///< extra box radius beyond the net balls (0 = automatic)

    int ball_radius() const { return a / 3; }
    int neighbor_distance() const;  ///< floor(4 beta a)
    int box_radius() const;
};

struct RenormalizationOptions {
    int replicas = 200;
    int a_scan_replicas = 0;  ///< > 0 also reports the open frequency for a in {8, 12, 16, 20, 24}
    int tail_replicas = 400;  ///< per candidate in the no-good-vertex estimate
    int direct_replicas = 400;
    std::vector<int> tail_sizes{4, 16, 64};
    int locality_replicas = 20;
};

/// Two-phase openness on the sublattice (a Z)^2 of a Z^2 box, lifespan a^2.
ExperimentReport renormalization_experiment(const NetConfig& net, double lambda, const RenormalizationOptions& opt,
                                            std::uint64_t seed);

struct OpenState {
    bool open = false;
    int good_count = 0;
};

/// Openness of the net vertex at `center` with the given phase fields.
OpenState net_vertex_state(const Graph& box, const NetConfig& net, Vertex center, double lambda,
                           const ParticleField& phase1, const ParticleField& phase2);

struct NoGoodEstimate {
    std::vector<int> sizes;
    std::vector<Estimate> log_probability;   ///< product estimator with independent fields
    std::vector<Estimate> direct;            ///< one shared field, plain frequency
    double slope = 0.0;                      ///< least-squares slope of log P vs |A|
};

/// P(no (B, lambda, a^2)-good vertex in A) for nested A inside B = B_0(a).
NoGoodEstimate no_good_vertex_decay(const Graph& box, int a, double lambda, const std::vector<int>& sizes,
                                    int replicas, int direct_replicas, std::uint64_t seed);

ExperimentReport abelian_invariance_check(const Graph& g, const FrogParams& p, const std::vector<std::uint64_t>& seeds);

ExperimentReport linear_growth_experiment(int width, int length, const FrogParams& p, const std::vector<int>& radii,
                                          int replicas, std::uint64_t seed, int annulus_outer = 50);

struct NonamenableOptions {
    std::vector<double> t_list{1.0, 2.0, 5.0, 10.0};
    int radius = 10;
    int replicas = 1000;
    int spectral_nmax = 40;
    double threshold = 0.1;
    int escape_radius = 3;
    int escape_replicas = 4000;
};

ExperimentReport nonamenable_pipeline(const Graph& g, double lambda, const NonamenableOptions& opt,
                                      std::uint64_t seed);

/// pi-weighted average over A of P_x(jump chain never returns to A), where
/// absorption at the truncation boundary counts as escape.
Estimate escape_probability(const Graph& g, std::span<const Vertex> A, int replicas, std::uint64_t seed,
                            int horizon = 100000);

}  // namespace frogsim
