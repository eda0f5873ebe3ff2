#pragma once

// Survival, cluster tails, the phi functionals, explicit constants, critical
// parameter search and branching-process oracles.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frogsim/estimate.hpp"
#include "frogsim/frogs.hpp"
#include "frogsim/graph.hpp"
#include "frogsim/walks.hpp"

namespace frogsim {

struct SurvivalResult {
    Estimate survival;
    std::int64_t budget_hits = 0;  ///< replicas stopped by the particle budget (counted as survivals)
    std::vector<std::uint8_t> indicators;  ///< per replica, in replica order
};

/// theta(n) = P(the cluster contains a vertex at distance >= n); n = 0 is read as
/// P(cluster != {0}). Replica r uses the field (seed, r) whatever the parameters,
/// so estimates at different (lambda, t) are coupled.
SurvivalResult survival_probability(const Graph& g, const FrogParams& p, int n, int replicas, std::uint64_t seed,
                                    std::int64_t particle_budget = 5'000'000);

struct TailCurve {
    std::vector<double> tail;  ///< tail[n] = P(|C| >= n), n = 0..nmax
    double slope = 0.0;        ///< least-squares slope of log tail over the fit window
    double r2 = 0.0;
    int fit_lo = 0;
    int fit_hi = 0;
    std::int64_t censored = 0;  ///< replicas that reached nmax (or the budget)
    int replicas = 0;
};

/// Empirical P(|C_0| >= n). The fit window is [max(2, m/2), m] where m is the
/// largest n <= nmax still seen by at least 10 replicas.
TailCurve cluster_size_tail(const Graph& g, const FrogParams& p, int nmax, int replicas, std::uint64_t seed);

struct PhiEstimate {
    Estimate phi;        ///< sum_x lambda P_x(exit) 1{0 -> x}, replica mean
    Estimate dual;       ///< |N(S)| replica mean
    Estimate paired_difference;
    std::vector<double> harpoon_frequency;  ///< aligned with `exits.domain`
    KilledWalkTable exits;
};

PhiEstimate phi_hat(const Graph& g, std::span<const Vertex> S, const FrogParams& p, int replicas,
                    std::uint64_t seed);

struct PhiTildeEstimate {
    Estimate phi_tilde;
    Estimate phi;
    std::vector<double> conditional_jumps;  ///< aligned with phi's domain; NaN where harpoon frequency is 0
    int capped_terms = 0;  ///< vertices whose conditional sampler accepted nothing (cap used)
};

/// Harpoon frequencies and exit probabilities as in phi_hat, conditional jump
/// means by rejection sampling with `conditional_replicas` walks per vertex.
PhiTildeEstimate phi_tilde_hat(const Graph& g, std::span<const Vertex> S, const FrogParams& p, int replicas,
                               std::uint64_t seed, int conditional_replicas = 20000);

struct SharpnessConstants {
    double delta = 0.0;
    double K = 0.0;
    double K_cap = 0.0;  ///< max{4 Delta, 2 Delta^2 e^t / (lambda t)}
    double log_C = 0.0;  ///< natural log of C; +inf when lambda = 0 or t = 0
    double C = 0.0;      ///< may be +inf when it overflows a double
    double c = 0.0;      ///< 1 / C, possibly 0 by underflow; use log_C for comparisons
    int series_terms = 0;
};

SharpnessConstants sharpness_constants(int Delta, double lambda, double t);

struct PhiReport {
    std::string set_label;
    PhiEstimate phi;
    PhiTildeEstimate phi_tilde;
    SharpnessConstants constants;
    bool subcritical = false;  ///< phi + 3 se < c
};

PhiReport phi_report(const Graph& g, std::span<const Vertex> S, std::string label, const FrogParams& p,
                     int replicas, std::uint64_t seed, int conditional_replicas = 20000);

enum class Parameter { lambda, t };
const char* to_string(Parameter p);

struct CriticalBracket {
    double lo = 0.0;
    double hi = 0.0;
    Parameter parameter = Parameter::lambda;
    double fixed_value = 0.0;
    Estimate at_lo;
    Estimate at_hi;
    bool reached_tolerance = false;
    std::vector<std::string> notes;
};

struct BisectionOptions {
    int radius = 10;
    int replicas = 400;
    int max_replicas = 6400;
    double threshold = 0.1;
    double tol = 0.05;
    int max_steps = 40;
};

/// Bisect the free parameter on [lo, hi]. A side is only moved when the estimate
/// is at least 3 s.e. from the threshold; otherwise replicas double up to
/// max_replicas and the current bracket is returned with a note. Throws
/// NoCrossingError when neither end is on its expected side.
CriticalBracket critical_bisection(const Graph& g, Parameter free, double fixed_value, double lo, double hi,
                                   const BisectionOptions& opt, std::uint64_t seed);

struct TildeScanRow {
    double value = 0.0;  ///< value of the free parameter
    Estimate inf_phi;    ///< minimum over the radii of phi-hat(B(r))
    int argmin_radius = 0;
    double log_c = 0.0;
    bool subcritical = false;  ///< inf_phi + 3 se < c
};

struct TildeScan {
    Parameter parameter = Parameter::lambda;
    double fixed_value = 0.0;
    std::vector<TildeScanRow> rows;
    std::optional<std::pair<double, double>> crossing;  ///< last subcritical, first non-subcritical grid value
};

/// Ball-restricted scan: inf over S in {B(r) : r in radii} only.
TildeScan tilde_critical_scan(const Graph& g, Parameter free, double fixed_value, std::span<const int> radii,
                              std::span<const double> grid, int replicas, std::uint64_t seed);

struct RussoReport {
    Parameter parameter = Parameter::lambda;
    Estimate probability;  ///< P(0 -> Lambda^c) at the base point
    Estimate derivative;   ///< forward finite difference
    Estimate inf_phi;      ///< inf over the candidate sets S of phi-hat(S)
    std::size_t candidate_sets = 0;
    Estimate rhs;
    bool holds = false;          ///< derivative >= rhs - 3 se
    bool precise_enough = true;  ///< derivative s.e. below its mean
};

/// Lambda = B(radius). Candidate sets are every connected S with 0 in S within
/// Lambda when there are at most `max_sets` of them, otherwise the balls.
RussoReport russo_inequality_check(const Graph& g, int radius, const FrogParams& p, Parameter which, double step,
                                   int replicas, std::uint64_t seed, int phi_replicas = 4000,
                                   std::size_t max_sets = 4096);

/// Connected vertex sets containing x inside `region`, up to `cap` of them
/// (empty result when the cap is exceeded).
std::vector<std::vector<Vertex>> connected_sets_containing(const Graph& g, Vertex x, std::span<const Vertex> region,
                                                           std::size_t cap);

struct GWResult {
    double mean = 0.0;
    double extinction = 1.0;
    double residual = 0.0;       ///< |f(q) - q|
    bool exponential_moment = false;  ///< some u > 1 with f(u) < u
    int iterations = 0;
};

/// Offspring pgf f(s) = exp(lambda (e^{t(s-1)} - 1)).
GWResult gw_oracle(double lambda, double t, double tol = 1e-12);
double gw_pgf(double lambda, double t, double s);

struct NonamenableBound {
    double bound = 0.0;
    double alpha = 0.0;
    double log_term = 0.0;  ///< log_rho((1 - rho) / (32 K))
};

NonamenableBound nonamenable_t_bound(double rho, double K, double lambda);

struct GoodSet {
    std::vector<Vertex> members;
    std::vector<double> probability;  ///< per vertex of A, P_x(|R(t) ∩ A^c| > alpha t)
    double fraction = 0.0;
    double threshold = 0.0;    ///< (1 - rho) / (4 K)
    double reference_bound = 0.0;  ///< (1 - rho) / (2 K)
};

GoodSet good_set_G_A(const Graph& g, std::span<const Vertex> A, double t, double alpha, double rho, double K,
                     int replicas, std::uint64_t seed);

}  // namespace frogsim
