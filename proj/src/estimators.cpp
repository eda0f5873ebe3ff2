#include "frogsim/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "frogsim/errors.hpp"
#include "frogsim/stamp_set.hpp"

namespace frogsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_replicas(int replicas) {
    if (replicas < 1) throw ValidationError("replicas must be >= 1");
}

void check_origin_in(std::span<const Vertex> S, const Graph& g) {
    if (std::find(S.begin(), S.end(), g.origin()) == S.end()) throw ValidationError("S must contain the origin");
}

struct LineFit {
    double slope = 0.0;
    double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) return f;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

// log(a) <= log(c) with c = exp(-log_C), tolerant of zeros and infinities
bool at_most_c(double value, double log_C) {
    if (value <= 0.0) return true;
    return std::log(value) <= -log_C;
}

}  // namespace

// ---------------------------------------------------------------------------
// Survival and cluster sizes

SurvivalResult survival_probability(const Graph& g, const FrogParams& p, int n, int replicas, std::uint64_t seed,
                                    std::int64_t particle_budget) {
    p.validate();
    check_replicas(replicas);
    if (n < 0) throw ValidationError("survival radius must be >= 0");
    if (n > g.truncation_radius())
        throw ValidationError("survival radius " + std::to_string(n) + " exceeds the truncation radius " +
                              std::to_string(g.truncation_radius()));
    StopRule stop;
    stop.radius = std::max(n, 1);
    stop.particle_budget = particle_budget;
    auto flags = parallel_map<std::uint8_t>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        ParticleField field(seed, derive_key(hash_name("survival"), {r}));
        Cluster c = explore_cluster(g, p, field, stop);
        if (c.stop_reason == StopReason::particle_budget) return std::uint8_t{2};
        if (n == 0) return std::uint8_t{c.size() > 1};
        return std::uint8_t{c.stop_reason == StopReason::radius_reached};
    });
    SurvivalResult out;
    std::int64_t hits = 0;
    out.indicators.reserve(flags.size());
    for (auto f : flags) {
        if (f == 2) ++out.budget_hits;
        const bool s = f != 0;
        hits += s;
        out.indicators.push_back(s);
    }
    out.survival = proportion(hits, replicas, seed, "mc-survival");
    return out;
}

TailCurve cluster_size_tail(const Graph& g, const FrogParams& p, int nmax, int replicas, std::uint64_t seed) {
    p.validate();
    check_replicas(replicas);
    if (nmax < 1) throw ValidationError("nmax must be >= 1");
    StopRule stop;
    stop.activated_target = static_cast<std::size_t>(nmax);
    struct Row {
        std::size_t size = 0;
        bool censored = false;
    };
    auto rows = parallel_map<Row>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        ParticleField field(seed, derive_key(hash_name("cluster_tail"), {r}));
        Cluster c = explore_cluster(g, p, field, stop);
        Row row;
        row.size = c.size();
        row.censored = c.stop_reason == StopReason::target_reached || c.stop_reason == StopReason::particle_budget ||
                       c.stop_reason == StopReason::radius_reached;
        if (row.censored) row.size = static_cast<std::size_t>(nmax);
        return row;
    });
    TailCurve tc;
    tc.replicas = replicas;
    std::vector<std::int64_t> at_least(static_cast<std::size_t>(nmax) + 1, 0);
    for (const Row& row : rows) {
        if (row.censored) ++tc.censored;
        const std::size_t s = std::min<std::size_t>(row.size, static_cast<std::size_t>(nmax));
        for (std::size_t k = 0; k <= s; ++k) ++at_least[k];
    }
    tc.tail.resize(at_least.size());
    int m = 0;
    for (std::size_t k = 0; k < at_least.size(); ++k) {
        tc.tail[k] = static_cast<double>(at_least[k]) / replicas;
        if (at_least[k] >= 10) m = static_cast<int>(k);
    }
    tc.fit_hi = m;
    tc.fit_lo = std::max(2, m / 2);
    std::vector<double> xs, ys;
    for (int k = tc.fit_lo; k <= tc.fit_hi; ++k) {
        if (tc.tail[static_cast<std::size_t>(k)] <= 0.0) continue;
        xs.push_back(k);
        ys.push_back(std::log(tc.tail[static_cast<std::size_t>(k)]));
    }
    LineFit fit = least_squares(xs, ys);
    tc.slope = fit.slope;
    tc.r2 = fit.r2;
    return tc;
}

// ---------------------------------------------------------------------------
// phi and phi-tilde

PhiEstimate phi_hat(const Graph& g, std::span<const Vertex> S, const FrogParams& p, int replicas,
                    std::uint64_t seed) {
    p.validate();
    check_replicas(replicas);
    check_origin_in(S, g);
    PhiEstimate out;
    out.exits = exit_probability_exact(g, S, p.t);
    const std::size_t n = out.exits.domain.size();
    std::unordered_map<Vertex, std::size_t> where;
    for (std::size_t i = 0; i < n; ++i) where.emplace(out.exits.domain[i], i);

    struct Row {
        double phi = 0.0;
        double dual = 0.0;
        std::vector<std::uint8_t> reached;
    };
    auto rows = parallel_map<Row>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        ParticleField field(seed, derive_key(hash_name("phi"), {r}));
        RestrictedActivation ra = restricted_activation(g, S, p, field, g.origin());
        Row row;
        row.reached.assign(n, 0);
        for (std::size_t i = 0; i < ra.S.size(); ++i) {
            if (!ra.harpoon[i]) continue;
            const std::size_t j = where.at(ra.S[i]);
            row.reached[j] = 1;
            row.phi += p.lambda * out.exits.exit_prob[j];
        }
        row.dual = static_cast<double>(ra.exiters);
        return row;
    });
    std::vector<double> phi, dual, diff;
    out.harpoon_frequency.assign(n, 0.0);
    for (const Row& row : rows) {
        phi.push_back(row.phi);
        dual.push_back(row.dual);
        diff.push_back(row.phi - row.dual);
        for (std::size_t j = 0; j < n; ++j) out.harpoon_frequency[j] += row.reached[j];
    }
    for (double& h : out.harpoon_frequency) h /= replicas;
    out.phi = estimate_from(phi, seed, "exact-exit x mc-harpoon");
    out.dual = estimate_from(dual, seed, "mc-exiters");
    out.paired_difference = estimate_from(diff, seed, "mc-paired");
    return out;
}

PhiTildeEstimate phi_tilde_hat(const Graph& g, std::span<const Vertex> S, const FrogParams& p, int replicas,
                               std::uint64_t seed, int conditional_replicas) {
    check_replicas(conditional_replicas);
    PhiEstimate base = phi_hat(g, S, p, replicas, seed);
    PhiTildeEstimate out;
    out.phi = base.phi;
    const auto& dom = base.exits.domain;
    const std::size_t n = dom.size();
    out.conditional_jumps.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> jump_se(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (base.harpoon_frequency[i] <= 0.0 || base.exits.exit_prob[i] <= 0.0) continue;
        ConditionalJumps cj =
            exit_conditional_jumps(g, S, dom[i], p.t, conditional_replicas, derive_key(seed, {hash_name("tilde"), dom[i]}));
        if (cj.accepted == 0) {
            out.conditional_jumps[i] = cj.bound;
            ++out.capped_terms;
        } else {
            out.conditional_jumps[i] = cj.conditional_mean.mean;
            jump_se[i] = cj.conditional_mean.stderr();
        }
    }
    // replay the harpoon replicas with the conditional means as fixed weights
    std::unordered_map<Vertex, std::size_t> where;
    for (std::size_t i = 0; i < n; ++i) where.emplace(dom[i], i);
    auto values = parallel_map<double>(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        ParticleField field(seed, derive_key(hash_name("phi"), {r}));
        RestrictedActivation ra = restricted_activation(g, S, p, field, g.origin());
        double v = 0.0;
        for (std::size_t k = 0; k < ra.S.size(); ++k) {
            if (!ra.harpoon[k]) continue;
            const std::size_t j = where.at(ra.S[k]);
            if (std::isnan(out.conditional_jumps[j])) continue;
            v += p.lambda * base.exits.exit_prob[j] * out.conditional_jumps[j];
        }
        return v;
    });
    out.phi_tilde = estimate_from(values, seed, "exact-exit x mc-harpoon x mc-conditional-jumps");
    // delta method: add the variance carried by the conditional means
    double extra = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = p.lambda * base.exits.exit_prob[i] * base.harpoon_frequency[i];
        extra += w * w * jump_se[i] * jump_se[i];
    }
    out.phi_tilde.stderr_ = std::sqrt(out.phi_tilde.stderr_ * out.phi_tilde.stderr_ + extra);
    return out;
}

// ---------------------------------------------------------------------------
// Constants

SharpnessConstants sharpness_constants(int Delta, double lambda, double t) {
    if (Delta < 1) throw ValidationError("Delta must be >= 1");
    FrogParams{lambda, t}.validate();
    SharpnessConstants k;
    const double D = Delta;
    k.delta = -std::expm1(-(lambda / D) * t * std::exp(-t));
    if (lambda == 0.0 || t == 0.0) {
        k.K = kInf;
        k.K_cap = kInf;
        k.log_C = kInf;
        k.C = kInf;
        k.c = 0.0;
        return k;
    }
    k.K = D / k.delta;
    k.K_cap = std::max(4.0 * D, 2.0 * D * D * std::exp(t) / (lambda * t));

    const double logA = std::log(4.0 * D * D + 2.0 * D * D * D * std::exp(t) / (lambda * t));
    const double log_one_minus = std::log(-std::expm1(-t));
    const double log_first = std::log(2.0) + 2.0 * std::log(t + 1.0) + std::log(D) - log_one_minus + (t + 1.0) * logA;
    const double log_pref = std::log(2.0 * t * D * D) - log_one_minus;

    // sum_{r >= floor(t+1)} A^{r-1} e^{r-t} (t/r)^{r-1}, accumulated in log space
    const long r0 = static_cast<long>(std::floor(t + 1.0));
    const double logt = std::log(t);
    auto log_term = [&](long r) {
        const double rr = static_cast<double>(r);
        return (rr - 1.0) * logA + (rr - t) + (rr - 1.0) * (logt - std::log(rr));
    };
    double log_sum = -kInf;
    int terms = 0;
    for (long r = r0;; ++r) {
        const double lt = log_term(r);
        log_sum = log_sum == -kInf ? lt : std::max(log_sum, lt) + std::log1p(std::exp(-std::abs(log_sum - lt)));
        ++terms;
        // successive ratio A e t r^{r-1} / (r+1)^r is decreasing in r; once it is
        // <= 1/2 the remainder is at most the current term
        const double log_ratio = log_term(r + 1) - lt;
        if (log_ratio <= std::log(0.5) && lt - log_sum < std::log(1e-12)) break;
        if (terms > 50'000'000) throw TruncationError("sharpness constant series did not converge");
    }
    const double log_second = log_pref + log_sum;
    k.log_C = std::max(log_first, log_second) + std::log1p(std::exp(-std::abs(log_first - log_second)));
    k.C = std::exp(k.log_C);
    k.c = std::exp(-k.log_C);
    k.series_terms = terms;
    return k;
}

PhiReport phi_report(const Graph& g, std::span<const Vertex> S, std::string label, const FrogParams& p,
                     int replicas, std::uint64_t seed, int conditional_replicas) {
    PhiReport rep;
    rep.set_label = std::move(label);
    rep.phi_tilde = phi_tilde_hat(g, S, p, replicas, seed, conditional_replicas);
    rep.phi = phi_hat(g, S, p, replicas, seed);
    rep.constants = sharpness_constants(static_cast<int>(g.max_out_degree()), p.lambda, p.t);
    rep.subcritical = at_most_c(rep.phi.phi.mean + 3.0 * rep.phi.phi.stderr(), rep.constants.log_C);
    return rep;
}

// ---------------------------------------------------------------------------
// Critical parameters

const char* to_string(Parameter p) { return p == Parameter::lambda ? "lambda" : "t"; }

namespace {

FrogParams with_value(Parameter free, double fixed, double value) {
    return free == Parameter::lambda ? FrogParams{value, fixed} : FrogParams{fixed, value};
}

enum class Side { below, above, unsure };

Side classify(const Estimate& e, double threshold) {
    if (e.mean + 3.0 * e.stderr() < threshold) return Side::below;
    if (e.mean - 3.0 * e.stderr() > threshold) return Side::above;
    return Side::unsure;
}

}  // namespace

CriticalBracket critical_bisection(const Graph& g, Parameter free, double fixed_value, double lo, double hi,
                                   const BisectionOptions& opt, std::uint64_t seed) {
    if (!(lo < hi)) throw ValidationError("bisection needs lo < hi");
    if (!(opt.threshold > 0.0 && opt.threshold < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
    if (!(opt.tol > 0.0)) throw ValidationError("tol must be > 0");
    check_replicas(opt.replicas);
    CriticalBracket b;
    b.parameter = free;
    b.fixed_value = fixed_value;

    // evaluate with doubling replicas until the side is decided or the cap is hit
    auto evaluate = [&](double value, Side& side) {
        int reps = opt.replicas;
        Estimate e;
        for (;;) {
            e = survival_probability(g, with_value(free, fixed_value, value), opt.radius, reps, seed).survival;
            side = classify(e, opt.threshold);
            if (side != Side::unsure || reps * 2 > opt.max_replicas) return e;
            reps *= 2;
        }
    };

    Side s_lo, s_hi;
    b.at_lo = evaluate(lo, s_lo);
    b.at_hi = evaluate(hi, s_hi);
    if (s_lo == Side::above)
        throw NoCrossingError("survival already above the threshold at the lower end " + std::to_string(lo));
    if (s_hi == Side::below)
        throw NoCrossingError("survival stays below the threshold up to " + std::to_string(hi));
    if (s_lo == Side::unsure) b.notes.push_back("lower end not separated from the threshold at the replica cap");
    if (s_hi == Side::unsure) b.notes.push_back("upper end not separated from the threshold at the replica cap");
    b.lo = lo;
    b.hi = hi;
    for (int step = 0; step < opt.max_steps && b.hi - b.lo > opt.tol; ++step) {
        const double mid = 0.5 * (b.lo + b.hi);
        Side s;
        Estimate e = evaluate(mid, s);
        if (s == Side::unsure) {
            b.notes.push_back("stopped at " + std::to_string(mid) + ": estimate " + std::to_string(e.mean) +
                              " within 3 s.e. of the threshold at the replica cap");
            break;
        }
        if (s == Side::below) {
            b.lo = mid;
            b.at_lo = e;
        } else {
            b.hi = mid;
            b.at_hi = e;
        }
    }
    b.reached_tolerance = b.hi - b.lo <= opt.tol;
    return b;
}

TildeScan tilde_critical_scan(const Graph& g, Parameter free, double fixed_value, std::span<const int> radii,
                              std::span<const double> grid, int replicas, std::uint64_t seed) {
    if (radii.empty()) throw ValidationError("tilde scan needs at least one radius");
    std::vector<std::vector<Vertex>> balls;
    for (int r : radii) {
        if (r < 0 || r >= g.truncation_radius()) throw ValidationError("scan radius must lie inside the truncation");
        balls.push_back(ball(g, g.origin(), r));
    }
    TildeScan scan;
    scan.parameter = free;
    scan.fixed_value = fixed_value;
    const int Delta = static_cast<int>(g.max_out_degree());
    std::optional<double> last_sub;
    for (double v : grid) {
        const FrogParams p = with_value(free, fixed_value, v);
        TildeScanRow row;
        row.value = v;
        bool first = true;
        for (std::size_t k = 0; k < balls.size(); ++k) {
            Estimate e = phi_hat(g, balls[k], p, replicas, seed).phi;
            if (first || e.mean < row.inf_phi.mean) {
                row.inf_phi = e;
                row.argmin_radius = radii[k];
                first = false;
            }
        }
        const SharpnessConstants sc = sharpness_constants(Delta, p.lambda, p.t);
        row.log_c = -sc.log_C;
        row.subcritical = at_most_c(row.inf_phi.mean + 3.0 * row.inf_phi.stderr(), sc.log_C);
        if (row.subcritical) {
            last_sub = v;
        } else if (last_sub && !scan.crossing) {
            scan.crossing = std::make_pair(*last_sub, v);
        }
        scan.rows.push_back(row);
    }
    return scan;
}

// ---------------------------------------------------------------------------
// Russo-type check

std::vector<std::vector<Vertex>> connected_sets_containing(const Graph& g, Vertex x, std::span<const Vertex> region,
                                                           std::size_t cap) {
    if (region.size() > 64) return {};
    std::unordered_map<Vertex, int> idx;
    for (std::size_t i = 0; i < region.size(); ++i) idx.emplace(region[i], static_cast<int>(i));
    auto it = idx.find(x);
    if (it == idx.end()) throw ValidationError("x must lie in the region");
    std::vector<std::uint64_t> nbr(region.size(), 0);
    for (std::size_t i = 0; i < region.size(); ++i) {
        for (Vertex y : g.out_neighbors(region[i])) {
            auto j = idx.find(y);
            if (j != idx.end()) nbr[i] |= std::uint64_t{1} << j->second;
        }
    }
    const std::uint64_t start = std::uint64_t{1} << it->second;
    std::unordered_set<std::uint64_t> seen{start};
    std::vector<std::uint64_t> order{start};
    for (std::size_t h = 0; h < order.size(); ++h) {
        const std::uint64_t set = order[h];
        std::uint64_t grow = 0;
        for (std::uint64_t rest = set; rest; rest &= rest - 1) grow |= nbr[static_cast<std::size_t>(std::countr_zero(rest))];
        grow &= ~set;
        for (; grow; grow &= grow - 1) {
            const std::uint64_t next = set | (grow & (~grow + 1));
            if (seen.insert(next).second) {
                order.push_back(next);
                if (order.size() > cap) return {};
            }
        }
    }
    std::vector<std::vector<Vertex>> out;
    out.reserve(order.size());
    for (std::uint64_t set : order) {
        std::vector<Vertex> s;
        for (std::uint64_t rest = set; rest; rest &= rest - 1) s.push_back(region[static_cast<std::size_t>(std::countr_zero(rest))]);
        // origin first keeps the harpoon root at the front
        std::stable_partition(s.begin(), s.end(), [&](Vertex v) { return v == x; });
        out.push_back(std::move(s));
    }
    return out;
}

RussoReport russo_inequality_check(const Graph& g, int radius, const FrogParams& p, Parameter which, double step,
                                   int replicas, std::uint64_t seed, int phi_replicas, std::size_t max_sets) {
    p.validate();
    if (!(p.lambda > 0.0 && p.t > 0.0)) throw ValidationError("the Russo-type check needs lambda > 0 and t > 0");
    if (!(step > 0.0)) throw ValidationError("finite-difference step must be > 0");
    if (radius < 0 || radius + 1 > g.truncation_radius())
        throw ValidationError("Lambda = B(radius) must stay inside the truncation");
    check_replicas(replicas);
    RussoReport rep;
    rep.parameter = which;

    const FrogParams q = which == Parameter::lambda ? FrogParams{p.lambda + step, p.t} : FrogParams{p.lambda, p.t + step};
    SurvivalResult base = survival_probability(g, p, radius + 1, replicas, seed);
    SurvivalResult moved = survival_probability(g, q, radius + 1, replicas, seed);
    rep.probability = base.survival;
    std::vector<double> diff(static_cast<std::size_t>(replicas));
    for (std::size_t r = 0; r < diff.size(); ++r)
        diff[r] = (static_cast<double>(moved.indicators[r]) - base.indicators[r]) / step;
    rep.derivative = estimate_from(diff, seed, "mc-finite-difference");

    const std::vector<Vertex> region = ball(g, g.origin(), radius);
    std::vector<std::vector<Vertex>> sets = connected_sets_containing(g, g.origin(), region, max_sets);
    if (sets.empty()) {
        for (int r = 0; r <= radius; ++r) sets.push_back(ball(g, g.origin(), r));
    }
    rep.candidate_sets = sets.size();
    bool first = true;
    for (const auto& S : sets) {
        Estimate e = phi_hat(g, S, p, phi_replicas, seed).phi;
        if (first || e.mean < rep.inf_phi.mean) {
            rep.inf_phi = e;
            first = false;
        }
    }
    const double factor = which == Parameter::lambda ? 1.0 / p.lambda : p.lambda * std::exp(-p.t) / p.t;
    const double P = rep.probability.mean;
    rep.rhs.mean = factor * rep.inf_phi.mean * (1.0 - P);
    rep.rhs.stderr_ = factor * std::hypot((1.0 - P) * rep.inf_phi.stderr(), rep.inf_phi.mean * rep.probability.stderr());
    rep.rhs.replicas = replicas;
    rep.rhs.seed = seed;
    rep.rhs.method = "inf phi-hat x (1 - P)";
    const double slack = 3.0 * std::hypot(rep.derivative.stderr(), rep.rhs.stderr());
    rep.holds = rep.derivative.mean >= rep.rhs.mean - slack;
    rep.precise_enough = rep.derivative.stderr() < rep.derivative.mean;
    return rep;
}

// ---------------------------------------------------------------------------
// Branching-process oracle and the non-amenable bound

double gw_pgf(double lambda, double t, double s) { return std::exp(lambda * std::expm1(t * (s - 1.0))); }

GWResult gw_oracle(double lambda, double t, double tol) {
    FrogParams{lambda, t}.validate();
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
    GWResult out;
    out.mean = lambda * t;
    for (int k = 1; k <= 8 && !out.exponential_moment; ++k) {
        const double u = 1.0 + std::pow(10.0, -k);
        if (gw_pgf(lambda, t, u) < u) out.exponential_moment = true;
    }
    if (out.mean <= 1.0) {
        // f is convex with f'(1) <= 1, so 1 is the least fixed point
        out.extinction = 1.0;
        out.residual = std::abs(gw_pgf(lambda, t, 1.0) - 1.0);
        return out;
    }
    double q = 0.0;
    for (int it = 1; it <= 1'000'000; ++it) {
        const double next = gw_pgf(lambda, t, q);
        out.iterations = it;
        if (std::abs(next - q) <= tol * 1e-3) {
            q = next;
            break;
        }
        q = next;
    }
    out.extinction = q;
    out.residual = std::abs(gw_pgf(lambda, t, q) - q);
    if (out.residual > tol) throw TruncationError("extinction iteration did not reach tolerance");
    return out;
}

NonamenableBound nonamenable_t_bound(double rho, double K, double lambda) {
    if (!(rho > 0.0)) throw ValidationError("rho must be > 0");
    if (!(rho < 1.0)) throw ValidationError("rho must be < 1 (amenable input has rho = 1)");
    if (!(K >= 1.0)) throw ValidationError("K must be >= 1");
    if (!(lambda > 0.0)) throw ValidationError("lambda must be > 0");
    NonamenableBound b;
    b.log_term = std::log((1.0 - rho) / (32.0 * K)) / std::log(rho);
    b.alpha = 1.0 / (4.0 * std::ceil(b.log_term));
    b.bound = 200.0 * K * K * (b.log_term + 1.0) / ((1.0 - rho) * (1.0 - rho) * std::min(1.0, lambda));
    return b;
}

GoodSet good_set_G_A(const Graph& g, std::span<const Vertex> A, double t, double alpha, double rho, double K,
                     int replicas, std::uint64_t seed) {
    check_replicas(replicas);
    if (A.empty()) throw ValidationError("A must be non-empty");
    if (!(alpha > 0.0)) throw ValidationError("alpha must be > 0");
    FrogParams{0.0, t}.validate();
    VertexMask inA(g.vertex_count(), A);
    GoodSet out;
    out.threshold = (1.0 - rho) / (4.0 * K);
    out.reference_bound = (1.0 - rho) / (2.0 * K);
    out.probability = parallel_map<double>(A.size(), [&](std::size_t i) {
        const Vertex x = A[i];
        StampSet& seen = scratch_set(g.vertex_count(), 1);
        std::int64_t hits = 0;
        for (int r = 0; r < replicas; ++r) {
            seen.clear();
            std::int64_t outside = 0;
            run_walk(g, x, t, Stream(seed, {hash_name("good_set"), x, static_cast<std::uint64_t>(r)}), [&](Vertex v) {
                if (!inA.contains(v) && seen.insert(v)) ++outside;
                return true;
            });
            if (static_cast<double>(outside) > alpha * t) ++hits;
        }
        return static_cast<double>(hits) / replicas;
    });
    for (std::size_t i = 0; i < A.size(); ++i) {
        if (out.probability[i] >= out.threshold) out.members.push_back(A[i]);
    }
    out.fraction = static_cast<double>(out.members.size()) / static_cast<double>(A.size());
    return out;
}

}  // namespace frogsim
