// Acceptance run: one PASS/FAIL line per criterion.
//
//   frogsim_acceptance [--only k,...] [--allow-fail k,...] [--workers w]
//
// Exit status is 0 when every criterion passed or is listed in --allow-fail.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "frogsim/config.hpp"
#include "frogsim/estimators.hpp"
#include "frogsim/experiments.hpp"
#include "frogsim/frogs.hpp"
#include "frogsim/walks.hpp"

using namespace frogsim;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) { return format_number(v); }

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// 1
Outcome abelian() {
    Graph g = build_graph(GraphSpec::regular_tree(3, 12));
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t k = 0; k < 1000; ++k) seeds.push_back(derive_key(1, {k}));
    ExperimentReport r = abelian_invariance_check(g, FrogParams{1.0, 1.0}, seeds);
    return {r.passed(), r.find_check("abelian_all_match")->detail + ", three schedules each"};
}

// 2
Outcome subcritical() {
    Graph g = build_graph(GraphSpec::regular_tree(3, 20));
    SurvivalResult s = survival_probability(g, FrogParams{0.5, 1.0}, 20, 2000, 2);
    TailCurve tc = cluster_size_tail(g, FrogParams{0.5, 1.0}, 30, 2000, 2);
    const bool ok = s.survival.mean <= 0.01 && tc.slope < 0.0 && tc.r2 >= 0.9;
    return {ok, "theta(20) " + num(s.survival.mean) + ", tail slope " + fmt("%.3f", tc.slope) + ", R2 " +
                    fmt("%.3f", tc.r2)};
}

// 3
Outcome edge_rate() {
    Graph g = build_graph(GraphSpec::regular_tree(3, 9));
    ExperimentReport r = bernoulli_edge_coupling(g, FrogParams{2.0, 1.0}, 140, 3);
    const Estimate& e = r.find("edge_open_rate")->value;
    const double target = std::pow(1.0 - std::exp(-2.0 * (1.0 - std::exp(-1.0)) / 3.0), 2.0);
    return {e.replicas >= 100000 && e.within(target),
            "rate " + fmt("%.5f", e.mean) + " +- " + fmt("%.5f", e.stderr()) + " vs " + fmt("%.5f", target) + " over " +
                std::to_string(e.replicas) + " trials"};
}

// 4
Outcome exact_walks() {
    Graph z = build_graph(GraphSpec::lattice_box(2, 40));
    Graph t = build_graph(GraphSpec::regular_tree(3, 16));
    const Vertex one[] = {0};
    const double single = exit_probability_exact(z, one, 1.0).at(0);
    bool ok = std::abs(single - (1.0 - std::exp(-1.0))) <= 1e-10;
    Stream pick(4, {hash_name("acceptance-triples")});
    int agree = 0;
    for (int k = 0; k < 10; ++k) {
        const Graph& g = k % 2 ? t : z;
        const int r = 1 + static_cast<int>(pick.below(3));
        auto S = ball(g, 0, r);
        const Vertex x = S[pick.below(S.size())];
        const double tt = 0.5 + 4.5 * pick.uniform();
        const double exact = exit_probability_exact(g, S, tt).at(x);
        agree += exit_frequency_mc(g, S, x, tt, 20000, derive_key(4, {static_cast<std::uint64_t>(k)})).within(exact);
    }
    double worst = 0.0;
    // horizons short enough that mass reaching the absorbing boundary is below 1e-10
    for (double tt : {0.5, 2.0, 10.0}) worst = std::max(worst, std::abs(heat_kernel_row(z, 0, tt).sum() - 1.0));
    for (double tt : {0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(heat_kernel_row(t, 0, tt).sum() - 1.0));
    ok = ok && agree == 10 && worst <= 1e-9;
    return {ok, "single-vertex error " + fmt("%.1e", std::abs(single - (1.0 - std::exp(-1.0)))) + ", MC " +
                    std::to_string(agree) + "/10 within 3 se, row-sum error " + fmt("%.1e", worst)};
}

// 5
Outcome phi_closed_form() {
    Graph t = build_graph(GraphSpec::regular_tree(3, 8));
    Graph z = build_graph(GraphSpec::lattice_box(2, 8));
    const Vertex S0[] = {0};
    PhiEstimate p0 = phi_hat(t, S0, FrogParams{1.0, 1.0}, 4000, 5);
    PhiTildeEstimate pt = phi_tilde_hat(t, S0, FrogParams{1.0, 1.0}, 4000, 5, 40000);
    bool ok = p0.phi.within(0.63212, 3.0, 5e-6) && pt.phi_tilde.within(1.0);
    int dual_ok = 0;
    std::uint64_t k = 0;
    for (const Graph* g : {&z, &t}) {
        for (int r : {1, 2}) {
            const std::uint64_t s = derive_key(6, {k++});
            dual_ok += phi_hat(*g, ball(*g, 0, r), FrogParams{1.0, 1.0}, 8000, s).paired_difference.within(0.0);
        }
    }
    ok = ok && dual_ok == 4;
    return {ok, "phi({0}) " + fmt("%.5f", p0.phi.mean) + ", phi~({0}) " + fmt("%.4f", pt.phi_tilde.mean) + " +- " +
                    fmt("%.4f", pt.phi_tilde.stderr()) + ", dual identity " + std::to_string(dual_ok) + "/4"};
}

// 6
Outcome constant_comparison() {
    Graph t = build_graph(GraphSpec::regular_tree(3, 9));
    int ok = 0, total = 0;
    double worst_log_gap = 1e300;
    for (auto [l, tt] : {std::pair{1.0, 1.0}, {0.5, 2.0}}) {
        const SharpnessConstants k = sharpness_constants(3, l, tt);
        for (int r : {1, 2}) {
            ++total;
            auto S = ball(t, 0, r);
            PhiTildeEstimate pt = phi_tilde_hat(t, S, FrogParams{l, tt}, 3000, 8, 5000);
            const double upper = pt.phi_tilde.mean + 3.0 * pt.phi_tilde.stderr();
            const double lower = pt.phi.mean - 3.0 * pt.phi.stderr();
            // compare in log space; C can overflow a double
            if (upper > 0.0 && lower > 0.0) {
                const double gap = k.log_C + std::log(lower) - std::log(upper);
                worst_log_gap = std::min(worst_log_gap, gap);
                ok += gap > 0.0;
            }
        }
    }
    const bool zero = sharpness_constants(3, 0.0, 1.0).c == 0.0;
    return {ok == total && zero, std::to_string(ok) + "/" + std::to_string(total) +
                                     " with margin, smallest log(C phi / phi~) " + fmt("%.1f", worst_log_gap) +
                                     ", c(3,0,1) = " + num(sharpness_constants(3, 0.0, 1.0).c)};
}

// 7
Outcome activation_profile() {
    Graph t = build_graph(GraphSpec::regular_tree(3, 10));
    auto S = ball(t, 0, 4);
    SphereProfile sp = sphere_activation_profile(t, S, FrogParams{1.0, 1.0}, 4000, 7);
    const double K = sharpness_constants(3, 1.0, 1.0).K;
    bool ok = true;
    std::ostringstream os;
    for (int r = 1; r <= 4; ++r) {
        const Estimate& a = sp.shells[static_cast<std::size_t>(r)];
        const double bound = std::pow(K, r - 1) * sp.shells[1].mean;
        const double se = std::hypot(a.stderr(), std::pow(K, r - 1) * sp.shells[1].stderr());
        ok = ok && a.mean <= bound + 3.0 * se;
        os << (r > 1 ? ", " : "") << "E|A_" << r << "| " << fmt("%.3f", a.mean);
    }
    os << " (K " << fmt("%.2f", K) << ")";
    return {ok, os.str()};
}

// 8
Outcome range_scaling() {
    Graph z2 = build_graph(GraphSpec::lattice_box(2, 160));
    Graph z3 = build_graph(GraphSpec::lattice_box(3, 60));
    const std::vector<Vertex> none;
    std::vector<double> r2, r3;
    for (int a : {8, 16, 32}) {
        RangeStats s = range_statistics(z2, 0, double(a) * a, none, none, 0.1, 1000, 8);
        r2.push_back(s.range.mean * std::log(double(a)) / (double(a) * a));
    }
    for (int a : {6, 10, 14}) {
        RangeStats s = range_statistics(z3, 0, double(a) * a, none, none, 0.1, 1000, 8);
        r3.push_back(s.range.mean / (double(a) * a));
    }
    auto ratio = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
    };
    const double q2 = ratio(r2), q3 = ratio(r3);
    return {q2 <= 2.0 && q3 <= 1.5, "Z2 ratio " + fmt("%.3f", q2) + ", Z3 ratio " + fmt("%.3f", q3)};
}

// 9
Outcome spectral() {
    Graph t = build_graph(GraphSpec::regular_tree(3, 20));
    Graph z = build_graph(GraphSpec::lattice_box(2, 60));
    const double rt = spectral_radius_estimate(t, 0, 40).estimate;
    const double rz = spectral_radius_estimate(z, 0, 40).estimate;
    const double target = 2.0 * std::sqrt(2.0) / 3.0;
    return {std::abs(rt - target) <= 0.03 && rz >= 0.99,
            "tree " + fmt("%.4f", rt) + " vs " + fmt("%.5f", target) + ", Z2 " + fmt("%.4f", rz)};
}

// 10
Outcome gw() {
    int ones = 0;
    for (auto [l, t] : {std::pair{0.5, 1.0}, {1.0, 1.0}, {0.25, 4.0}, {2.0, 0.5}, {0.1, 3.0}, {0.9, 0.9}})
        ones += gw_oracle(l, t).extinction == 1.0;
    GWResult g = gw_oracle(2.0, 1.0);
    return {ones == 6 && g.residual <= 1e-10,
            std::to_string(ones) + "/6 exact extinctions, q(2,1) " + fmt("%.10f", g.extinction) + " residual " +
                fmt("%.1e", g.residual)};
}

// 11
Outcome nonamenable() {
    const NonamenableBound b = nonamenable_t_bound(0.9428, 1.0, 1.0);
    // 200 (L + 1) / (1 - rho)^2 with L = log_rho((1 - rho) / 32), evaluated at 40 digits
    const double independent = 6627235.410062652;
    const bool bound_ok = std::abs(b.bound / independent - 1.0) <= 0.01 && std::abs(b.bound / 6.63e6 - 1.0) <= 0.01;
    Graph t = build_graph(GraphSpec::regular_tree(3, 14));
    NonamenableOptions opt;
    opt.t_list = {1.0, 2.0, 5.0, 10.0};
    opt.radius = 10;
    opt.replicas = 1000;
    ExperimentReport r = nonamenable_pipeline(t, 1.0, opt, 11);
    double s10 = 0.0;
    for (const auto& m : r.metrics)
        if (m.metric == "survival" && m.t == 10.0) s10 = m.value.mean;
    const bool ok = bound_ok && s10 >= 0.5 && r.find_check("bracket_below_bound")->pass &&
                    r.find_check("escape_at_least_one_minus_rho")->pass;
    return {ok, "bound " + fmt("%.6g", b.bound) + ", theta(t=10) " + fmt("%.3f", s10) + ", escape " +
                    fmt("%.3f", r.find("escape_probability")->value.mean) + " vs 1-rho " +
                    fmt("%.3f", 1.0 - r.find("spectral_radius")->value.mean)};
}

// 12
Outcome linear_growth() {
    ExperimentReport r = linear_growth_experiment(2, 240, FrogParams{2.0, 2.0}, {50, 100, 200}, 500, 12);
    double s200 = 1.0;
    for (const auto& m : r.metrics)
        if (m.metric == "survival" && m.n == 200) s200 = m.value.mean;
    return {s200 <= 0.05 && r.passed(), "theta(200) " + num(s200) + ", blocking " +
                                            fmt("%.4g", r.find("blocking_probability")->value.mean)};
}

// 13
Outcome renormalization() {
    NetConfig net;
    RenormalizationOptions opt;
    opt.replicas = 100;
    opt.locality_replicas = 5;
    ExperimentReport r = renormalization_experiment(net, 4.0, opt, 13);
    const Estimate& open = r.find("open_frequency")->value;
    const bool decay = r.find_check("no_good_strictly_decreasing")->pass;
    std::ostringstream os;
    os << "open frequency " << fmt("%.3f", open.mean) << " (needs 0.75), P(no good) decreasing: " << (decay ? "yes" : "no")
       << ", log P at |A|=4,16,64:";
    for (const auto& m : r.metrics)
        if (m.metric == "log_p_no_good") os << " " << fmt("%.1f", m.value.mean);
    return {open.mean >= 0.75 && decay, os.str()};
}

// 14
Outcome determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "frogsim_acceptance_det";
    std::filesystem::remove_all(dir);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    const char* configs[] = {
        "experiment=survival\ngraph=tree:3:16\nlambda=0.5:3:0.5\nt=1\nn=12\nreplicas=500\nseed=7\n",
        "experiment=phi\ngraph=tree:3:8\nlambda=1\nt=1\nset_radius=1\nreplicas=2000\nconditional_replicas=2000\nseed=3\n",
        "experiment=edge_coupling\ngraph=tree:3:8\nlambda=2\nt=1\nreplicas=100\nseed=5\n",
    };
    int same = 0;
    for (const char* text : configs) {
        RunConfig cfg = RunConfig::parse(text);
        std::string csv[2];
        for (int k = 0; k < 2; ++k) {
            cfg.set("workers", k == 0 ? "1" : "4");
            cfg.set("out", (dir / std::to_string(k)).string());
            if (run(cfg).status != 0) return {false, "run failed for " + cfg.experiment()};
            csv[k] = slurp(dir / std::to_string(k) / "results.csv");
        }
        same += !csv[0].empty() && csv[0] == csv[1];
    }
    std::filesystem::remove_all(dir);
    return {same == 3, std::to_string(same) + "/3 experiments byte-identical for workers 1 and 4"};
}

// 15
Outcome russo() {
    Graph t = build_graph(GraphSpec::regular_tree(3, 8));
    std::ostringstream os;
    bool ok = true;
    for (Parameter p : {Parameter::lambda, Parameter::t}) {
        RussoReport r = russo_inequality_check(t, 2, FrogParams{1.5, 1.0}, p, 0.05, 20000, 15, 4000);
        ok = ok && r.holds;
        os << (p == Parameter::lambda ? "" : "; ") << "d/d" << to_string(p) << " " << fmt("%.3f", r.derivative.mean)
           << " +- " << fmt("%.3f", r.derivative.stderr()) << " vs rhs " << fmt("%.3f", r.rhs.mean);
    }
    return {ok, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only, allow;
    int workers = 0;
    app.add_option("--only", only, "run only these criteria")->delimiter(',');
    app.add_option("--allow-fail", allow, "criteria whose failure does not change the exit status")->delimiter(',');
    app.add_option("--workers", workers, "worker threads (0 = all cores)");
    CLI11_PARSE(app, argc, argv);
    set_worker_count(workers);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"abelian invariance", abelian},
        {"subcritical extinction", subcritical},
        {"edge-coupling probability", edge_rate},
        {"exact-walk oracles", exact_walks},
        {"phi closed form and dual", phi_closed_form},
        {"phi~ < C phi", constant_comparison},
        {"activation shell growth", activation_profile},
        {"range scaling", range_scaling},
        {"spectral radius", spectral},
        {"galton-watson oracle", gw},
        {"non-amenable pipeline", nonamenable},
        {"linear growth", linear_growth},
        {"renormalization", renormalization},
        {"determinism", determinism},
        {"russo inequality", russo},
    };
    const std::set<int> chosen(only.begin(), only.end()), allowed(allow.begin(), allow.end());
    int failed = 0, unexpected = 0, ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!chosen.empty() && !chosen.count(id)) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %-26s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, secs, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) {
            ++failed;
            if (!allowed.count(id)) ++unexpected;
        }
    }
    std::printf("%d/%d passed", ran - failed, ran);
    if (failed > unexpected) std::printf(", %d failure(s) allowed", failed - unexpected);
    std::printf("\n");
    return unexpected == 0 ? 0 : 1;
}
