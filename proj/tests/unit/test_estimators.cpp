#include <doctest.h>

#include <cmath>

#include "frogsim/errors.hpp"
#include "frogsim/estimators.hpp"

using namespace frogsim;

TEST_CASE("survival is monotone in lambda on coupled fields") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 14));
    double prev = -1.0;
    std::vector<std::uint8_t> prev_ind;
    for (double l : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
        SurvivalResult s = survival_probability(t, FrogParams{l, 1.0}, 10, 400, 7);
        CHECK(s.survival.mean >= prev);
        if (!prev_ind.empty()) {
            for (std::size_t r = 0; r < s.indicators.size(); ++r) CHECK(s.indicators[r] >= prev_ind[r]);
        }
        prev = s.survival.mean;
        prev_ind = s.indicators;
    }
    CHECK_THROWS_AS(survival_probability(t, FrogParams{1.0, 1.0}, 20, 10, 1), ValidationError);
    CHECK_THROWS_AS(survival_probability(t, FrogParams{1.0, 1.0}, 5, 0, 1), ValidationError);
}

TEST_CASE("cluster tail decays in the subcritical regime") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 16));
    TailCurve tc = cluster_size_tail(t, FrogParams{0.5, 1.0}, 30, 2000, 2);
    CHECK(tc.tail[1] == doctest::Approx(1.0));
    for (std::size_t k = 2; k < tc.tail.size(); ++k) CHECK(tc.tail[k] <= tc.tail[k - 1]);
    CHECK(tc.slope < 0.0);
    CHECK(tc.r2 >= 0.9);
}

TEST_CASE("phi of the origin has a closed form") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 6));
    const Vertex S[] = {0};
    PhiEstimate p = phi_hat(t, S, FrogParams{1.0, 1.0}, 4000, 3);
    CHECK(p.phi.within(1.0 - std::exp(-1.0), 3.0, 1e-9));
    CHECK(p.dual.within(1.0 - std::exp(-1.0)));
    PhiTildeEstimate pt = phi_tilde_hat(t, S, FrogParams{1.0, 1.0}, 4000, 3, 20000);
    // E[N(1) 1{N(1) >= 1}] = 1
    CHECK(pt.phi_tilde.within(1.0));
}

TEST_CASE("phi dual identity on balls") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 8));
    Graph z = build_graph(GraphSpec::lattice_box(2, 8));
    for (const Graph* g : {&t, &z}) {
        for (int r : {1, 2}) {
            PhiEstimate p = phi_hat(*g, ball(*g, 0, r), FrogParams{1.0, 1.0}, 6000, 5);
            CHECK(p.paired_difference.within(0.0));
        }
    }
}

TEST_CASE("sharpness constants match independent arithmetic") {
    SharpnessConstants a = sharpness_constants(3, 1.0, 1.0);
    CHECK(a.delta == doctest::Approx(0.11540598592868457).epsilon(1e-12));
    CHECK(a.K == doctest::Approx(25.995185395789242).epsilon(1e-12));
    CHECK(a.K_cap == doctest::Approx(48.929072912262814).epsilon(1e-12));
    CHECK(a.log_C == doctest::Approx(188.66186989907043).epsilon(1e-12));
    SharpnessConstants b = sharpness_constants(3, 0.5, 2.0);
    CHECK(b.log_C == doctest::Approx(876.05071326973453).epsilon(1e-12));
    CHECK(b.delta == doctest::Approx(0.044109355506628241).epsilon(1e-12));
    SharpnessConstants c = sharpness_constants(1, 1.0, 1.0);
    CHECK(c.delta == doctest::Approx(0.30779937244465365).epsilon(1e-12));
    CHECK(c.log_C == doctest::Approx(11.686553067607366).epsilon(1e-12));
    SharpnessConstants d = sharpness_constants(4, 2.0, 0.5);
    CHECK(d.log_C == doctest::Approx(144.10764610338952).epsilon(1e-12));
    CHECK(sharpness_constants(3, 0.0, 1.0).c == 0.0);
    CHECK(sharpness_constants(3, 1.0, 0.0).c == 0.0);
    CHECK(std::isinf(sharpness_constants(3, 0.0, 2.0).C));
}

TEST_CASE("galton-watson oracle") {
    for (auto [l, t] : {std::pair{0.5, 1.0}, {1.0, 1.0}, {0.25, 4.0}, {2.0, 0.5}, {0.1, 0.1}, {1.0, 0.0}}) {
        GWResult g = gw_oracle(l, t);
        CHECK(g.extinction == 1.0);
        CHECK(g.exponential_moment == (l * t < 1.0));
    }
    GWResult g = gw_oracle(2.0, 1.0);
    CHECK(g.residual <= 1e-10);
    CHECK(g.extinction == doctest::Approx(0.41019003449339560).epsilon(1e-9));
    CHECK(gw_pgf(2.0, 1.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("non-amenable bound") {
    NonamenableBound b = nonamenable_t_bound(0.9428, 1.0, 1.0);
    CHECK(b.bound == doctest::Approx(6627235.410062652).epsilon(1e-9));
    CHECK(b.log_term == doctest::Approx(107.41626952029695).epsilon(1e-12));
    CHECK(b.alpha == doctest::Approx(1.0 / 432.0));
    CHECK_THROWS_AS(nonamenable_t_bound(1.0, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(nonamenable_t_bound(0.9, 1.0, 0.0), ValidationError);
}

TEST_CASE("connected sets containing the root") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 5));
    // each child is absent or present with any subset of its two children: 5^3
    CHECK(connected_sets_containing(t, 0, ball(t, 0, 2), 4096).size() == 125);
    CHECK(connected_sets_containing(t, 0, ball(t, 0, 1), 4096).size() == 8);
    CHECK(connected_sets_containing(t, 0, ball(t, 0, 3), 100).empty());
}

TEST_CASE("russo inequality holds on a small tree") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 6));
    for (Parameter p : {Parameter::lambda, Parameter::t}) {
        RussoReport r = russo_inequality_check(t, 2, FrogParams{1.5, 1.0}, p, 0.05, 6000, 4, 1000);
        CHECK(r.candidate_sets == 125);
        CHECK(r.holds);
    }
}

TEST_CASE("bisection bracket lies above the branching bound") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 14));
    BisectionOptions opt;
    opt.radius = 12;
    opt.replicas = 200;
    opt.max_replicas = 800;
    CriticalBracket br = critical_bisection(t, Parameter::lambda, 1.0, 0.0, 4.0, opt, 9);
    CHECK(br.lo < br.hi);
    CHECK(br.hi > 1.0);
    CHECK_THROWS_AS(critical_bisection(t, Parameter::lambda, 1.0, 0.0, 0.3, opt, 9), NoCrossingError);
}

TEST_CASE("tilde scan rows") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 8));
    const int radii[] = {0, 1, 2};
    const double grid[] = {0.5, 1.0, 2.0};
    TildeScan sc = tilde_critical_scan(t, Parameter::lambda, 1.0, radii, grid, 500, 1);
    REQUIRE(sc.rows.size() == 3);
    for (const auto& row : sc.rows) CHECK(row.inf_phi.mean >= 0.0);
}
