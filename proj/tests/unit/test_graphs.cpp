#include <doctest.h>

#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "frogsim/errors.hpp"
#include "frogsim/graph.hpp"

using namespace frogsim;

namespace {

// Plain BFS over a coordinate predicate, independent of the graph builders.
std::size_t strip_ball(int width, int r) {
    std::map<std::pair<int, int>, int> dist{{{0, 0}, 0}};
    std::deque<std::pair<int, int>> q{{0, 0}};
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        const int d = dist[{x, y}];
        if (d == r) continue;
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            std::pair<int, int> nb{x + dx, y + dy};
            if (nb.second < 0 || nb.second >= width || dist.count(nb)) continue;
            dist[nb] = d + 1;
            q.push_back(nb);
        }
    }
    return dist.size();
}

}  // namespace

TEST_CASE("family sizes") {
    CHECK(build_graph(GraphSpec::lattice_box(2, 1)).vertex_count() == 5);
    CHECK(build_graph(GraphSpec::regular_tree(3, 2)).vertex_count() == 10);
    CHECK(build_graph(GraphSpec::lattice_box(2, 40)).vertex_count() == 3281);
    CHECK(build_graph(GraphSpec::lattice_box(3, 2)).vertex_count() == 25);
    CHECK(build_graph(GraphSpec::ladder(2, 10)).vertex_count() == 42);
}

TEST_CASE("invariants hold for every family") {
    for (const GraphSpec& s : {GraphSpec::lattice_box(2, 6), GraphSpec::regular_tree(4, 5), GraphSpec::ladder(3, 9),
                               GraphSpec::lattice_box(3, 4, BoundaryMode::open_killing)}) {
        Graph g = build_graph(s);
        CHECK_NOTHROW(g.check_invariants());
        CHECK(g.origin() == 0);
        CHECK_FALSE(g.is_boundary(g.origin()));
        for (Vertex b : g.boundary()) CHECK(g.depth(b) >= 1);
    }
}

TEST_CASE("balls and spheres") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 10));
    CHECK(ball(t, 0, 0).size() == 1);
    CHECK(ball(t, 0, 2).size() == 10);
    CHECK(sphere(t, 0, 3).size() == 12);
    Graph z = build_graph(GraphSpec::lattice_box(2, 40));
    CHECK(ball(z, 0, 1).size() == 5);
    for (int n = 0; n <= 10; ++n) CHECK(ball(z, 0, n).size() == static_cast<std::size_t>(2 * n * n + 2 * n + 1));
    Graph l = build_graph(GraphSpec::ladder(2, 100));
    for (int n : {1, 2, 5, 20}) CHECK(ball(l, 0, n).size() == strip_ball(2, n));
    CHECK_THROWS_AS(ball(z, 0, -1), ValidationError);
}

TEST_CASE("growth exponents") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 30));
    auto gz = growth_profile(z, 0, 20);
    CHECK(gz.exponent >= 1.8);
    CHECK(gz.exponent <= 2.2);
    Graph l = build_graph(GraphSpec::ladder(2, 400));
    auto gl = growth_profile(l, 0, 100);
    CHECK(gl.exponent >= 0.9);
    CHECK(gl.exponent <= 1.1);
    Graph t = build_graph(GraphSpec::regular_tree(3, 20));
    auto gt = growth_profile(t, 0, 15);
    CHECK(std::abs(gt.exponential_rate - std::log(2.0)) <= 0.1);
    CHECK_THROWS_AS(growth_profile(t, 0, 20), ValidationError);
}

TEST_CASE("cheeger ratios") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 30));
    const Vertex one[] = {0};
    CHECK(cheeger_of_set(z, one) == doctest::Approx(1.0));
    CHECK(cheeger_of_set(z, ball(z, 0, 10)) <= 0.25);
    Graph t = build_graph(GraphSpec::regular_tree(3, 12));
    for (int r = 0; r <= 8; ++r) CHECK(cheeger_of_set(t, ball(t, 0, r)) >= 1.0 / 3.0);
    CHECK_THROWS_AS(cheeger_of_set(z, std::vector<Vertex>{}), ValidationError);
}

TEST_CASE("spectral radius") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 20));
    auto st = spectral_radius_estimate(t, 0, 40);
    CHECK(std::abs(st.estimate - 2.0 * std::sqrt(2.0) / 3.0) <= 0.03);
    Graph z = build_graph(GraphSpec::lattice_box(2, 60));
    CHECK(spectral_radius_estimate(z, 0, 40).estimate >= 0.99);
    Graph l = build_graph(GraphSpec::ladder(2, 200));
    CHECK(spectral_radius_estimate(l, 0, 40).estimate >= 0.99);
    CHECK_THROWS_AS(spectral_radius_estimate(t, 0, 3), ValidationError);
}

TEST_CASE("stationary control constant") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 5));
    CHECK(stationary_control_constant(z, true) == doctest::Approx(1.0));
    CHECK(stationary_control_constant(z, false) == doctest::Approx(4.0));
    Graph t = build_graph(GraphSpec::regular_tree(3, 6));
    CHECK(stationary_control_constant(t, true) == doctest::Approx(1.0));
}

TEST_CASE("weighted file parsing") {
    const std::string text = "frogsim-graph v1 undirected\n0 1 2.0\n1 2 1.0\n2 0 0.5\n";
    Graph g = parse_weighted_graph(text);
    CHECK(g.vertex_count() == 3);
    CHECK(g.pi(0) == doctest::Approx(2.5));
    CHECK(g.weight(0, 1) == doctest::Approx(2.0));
    CHECK(g.weight(1, 0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(parse_weighted_graph("frogsim-graph v1 undirected\n0 1 -1\n"), ParseError);
    CHECK_THROWS_AS(parse_weighted_graph("nonsense\n"), ParseError);
    CHECK_THROWS_AS(parse_weighted_graph("frogsim-graph v1 directed\n0 1 1\n"), ParseError);
}

TEST_CASE("invalid specs and budgets") {
    CHECK_THROWS_AS(build_graph(GraphSpec::regular_tree(2, 5)), ValidationError);
    CHECK_THROWS_AS(build_graph(GraphSpec::lattice_box(2, 0)), ValidationError);
    GraphSpec big = GraphSpec::lattice_box(3, 200);
    big.vertex_budget = 1000;
    CHECK_THROWS_AS(build_graph(big), BudgetError);
}
