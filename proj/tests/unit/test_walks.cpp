#include <doctest.h>

#include <cmath>

#include "frogsim/errors.hpp"
#include "frogsim/walks.hpp"

using namespace frogsim;

namespace {

// int_0^t e^{-s} I_0(s) ds by composite Simpson
double green_1d(double t) {
    const int m = 2000;
    const double h = t / m;
    double s = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double x = k * h;
        const double f = std::exp(-x) * std::cyl_bessel_i(0.0, x);
        s += f * (k == 0 || k == m ? 1.0 : (k % 2 ? 4.0 : 2.0));
    }
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("single-vertex exit probability") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 5));
    const Vertex S[] = {0};
    auto tab = exit_probability_exact(z, S, 1.0);
    CHECK(std::abs(tab.at(0) - (1.0 - std::exp(-1.0))) <= 1e-10);
    Graph t = build_graph(GraphSpec::regular_tree(3, 6));
    CHECK(std::abs(exit_probability_exact(t, S, 2.5).at(0) - (1.0 - std::exp(-2.5))) <= 1e-10);
}

TEST_CASE("exit probabilities agree with simulation") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 12));
    Graph t = build_graph(GraphSpec::regular_tree(3, 9));
    struct Case {
        const Graph* g;
        int r;
        int xi;
        double t;
    };
    const Case cases[] = {{&z, 2, 0, 1.0}, {&z, 3, 4, 2.0}, {&z, 4, 7, 5.0}, {&t, 2, 0, 1.5}, {&t, 3, 2, 3.0}};
    std::uint64_t seed = 100;
    for (const Case& c : cases) {
        auto S = ball(*c.g, 0, c.r);
        const Vertex x = S[static_cast<std::size_t>(c.xi)];
        auto tab = exit_probability_exact(*c.g, S, c.t);
        Estimate mc = exit_frequency_mc(*c.g, S, x, c.t, 20000, seed++);
        CHECK(mc.within(tab.at(x)));
    }
}

TEST_CASE("heat kernel on Z is e^{-t} I_0(t)") {
    Graph line = build_graph(GraphSpec::lattice_box(1, 80));
    for (double t : {0.5, 1.0, 4.0, 10.0}) {
        ExactValue v = heat_kernel_exact(line, 0, 0, t);
        CHECK(v.value == doctest::Approx(std::exp(-t) * std::cyl_bessel_i(0.0, t)).epsilon(1e-9));
    }
}

TEST_CASE("heat kernel rows sum to one") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 40));
    for (double t : {0.5, 2.0, 8.0}) CHECK(std::abs(heat_kernel_row(z, 0, t).sum() - 1.0) <= 1e-9);
    Graph tr = build_graph(GraphSpec::regular_tree(3, 20));
    CHECK(std::abs(heat_kernel_row(tr, 0, 3.0).sum() - 1.0) <= 1e-9);
}

TEST_CASE("truncated green function on Z") {
    Graph line = build_graph(GraphSpec::lattice_box(1, 80));
    for (double t : {1.0, 5.0}) CHECK(truncated_green(line, 0, 0, t).value == doctest::Approx(green_1d(t)).epsilon(1e-7));
}

TEST_CASE("hitting probability of a neighbor is at most the exit probability") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 30));
    const Vertex S[] = {0};
    const double exit = exit_probability_exact(z, S, 2.0).at(0);
    const Vertex y = z.out_neighbors(0)[0];
    ExactValue h = hitting_probability_exact(z, 0, y, 2.0);
    CHECK(h.value > 0.0);
    CHECK(h.value < exit);
}

TEST_CASE("trajectories are prefix consistent in the lifespan") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 50));
    for (std::uint64_t k = 0; k < 50; ++k) {
        Stream a(5, {k}), b(5, {k});
        Trajectory short_ = sample_trajectory(z, 0, 3.0, a);
        Trajectory long_ = sample_trajectory(z, 0, 9.0, b);
        REQUIRE(short_.jumps.size() <= long_.jumps.size());
        for (std::size_t i = 0; i < short_.jumps.size(); ++i) CHECK(short_.jumps[i] == long_.jumps[i]);
    }
}

TEST_CASE("poisson series tail bound") {
    PoissonSeries s = poisson_series(5.0, 1e-12);
    double sum = 0.0;
    for (double p : s.pmf) sum += p;
    CHECK(s.tail_bound < 1e-12);
    CHECK(std::abs(1.0 - sum) <= 1e-12);
    CHECK_THROWS_AS(poisson_series(1000.0, 1e-12, 50), TruncationError);
}

TEST_CASE("exact series refuse sets touching the boundary") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 3));
    CHECK_THROWS(exit_probability_exact(z, ball(z, 0, 3), 1.0));
}

TEST_CASE("range grows with the lifespan") {
    Graph z = build_graph(GraphSpec::lattice_box(2, 60));
    const std::vector<Vertex> none;
    RangeStats a = range_statistics(z, 0, 16.0, none, none, 0.1, 400, 1);
    RangeStats b = range_statistics(z, 0, 64.0, none, none, 0.1, 400, 1);
    CHECK(a.range.mean > 1.0);
    CHECK(b.range.mean > a.range.mean);
    CHECK(b.range.mean <= 65.0);
}
