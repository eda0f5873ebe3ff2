#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "frogsim/errors.hpp"
#include "frogsim/experiments.hpp"

using namespace frogsim;

TEST_CASE("numbers round trip") {
    for (double v : {0.1, 1.0 / 3.0, 6627235.410062652, 1e-300, 0.0}) CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("report serialisation") {
    ExperimentReport r;
    r.name = "demo";
    r.seed = 5;
    Estimate e;
    e.mean = 0.25;
    e.stderr_ = 0.01;
    e.replicas = 10;
    r.add("m", GraphSpec::regular_tree(3, 4), 1.0, 2.0, 3, e);
    r.check("c", true, "fine");
    CHECK(std::string(ExperimentReport::csv_header()) == "experiment,graph,lambda,t,n,replicas,seed,metric,mean,stderr");
    CHECK(r.csv_rows() == "demo,tree(3,4),1,2,3,10,5,m,0.25,0.01\n");
    auto j = nlohmann::json::parse(r.json());
    CHECK(j["name"] == "demo");
    CHECK(j["metrics"].size() == 1);
    CHECK(j["passed"] == true);
}

TEST_CASE("edge coupling rate") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 8));
    ExperimentReport r = bernoulli_edge_coupling(t, FrogParams{2.0, 1.0}, 200, 3);
    CHECK(r.find("edge_open_closed_form")->value.mean == doctest::Approx(0.11825441374146635).epsilon(1e-12));
    CHECK(r.find_check("edge_rate_within_3se")->pass);
    CHECK(r.find_check("open_cluster_inside_frog_cluster")->pass);
}

TEST_CASE("abelian check") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 10));
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
    ExperimentReport r = abelian_invariance_check(t, FrogParams{1.0, 1.0}, seeds);
    CHECK(r.passed());
}

TEST_CASE("linear growth") {
    ExperimentReport r = linear_growth_experiment(2, 120, FrogParams{2.0, 2.0}, {10, 40, 100}, 200, 3, 40);
    CHECK(r.find_check("survival_nonincreasing_in_n")->pass);
    CHECK(r.find_check("blocking_positive")->pass);
    CHECK(r.find_check("blocking_mc_agrees")->pass);
}

TEST_CASE("net vertex openness is local") {
    NetConfig net;
    net.a = 6;
    net.extent = 1;
    Graph box = build_graph(GraphSpec::lattice_box(2, net.box_radius()));
    const int ctr[2] = {6, 0};
    const Vertex c = static_cast<Vertex>(box.find_coordinates(ctr));
    auto keep = std::make_shared<VertexMask>(box.vertex_count(), ball(box, c, net.ball_radius()));
    for (std::uint64_t r = 0; r < 5; ++r) {
        ParticleField p1(r, 1), p2(r, 2);
        OpenState a = net_vertex_state(box, net, c, 4.0, p1, p2);
        OpenState b = net_vertex_state(box, net, c, 4.0, p1.patched(99, keep), p2.patched(98, keep));
        CHECK(a.open == b.open);
        CHECK(a.good_count == b.good_count);
    }
}

TEST_CASE("no-good-vertex probability decays") {
    Graph box = build_graph(GraphSpec::lattice_box(2, 24));
    NoGoodEstimate ng = no_good_vertex_decay(box, 6, 2.0, {2, 8, 32}, 60, 60, 4);
    REQUIRE(ng.log_probability.size() == 3);
    CHECK(ng.log_probability[1].mean < ng.log_probability[0].mean);
    CHECK(ng.log_probability[2].mean < ng.log_probability[1].mean);
    CHECK(ng.slope < 0.0);
}

TEST_CASE("escape probability on a tree exceeds the spectral gap") {
    Graph t = build_graph(GraphSpec::regular_tree(3, 12));
    auto A = ball(t, 0, 3);
    Estimate e = escape_probability(t, A, 2000, 1);
    CHECK(e.mean > 0.0);
    CHECK(e.mean >= (1.0 - 2.0 * std::sqrt(2.0) / 3.0) - 0.05);
}
