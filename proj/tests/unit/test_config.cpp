#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "frogsim/config.hpp"
#include "frogsim/errors.hpp"

using namespace frogsim;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunConfig survival_config(const std::string& out) {
    return RunConfig::parse("experiment = survival\ngraph = tree:3:14  # binary-ish tree\nlambda = 0.5:3.0:0.5\n"
                            "t = 1\nn = 10\nreplicas = 300\nseed = 7\nout = " + out + "\n");
}

}  // namespace

TEST_CASE("grids") {
    CHECK(parse_grid("0.5:3.0:0.5").size() == 6);
    CHECK(parse_grid("0.5:3.0:0.5").back() == doctest::Approx(3.0));
    CHECK(parse_grid("1,2,5").size() == 3);
    CHECK(parse_grid("4") == std::vector<double>{4.0});
    CHECK_THROWS_AS(parse_grid("1:0:1"), ValidationError);
    CHECK_THROWS_AS(parse_grid("1:2:0"), ValidationError);
    CHECK_THROWS_AS(parse_grid("a"), ValidationError);
    CHECK_THROWS_AS(parse_int_list("1.5"), ValidationError);
}

TEST_CASE("graph strings") {
    CHECK(parse_graph_spec("tree:3:12").describe() == "tree(3,12)");
    CHECK(parse_graph_spec("lattice:2:40").describe() == "Z2box(40)");
    CHECK(parse_graph_spec("ladder:2:400").describe() == "ladder(2,400)");
    CHECK_THROWS_AS(parse_graph_spec("tree:2:12"), ValidationError);
    CHECK_THROWS_AS(parse_graph_spec("torus:3:3"), ValidationError);
}

TEST_CASE("validation reports every problem") {
    RunConfig ok = survival_config("unused");
    CHECK(validate(ok).empty());

    RunConfig neg = ok;
    neg.set("lambda=-1");
    auto d = validate(neg);
    REQUIRE(d.size() == 1);
    CHECK(d[0].find("lambda") != std::string::npos);

    RunConfig deep = ok;
    deep.set("n=30");
    d = validate(deep);
    REQUIRE(d.size() == 1);
    CHECK(d[0].find("truncation radius") != std::string::npos);

    RunConfig bad = ok;
    bad.set("replicas=0");
    bad.set("t=-2");
    bad.values.erase("seed");
    bad.set("colour=blue");
    d = validate(bad);
    CHECK(d.size() == 4);

    RunConfig unknown;
    unknown.set("experiment=nope");
    unknown.set("seed=1");
    CHECK(validate(unknown).size() == 1);
}

TEST_CASE("run writes artifacts with the documented exit statuses") {
    const auto dir = std::filesystem::temp_directory_path() / "frogsim_cfg_test";
    std::filesystem::remove_all(dir);
    RunConfig cfg = survival_config((dir / "a").string());
    RunResult r = run(cfg);
    REQUIRE(r.status == 0);
    const std::string csv = slurp(dir / "a" / "results.csv");
    CHECK(csv.rfind("experiment,graph,lambda,t,n,replicas,seed,metric,mean,stderr\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(std::filesystem::exists(dir / "a" / "report.json"));
    CHECK(std::filesystem::exists(dir / "a" / "plot.gp"));
    CHECK(std::filesystem::exists(dir / "a" / "survival-7.json"));
    CHECK(slurp(dir / "a" / "survival-7.csv") == csv);
    double prev = -1.0;
    for (const auto& m : r.report->metrics) {
        CHECK(m.value.mean >= prev);
        prev = m.value.mean;
    }

    RunConfig zero = cfg;
    zero.set("replicas=0");
    CHECK(run(zero).status == 2);

    RunConfig tight = cfg;
    tight.set("max_vertices=100");
    CHECK(run(tight).status == 3);
    std::filesystem::remove_all(dir);
}

TEST_CASE("csv is identical across worker counts") {
    const auto dir = std::filesystem::temp_directory_path() / "frogsim_det_test";
    std::filesystem::remove_all(dir);
    for (const char* exp : {"survival", "edge_coupling"}) {
        RunConfig cfg = survival_config("");
        cfg.set("experiment", exp);
        if (std::string(exp) == "edge_coupling") {
            cfg.set("lambda", "2");
            cfg.values.erase("n");
        }
        cfg.set("out", (dir / "w1").string());
        cfg.set("workers", "1");
        REQUIRE(run(cfg).status == 0);
        cfg.set("out", (dir / "w4").string());
        cfg.set("workers", "4");
        REQUIRE(run(cfg).status == 0);
        CHECK(slurp(dir / "w1" / "results.csv") == slurp(dir / "w4" / "results.csv"));
    }
    std::filesystem::remove_all(dir);
}
