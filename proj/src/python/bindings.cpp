#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "frogsim/config.hpp"
#include "frogsim/errors.hpp"
#include "frogsim/estimators.hpp"
#include "frogsim/experiments.hpp"
#include "frogsim/frogs.hpp"
#include "frogsim/graph.hpp"
#include "frogsim/walks.hpp"

namespace py = pybind11;
using namespace frogsim;

namespace {

py::dict estimate_dict(const Estimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["stderr"] = e.stderr();
    d["replicas"] = e.replicas;
    d["seed"] = e.seed;
    d["method"] = e.method;
    return d;
}

}  // namespace

PYBIND11_MODULE(_frogsim, m) {
    m.doc() = "frog model with death: graphs, walks, frog clusters and estimators";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
    py::register_exception<TruncationError>(m, "TruncationError", PyExc_ArithmeticError);
    py::register_exception<NoCrossingError>(m, "NoCrossingError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::enum_<BoundaryMode>(m, "BoundaryMode")
        .value("absorbing", BoundaryMode::absorbing)
        .value("open_killing", BoundaryMode::open_killing);

    py::class_<GraphSpec>(m, "GraphSpec")
        .def_static("lattice_box", &GraphSpec::lattice_box, py::arg("d"), py::arg("radius"),
                    py::arg("mode") = BoundaryMode::absorbing)
        .def_static("regular_tree", &GraphSpec::regular_tree, py::arg("degree"), py::arg("depth"),
                    py::arg("mode") = BoundaryMode::absorbing)
        .def_static("ladder", &GraphSpec::ladder, py::arg("width"), py::arg("length"),
                    py::arg("mode") = BoundaryMode::absorbing)
        .def_static("weighted_file", &GraphSpec::weighted_file, py::arg("path"),
                    py::arg("mode") = BoundaryMode::absorbing)
        .def_static("parse", &parse_graph_spec, py::arg("text"), py::arg("mode") = BoundaryMode::absorbing)
        .def("describe", &GraphSpec::describe)
        .def("__repr__", &GraphSpec::describe);

    py::class_<Graph>(m, "Graph")
        .def_property_readonly("vertex_count", &Graph::vertex_count)
        .def_property_readonly("max_degree", &Graph::max_out_degree)
        .def_property_readonly("truncation_radius", &Graph::truncation_radius)
        .def_property_readonly("boundary", &Graph::boundary)
        .def("neighbors", [](const Graph& g, Vertex x) {
            auto s = g.out_neighbors(x);
            return std::vector<Vertex>(s.begin(), s.end());
        })
        .def("pi", &Graph::pi)
        .def("depth", &Graph::depth)
        .def("describe", [](const Graph& g) { return g.spec().describe(); });

    m.def("build_graph", &build_graph, py::arg("spec"));
    m.def("ball", &ball, py::arg("g"), py::arg("x"), py::arg("r"));
    m.def("sphere", &sphere, py::arg("g"), py::arg("x"), py::arg("r"));
    m.def("cheeger_of_set", [](const Graph& g, std::vector<Vertex> A) { return cheeger_of_set(g, A); });
    m.def("spectral_radius", [](const Graph& g, int nmax) {
        SpectralEstimate s = spectral_radius_estimate(g, g.origin(), nmax);
        py::dict d;
        d["estimate"] = s.estimate;
        d["root_sequence"] = s.root_sequence;
        d["monotone"] = s.monotone;
        d["truncation_warning"] = s.truncation_warning;
        return d;
    }, py::arg("g"), py::arg("nmax") = 40);

    m.def("exit_probability_exact", [](const Graph& g, std::vector<Vertex> S, double t) {
        KilledWalkTable k = exit_probability_exact(g, S, t);
        py::dict d;
        for (std::size_t i = 0; i < k.domain.size(); ++i) d[py::int_(k.domain[i])] = k.exit_prob[i];
        return d;
    }, py::arg("g"), py::arg("S"), py::arg("t"));
    m.def("heat_kernel_row_sum", [](const Graph& g, Vertex x, double t) { return heat_kernel_row(g, x, t).sum(); });

    m.def("cluster", [](const Graph& g, double lambda, double t, std::uint64_t seed, const std::string& schedule) {
        ParticleField field(seed, hash_name("python"));
        Schedule s = schedule == "lifo" ? Schedule::lifo : schedule == "random" ? Schedule::random : Schedule::fifo;
        Cluster c = explore_cluster(g, FrogParams{lambda, t}, field, StopRule{}, s, Stream(seed));
        return c.activated_sorted();
    }, py::arg("g"), py::arg("lam"), py::arg("t"), py::arg("seed"), py::arg("schedule") = "fifo");

    m.def("survival", [](const Graph& g, double lambda, double t, int n, int replicas, std::uint64_t seed) {
        Estimate e;
        {
            py::gil_scoped_release release;
            e = survival_probability(g, FrogParams{lambda, t}, n, replicas, seed).survival;
        }
        return estimate_dict(e);
    }, py::arg("g"), py::arg("lam"), py::arg("t"), py::arg("n"), py::arg("replicas"), py::arg("seed"));

    m.def("phi", [](const Graph& g, int radius, double lambda, double t, int replicas, std::uint64_t seed) {
        PhiEstimate p = phi_hat(g, ball(g, g.origin(), radius), FrogParams{lambda, t}, replicas, seed);
        py::dict d;
        d["phi"] = estimate_dict(p.phi);
        d["dual"] = estimate_dict(p.dual);
        return d;
    }, py::arg("g"), py::arg("radius"), py::arg("lam"), py::arg("t"), py::arg("replicas"), py::arg("seed"));

    m.def("sharpness_constants", [](int Delta, double lambda, double t) {
        SharpnessConstants c = sharpness_constants(Delta, lambda, t);
        py::dict d;
        d["delta"] = c.delta;
        d["K"] = c.K;
        d["K_cap"] = c.K_cap;
        d["log_C"] = c.log_C;
        d["C"] = c.C;
        d["c"] = c.c;
        return d;
    }, py::arg("Delta"), py::arg("lam"), py::arg("t"));

    m.def("gw_extinction", [](double lambda, double t) { return gw_oracle(lambda, t).extinction; },
          py::arg("lam"), py::arg("t"));
    m.def("nonamenable_t_bound", [](double rho, double K, double lambda) {
        return nonamenable_t_bound(rho, K, lambda).bound;
    }, py::arg("rho"), py::arg("K"), py::arg("lam"));

    m.def("set_workers", &set_worker_count, py::arg("workers"));
    m.def("experiment_names", &experiment_names);
    m.def("validate", [](const std::map<std::string, std::string>& values) {
        RunConfig cfg;
        cfg.values = values;
        return validate(cfg);
    }, py::arg("config"));
    m.def("run", [](const std::map<std::string, std::string>& values) {
        RunConfig cfg;
        cfg.values = values;
        RunResult r;
        {
            py::gil_scoped_release release;
            r = run(cfg);
        }
        py::dict d;
        d["status"] = r.status;
        d["messages"] = r.messages;
        if (r.report) {
            d["csv"] = std::string(ExperimentReport::csv_header()) + "\n" + r.report->csv_rows();
            d["passed"] = r.report->passed();
        }
        return d;
    }, py::arg("config"));
}
