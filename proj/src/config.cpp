#include "frogsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "frogsim/errors.hpp"
#include "frogsim/estimators.hpp"

namespace frogsim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& s) {
    const std::string t = trim(s);
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ValidationError("not a number: '" + s + "'");
    return v;
}

long long to_int(const std::string& s) {
    const std::string t = trim(s);
    long long v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ValidationError("not an integer: '" + s + "'");
    return v;
}

const std::set<std::string>& common_keys() {
    static const std::set<std::string> k{"experiment", "graph",    "boundary",      "lambda",       "t",
                                         "n",          "replicas", "seed",          "out",          "workers",
                                         "max_particles", "max_vertices"};
    return k;
}

const std::map<std::string, std::set<std::string>>& experiment_keys() {
    static const std::map<std::string, std::set<std::string>> k{
        {"survival", {}},
        {"cluster_tail", {}},
        {"phi", {"set_radius", "conditional_replicas"}},
        {"tilde_scan", {"parameter", "radii"}},
        {"bisection", {"parameter", "lo", "hi", "threshold", "tol", "max_replicas"}},
        {"russo", {"parameter", "step", "phi_replicas"}},
        {"edge_coupling", {"pairs"}},
        {"renormalization",
         {"a", "beta", "extent", "tail_sizes", "tail_replicas", "direct_replicas", "locality_replicas",
          "a_scan_replicas"}},
        {"abelian", {}},
        {"linear_growth", {"radii", "annulus"}},
        {"nonamenable", {"threshold", "spectral_nmax", "escape_radius", "escape_replicas"}},
        {"gw", {}},
        {"spectral", {"nmax"}},
    };
    return k;
}

// Collects diagnostics while reading typed values.
struct Reader {
    const RunConfig& cfg;
    std::vector<std::string>* diag = nullptr;

    void fail(const std::string& msg) const {
        if (diag) diag->push_back(msg);
        else throw ValidationError(msg);
    }

    double real(const std::string& key, double fallback) const {
        if (!cfg.has(key)) return fallback;
        try {
            return to_double(cfg.get(key));
        } catch (const ValidationError& e) {
            fail(key + ": " + e.what());
            return fallback;
        }
    }
    long long integer(const std::string& key, long long fallback) const {
        if (!cfg.has(key)) return fallback;
        try {
            return to_int(cfg.get(key));
        } catch (const ValidationError& e) {
            fail(key + ": " + e.what());
            return fallback;
        }
    }
    std::vector<double> grid(const std::string& key, const std::string& fallback) const {
        try {
            return parse_grid(cfg.get(key, fallback));
        } catch (const ValidationError& e) {
            fail(key + ": " + e.what());
            return {};
        }
    }
    std::vector<int> ints(const std::string& key, const std::string& fallback) const {
        try {
            return parse_int_list(cfg.get(key, fallback));
        } catch (const ValidationError& e) {
            fail(key + ": " + e.what());
            return {};
        }
    }
    long long positive(const std::string& key, long long fallback) const {
        const long long v = integer(key, fallback);
        if (v < 1) fail(key + ": must be >= 1, got " + std::to_string(v));
        return v;
    }
    Parameter parameter(const std::string& fallback) const {
        const std::string v = cfg.get("parameter", fallback);
        if (v == "lambda") return Parameter::lambda;
        if (v == "t") return Parameter::t;
        fail("parameter: expected 'lambda' or 't', got '" + v + "'");
        return Parameter::lambda;
    }
};

// Distance from the origin to the truncation frontier implied by a spec.
int spec_truncation(const GraphSpec& s) {
    switch (s.family) {
        case GraphFamily::lattice_box: return s.radius;
        case GraphFamily::regular_tree: return s.depth;
        case GraphFamily::ladder: return s.length;
        case GraphFamily::weighted_file: return build_graph(s).truncation_radius();
    }
    return 0;
}

const char* kDefaultGraph = "tree:3:12";

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> parse_grid(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) throw ValidationError("empty grid");
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        auto parts = split(s, ':');
        if (parts.size() != 3) throw ValidationError("grid must be lo:hi:step, got '" + s + "'");
        const double lo = to_double(parts[0]), hi = to_double(parts[1]), step = to_double(parts[2]);
        if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("grid step must be > 0");
        if (hi < lo) throw ValidationError("grid hi below lo");
        const double span = (hi - lo) / step;
        if (span > 1e6) throw ValidationError("grid has too many points");
        const long long m = static_cast<long long>(std::floor(span + 1e-9));
        for (long long k = 0; k <= m; ++k) out.push_back(lo + static_cast<double>(k) * step);
        return out;
    }
    for (const auto& p : split(s, ',')) out.push_back(to_double(p));
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_grid(text)) {
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError("expected integers in '" + text + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

GraphSpec parse_graph_spec(const std::string& text, BoundaryMode mode) {
    const std::string s = trim(text);
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ValidationError("graph: expected family:args, got '" + s + "'");
    const std::string family = s.substr(0, colon);
    if (family == "file") return GraphSpec::weighted_file(s.substr(colon + 1), mode);
    auto args = split(s.substr(colon + 1), ':');
    if (args.size() != 2) throw ValidationError("graph: '" + family + "' takes two integer arguments");
    const int a = static_cast<int>(to_int(args[0])), b = static_cast<int>(to_int(args[1]));
    if (family == "tree") {
        if (a < 3) throw ValidationError("graph: tree degree must be >= 3");
        if (b < 1) throw ValidationError("graph: tree depth must be >= 1");
        return GraphSpec::regular_tree(a, b, mode);
    }
    if (family == "lattice") {
        if (a < 1) throw ValidationError("graph: lattice dimension must be >= 1");
        if (b < 1) throw ValidationError("graph: lattice radius must be >= 1");
        return GraphSpec::lattice_box(a, b, mode);
    }
    if (family == "ladder") {
        if (a < 1 || b < 1) throw ValidationError("graph: ladder width and length must be >= 1");
        return GraphSpec::ladder(a, b, mode);
    }
    throw ValidationError("graph: unknown family '" + family + "'");
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
        cfg.values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

void RunConfig::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ValidationError("override must be key=value: '" + assignment + "'");
    values[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

std::uint64_t RunConfig::seed() const {
    const std::string s = trim(get("seed"));
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ValidationError("seed: expected a non-negative integer");
    return v;
}

int RunConfig::replicas() const { return static_cast<int>(Reader{*this}.positive("replicas", 1000)); }

int RunConfig::workers() const { return static_cast<int>(Reader{*this}.integer("workers", 1)); }

GraphSpec RunConfig::graph() const {
    const std::string b = get("boundary", "absorbing");
    BoundaryMode mode = BoundaryMode::absorbing;
    if (b == "open_killing" || b == "open-killing") mode = BoundaryMode::open_killing;
    else if (b != "absorbing") throw ValidationError("boundary: expected absorbing or open_killing");
    GraphSpec spec = parse_graph_spec(get("graph", kDefaultGraph), mode);
    if (has("max_vertices")) spec.vertex_budget = static_cast<std::size_t>(Reader{*this}.positive("max_vertices", 1));
    return spec;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : experiment_keys()) v.push_back(k);
        return v;
    }();
    return names;
}

std::vector<std::string> validate(const RunConfig& cfg) {
    std::vector<std::string> d;
    Reader r{cfg, &d};
    const std::string exp = cfg.experiment();
    const auto& keys = experiment_keys();
    auto it = keys.find(exp);
    if (exp.empty()) d.push_back("experiment: missing");
    else if (it == keys.end()) d.push_back("experiment: unknown '" + exp + "'");
    for (const auto& [k, _] : cfg.values) {
        if (common_keys().count(k)) continue;
        if (it != keys.end() && it->second.count(k)) continue;
        d.push_back(k + ": unknown key" + (it != keys.end() ? " for experiment " + exp : ""));
    }
    if (!cfg.has("seed")) {
        d.push_back("seed: missing (no default seed)");
    } else {
        try {
            (void)cfg.seed();
        } catch (const ValidationError& e) {
            d.push_back(e.what());
        }
    }
    r.positive("replicas", 1000);
    if (r.integer("workers", 1) < 0) d.push_back("workers: must be >= 0");
    r.positive("max_particles", 5'000'000);
    r.positive("max_vertices", 20'000'000);
    for (const char* key : {"lambda", "t"}) {
        for (double v : r.grid(key, "1")) {
            if (!std::isfinite(v)) d.push_back(std::string(key) + ": value " + format_number(v) + " is not finite");
            else if (v < 0.0) d.push_back(std::string(key) + ": value " + format_number(v) + " is negative");
        }
    }
    const long long n = r.integer("n", 10);
    if (n < 0) d.push_back("n: must be >= 0");

    std::optional<GraphSpec> spec;
    try {
        spec = cfg.graph();
    } catch (const std::exception& e) {
        d.push_back(std::string("graph: ") + e.what());
    }
    auto need_radius = [&](long long radius, const std::string& what) {
        if (!spec) return;
        try {
            const int tr = spec_truncation(*spec);
            if (radius > tr)
                d.push_back(what + " " + std::to_string(radius) + " exceeds the truncation radius " + std::to_string(tr) +
                            " of " + spec->describe());
        } catch (const std::exception& e) {
            d.push_back(std::string("graph: ") + e.what());
        }
    };

    if (exp == "survival" || exp == "bisection" || exp == "nonamenable") need_radius(n, "n: survival radius");
    if (exp == "cluster_tail" && n < 1) d.push_back("n: cluster tail needs n >= 1");
    if (exp == "phi") {
        const long long sr = r.integer("set_radius", 1);
        if (sr < 0) d.push_back("set_radius: must be >= 0");
        need_radius(sr + 1, "set_radius + 1");
        r.positive("conditional_replicas", 20000);
    }
    if (exp == "tilde_scan") {
        r.parameter("lambda");
        for (int rad : r.ints("radii", "1,2,3")) {
            if (rad < 0) d.push_back("radii: must be >= 0");
            need_radius(rad + 1, "radii: radius + 1");
        }
    }
    if (exp == "bisection") {
        r.parameter("lambda");
        const double lo = r.real("lo", 0.0), hi = r.real("hi", 4.0);
        if (!(lo >= 0.0) || !(hi > lo)) d.push_back("lo/hi: need 0 <= lo < hi");
        const double th = r.real("threshold", 0.1);
        if (!(th > 0.0 && th < 1.0)) d.push_back("threshold: must lie in (0, 1)");
        if (!(r.real("tol", 0.05) > 0.0)) d.push_back("tol: must be > 0");
        r.positive("max_replicas", 6400);
    }
    if (exp == "russo") {
        const std::string p = cfg.get("parameter", "both");
        if (p != "lambda" && p != "t" && p != "both") d.push_back("parameter: expected lambda, t or both");
        if (!(r.real("step", 0.05) > 0.0)) d.push_back("step: must be > 0");
        r.positive("phi_replicas", 4000);
        need_radius(n + 1, "n: radius + 1");
    }
    if (exp == "edge_coupling") {
        r.positive("pairs", 16);
        if (r.integer("replicas", 1000) < 2) d.push_back("replicas: edge coupling needs >= 2");
    }
    if (exp == "renormalization") {
        if (r.integer("a", 8) < 3) d.push_back("a: must be >= 3");
        if (!(r.real("beta", 0.25) > 0.0)) d.push_back("beta: must be > 0");
        if (r.integer("extent", 4) < 0) d.push_back("extent: must be >= 0");
        const long long a = r.integer("a", 8);
        const long long ball = (2 * a + 1) * (2 * a + 1);
        for (int s : r.ints("tail_sizes", "4,16,64")) {
            if (s < 1 || s > ball / 2) d.push_back("tail_sizes: " + std::to_string(s) + " outside [1, |B_0(a)|]");
        }
        r.positive("tail_replicas", 400);
        r.positive("direct_replicas", 400);
        r.positive("locality_replicas", 20);
        if (r.integer("a_scan_replicas", 0) < 0) d.push_back("a_scan_replicas: must be >= 0");
    }
    if (exp == "linear_growth") {
        if (spec && spec->family != GraphFamily::ladder) d.push_back("graph: linear_growth needs a ladder graph");
        for (int rad : r.ints("radii", "50,100,200")) need_radius(rad, "radii: survival radius");
        const long long an = r.integer("annulus", 50);
        if (an < 2) d.push_back("annulus: must be >= 2");
        need_radius(an + 1, "annulus + 1");
    }
    if (exp == "nonamenable") {
        const double th = r.real("threshold", 0.1);
        if (!(th > 0.0 && th < 1.0)) d.push_back("threshold: must lie in (0, 1)");
        const long long nm = r.integer("spectral_nmax", 40);
        if (nm < 4 || nm % 2) d.push_back("spectral_nmax: must be even and >= 4");
        if (r.integer("escape_radius", 3) < 0) d.push_back("escape_radius: must be >= 0");
        r.positive("escape_replicas", 4000);
        for (double l : r.grid("lambda", "1"))
            if (!(l > 0.0)) d.push_back("lambda: nonamenable needs lambda > 0");
    }
    if (exp == "spectral") {
        const long long nm = r.integer("nmax", 40);
        if (nm < 4 || nm % 2) d.push_back("nmax: must be even and >= 4");
    }
    return d;
}

// ---------------------------------------------------------------------------

ExperimentReport run_experiment(const RunConfig& cfg) {
    const auto diags = validate(cfg);
    if (!diags.empty()) throw ValidationError(diags.front());
    Reader r{cfg};
    const std::string exp = cfg.experiment();
    const std::uint64_t seed = cfg.seed();
    const int replicas = cfg.replicas();
    const int n = static_cast<int>(r.integer("n", 10));
    const std::vector<double> lambdas = r.grid("lambda", "1");
    const std::vector<double> ts = r.grid("t", "1");
    const GraphSpec spec = cfg.graph();
    const std::int64_t max_particles = r.positive("max_particles", 5'000'000);

    ExperimentReport rep;
    rep.name = exp;
    rep.seed = seed;
    rep.inputs = {{"graph", spec.describe()}, {"replicas", std::to_string(replicas)}};
    auto with_inputs = [&](ExperimentReport sub) {
        sub.name = exp;
        sub.seed = seed;
        sub.inputs.insert(sub.inputs.begin(), rep.inputs.begin(), rep.inputs.end());
        return sub;
    };

    if (exp == "renormalization") {
        NetConfig net;
        net.a = static_cast<int>(r.integer("a", 8));
        net.beta = r.real("beta", 0.25);
        net.extent = static_cast<int>(r.integer("extent", 4));
        RenormalizationOptions opt;
        opt.replicas = replicas;
        opt.tail_sizes = r.ints("tail_sizes", "4,16,64");
        opt.tail_replicas = static_cast<int>(r.integer("tail_replicas", 400));
        opt.direct_replicas = static_cast<int>(r.integer("direct_replicas", 400));
        opt.locality_replicas = static_cast<int>(r.integer("locality_replicas", 20));
        opt.a_scan_replicas = static_cast<int>(r.integer("a_scan_replicas", 0));
        return renormalization_experiment(net, lambdas.front(), opt, seed);
    }
    if (exp == "linear_growth") {
        return linear_growth_experiment(spec.width, spec.length, FrogParams{lambdas.front(), ts.front()},
                                        r.ints("radii", "50,100,200"), replicas, seed,
                                        static_cast<int>(r.integer("annulus", 50)));
    }
    if (exp == "gw") {
        for (double l : lambdas) {
            for (double t : ts) {
                GWResult gw = gw_oracle(l, t);
                Estimate q;
                q.mean = gw.extinction;
                q.replicas = 1;
                q.method = "pgf fixed point";
                rep.add("extinction", spec, l, t, 0, q);
                Estimate res = q;
                res.mean = gw.residual;
                rep.add("fixed_point_residual", spec, l, t, 0, res);
            }
        }
        return rep;
    }

    const Graph g = build_graph(spec);
    if (exp == "survival") {
        std::int64_t hits = 0;
        for (double t : ts) {
            for (double l : lambdas) {
                SurvivalResult s = survival_probability(g, FrogParams{l, t}, n, replicas, seed, max_particles);
                hits += s.budget_hits;
                rep.add("survival", spec, l, t, n, s.survival);
            }
        }
        if (hits > 0) rep.notes.push_back(std::to_string(hits) + " replicas hit the particle budget (counted as survivals)");
    } else if (exp == "cluster_tail") {
        for (double t : ts) {
            for (double l : lambdas) {
                TailCurve tc = cluster_size_tail(g, FrogParams{l, t}, n, replicas, seed);
                for (int k = 1; k < static_cast<int>(tc.tail.size()); ++k) {
                    Estimate e = proportion(static_cast<std::int64_t>(std::llround(tc.tail[k] * replicas)), replicas,
                                            seed, "mc-cluster-tail");
                    rep.add("tail", spec, l, t, k, e);
                }
                Estimate slope;
                slope.mean = tc.slope;
                slope.replicas = replicas;
                slope.seed = seed;
                slope.method = "least squares on log tail";
                rep.add("tail_log_slope", spec, l, t, tc.fit_hi, slope);
                slope.mean = tc.r2;
                slope.method = "r squared";
                rep.add("tail_fit_r2", spec, l, t, tc.fit_hi, slope);
            }
        }
    } else if (exp == "phi") {
        const int sr = static_cast<int>(r.integer("set_radius", 1));
        const auto S = ball(g, g.origin(), sr);
        for (double t : ts) {
            for (double l : lambdas) {
                PhiReport pr = phi_report(g, S, "B(" + std::to_string(sr) + ")", FrogParams{l, t}, replicas, seed,
                                          static_cast<int>(r.integer("conditional_replicas", 20000)));
                rep.add("phi", spec, l, t, sr, pr.phi.phi);
                rep.add("phi_dual", spec, l, t, sr, pr.phi.dual);
                rep.add("phi_tilde", spec, l, t, sr, pr.phi_tilde.phi_tilde);
                Estimate c;
                c.mean = pr.constants.log_C;
                c.replicas = 1;
                c.method = "closed form";
                rep.add("log_C", spec, l, t, sr, c);
                c.mean = pr.subcritical ? 1.0 : 0.0;
                c.method = "phi + 3 se <= c";
                rep.add("subcritical", spec, l, t, sr, c);
            }
        }
    } else if (exp == "tilde_scan") {
        const Parameter free = r.parameter("lambda");
        const std::vector<int> radii = r.ints("radii", "1,2,3");
        const auto& grid = free == Parameter::lambda ? lambdas : ts;
        const double fixed = free == Parameter::lambda ? ts.front() : lambdas.front();
        TildeScan sc = tilde_critical_scan(g, free, fixed, radii, grid, replicas, seed);
        for (const auto& row : sc.rows) {
            const double l = free == Parameter::lambda ? row.value : fixed;
            const double t = free == Parameter::lambda ? fixed : row.value;
            rep.add("inf_phi", spec, l, t, row.argmin_radius, row.inf_phi);
            Estimate s;
            s.mean = row.subcritical ? 1.0 : 0.0;
            s.replicas = 1;
            s.method = "inf phi + 3 se <= c";
            rep.add("subcritical", spec, l, t, row.argmin_radius, s);
        }
        if (sc.crossing) {
            rep.notes.push_back("crossing between " + format_number(sc.crossing->first) + " and " +
                                format_number(sc.crossing->second));
        }
    } else if (exp == "bisection") {
        const Parameter free = r.parameter("lambda");
        BisectionOptions opt;
        opt.radius = n;
        opt.replicas = replicas;
        opt.max_replicas = std::max(replicas, static_cast<int>(r.integer("max_replicas", 6400)));
        opt.threshold = r.real("threshold", 0.1);
        opt.tol = r.real("tol", 0.05);
        const double fixed = free == Parameter::lambda ? ts.front() : lambdas.front();
        CriticalBracket br = critical_bisection(g, free, fixed, r.real("lo", 0.0), r.real("hi", 4.0), opt, seed);
        const double l_lo = free == Parameter::lambda ? br.lo : fixed, t_lo = free == Parameter::lambda ? fixed : br.lo;
        const double l_hi = free == Parameter::lambda ? br.hi : fixed, t_hi = free == Parameter::lambda ? fixed : br.hi;
        rep.add("survival_at_lo", spec, l_lo, t_lo, n, br.at_lo);
        rep.add("survival_at_hi", spec, l_hi, t_hi, n, br.at_hi);
        for (const auto& note : br.notes) rep.notes.push_back(note);
        rep.notes.push_back(std::string("bracket for ") + to_string(free) + ": [" + format_number(br.lo) + ", " +
                            format_number(br.hi) + "]");
        Estimate edge;
        edge.replicas = 1;
        edge.seed = seed;
        edge.method = "bisection bracket";
        edge.mean = br.lo;
        rep.add("bracket_lo", spec, l_lo, t_lo, n, edge);
        edge.mean = br.hi;
        rep.add("bracket_hi", spec, l_hi, t_hi, n, edge);
        if (!br.reached_tolerance) rep.notes.push_back("bracket wider than tol");
    } else if (exp == "russo") {
        const std::string which = cfg.get("parameter", "both");
        const double step = r.real("step", 0.05);
        const int phi_reps = static_cast<int>(r.integer("phi_replicas", 4000));
        for (Parameter p : {Parameter::lambda, Parameter::t}) {
            if (which != "both" && which != to_string(p)) continue;
            RussoReport rr =
                russo_inequality_check(g, n, FrogParams{lambdas.front(), ts.front()}, p, step, replicas, seed, phi_reps);
            const std::string tag = std::string("_d") + to_string(p);
            rep.add("probability" + tag, spec, lambdas.front(), ts.front(), n, rr.probability);
            rep.add("derivative" + tag, spec, lambdas.front(), ts.front(), n, rr.derivative);
            rep.add("rhs" + tag, spec, lambdas.front(), ts.front(), n, rr.rhs);
            rep.add("inf_phi" + tag, spec, lambdas.front(), ts.front(), n, rr.inf_phi);
            rep.check("russo" + tag, rr.holds,
                      std::to_string(rr.candidate_sets) + " candidate sets" +
                          (rr.precise_enough ? "" : ", derivative not resolved"));
        }
    } else if (exp == "edge_coupling") {
        rep = with_inputs(bernoulli_edge_coupling(g, FrogParams{lambdas.front(), ts.front()}, replicas, seed,
                                                  static_cast<int>(r.integer("pairs", 16))));
    } else if (exp == "abelian") {
        std::vector<std::uint64_t> seeds;
        for (int k = 0; k < replicas; ++k) seeds.push_back(derive_key(seed, {hash_name("abelian"), static_cast<std::uint64_t>(k)}));
        rep = with_inputs(abelian_invariance_check(g, FrogParams{lambdas.front(), ts.front()}, seeds));
    } else if (exp == "nonamenable") {
        NonamenableOptions opt;
        opt.t_list = ts;
        opt.radius = n;
        opt.replicas = replicas;
        opt.threshold = r.real("threshold", 0.1);
        opt.spectral_nmax = static_cast<int>(r.integer("spectral_nmax", 40));
        opt.escape_radius = static_cast<int>(r.integer("escape_radius", 3));
        opt.escape_replicas = static_cast<int>(r.integer("escape_replicas", 4000));
        rep = with_inputs(nonamenable_pipeline(g, lambdas.front(), opt, seed));
    } else if (exp == "spectral") {
        const int nmax = static_cast<int>(r.integer("nmax", 40));
        SpectralEstimate sp = spectral_radius_estimate(g, g.origin(), nmax);
        for (std::size_t k = 0; k < sp.root_sequence.size(); ++k) {
            Estimate e;
            e.mean = sp.root_sequence[k];
            e.replicas = 1;
            e.method = "exact return probability root";
            rep.add("return_root", spec, 0.0, 0.0, static_cast<int>(2 * (k + 1)), e);
        }
        Estimate e;
        e.mean = sp.estimate;
        e.replicas = 1;
        e.method = "extrapolated ratio";
        rep.add("spectral_radius", spec, 0.0, 0.0, nmax, e);
        if (sp.truncation_warning) rep.notes.push_back("boundary mass above tolerance; estimate is an upper bracket");
    }
    return rep;
}

std::string plot_script(const ExperimentReport& report) {
    // x axis: whichever of lambda, t, n varies across the rows
    std::set<double> ls, tv;
    std::set<int> nv;
    std::vector<std::string> metrics;
    for (const auto& m : report.metrics) {
        ls.insert(m.lambda);
        tv.insert(m.t);
        nv.insert(m.n);
        if (std::find(metrics.begin(), metrics.end(), m.metric) == metrics.end()) metrics.push_back(m.metric);
    }
    int col = 5;
    std::string xlabel = "n";
    if (ls.size() > 1) {
        col = 3;
        xlabel = "lambda";
    } else if (tv.size() > 1) {
        col = 4;
        xlabel = "t";
    }
    std::ostringstream os;
    os << "# " << report.name << " seed " << report.seed << "\n"
       << "set datafile separator \",\"\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output \"" << report.name << "-" << report.seed << ".png\"\n"
       << "set xlabel \"" << xlabel << "\"\n"
       << "set ylabel \"estimate\"\n"
       << "set key outside right\n"
       << "plot ";
    for (std::size_t k = 0; k < metrics.size(); ++k) {
        if (k) os << ", \\\n     ";
        os << "\"results.csv\" every ::1 using " << col << ":(strcol(8) eq \"" << metrics[k]
           << "\" ? $9 : NaN):10 with yerrorlines title \"" << metrics[k] << "\"";
    }
    os << "\n";
    return os.str();
}

RunResult run(const RunConfig& cfg, std::ostream* log) {
    RunResult res;
    res.messages = validate(cfg);
    if (!res.messages.empty()) {
        res.status = 2;
        return res;
    }
    const int previous = worker_count();
    set_worker_count(cfg.workers());
    try {
        ExperimentReport rep = run_experiment(cfg);
        set_worker_count(previous);
        const auto dir = cfg.out_dir();
        std::filesystem::create_directories(dir);
        const std::string csv = std::string(ExperimentReport::csv_header()) + "\n" + rep.csv_rows();
        const std::string stem = rep.name + "-" + std::to_string(rep.seed);
        auto write = [&](const std::filesystem::path& p, const std::string& text) {
            std::ofstream f(p, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + p.string());
            f << text;
            if (!f) throw std::runtime_error("write failed for " + p.string());
        };
        write(dir / "results.csv", csv);
        write(dir / "report.json", rep.json());
        write(dir / "plot.gp", plot_script(rep));
        write(dir / (stem + ".csv"), csv);
        write(dir / (stem + ".json"), rep.json());
        if (log) {
            for (const auto& c : rep.checks) *log << (c.pass ? "ok    " : "FAIL  ") << c.name << "  " << c.detail << "\n";
            for (const auto& n : rep.notes) *log << "note  " << n << "\n";
            *log << "wrote " << (dir / "results.csv").string() << "\n";
        }
        res.report = std::move(rep);
    } catch (const ValidationError& e) {
        set_worker_count(previous);
        res.status = 2;
        res.messages.push_back(e.what());
    } catch (const BudgetError& e) {
        set_worker_count(previous);
        res.status = 3;
        res.messages.push_back(e.what());
    } catch (const std::exception& e) {
        set_worker_count(previous);
        res.status = 1;
        res.messages.push_back(e.what());
    }
    return res;
}

}  // namespace frogsim
