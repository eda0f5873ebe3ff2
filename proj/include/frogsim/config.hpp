#pragma once

// Run configuration for the batch front-end: flat key=value files, command-line
// overrides and grids written as lo:hi:step.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "frogsim/experiments.hpp"
#include "frogsim/graph.hpp"

namespace frogsim {

/// "lo:hi:step", a comma list, or a single number.
std::vector<double> parse_grid(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

/// "tree:3:12", "lattice:2:40", "ladder:2:400" or "file:<path>".
GraphSpec parse_graph_spec(const std::string& text, BoundaryMode mode = BoundaryMode::absorbing);

struct RunConfig {
    std::map<std::string, std::string> values;

    /// Parse key=value lines; '#' starts a comment. Throws ValidationError on a
    /// line without '='.
    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::filesystem::path& path);
    /// Apply one "key=value" override.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value) { values[key] = value; }

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback = {}) const;

    std::string experiment() const { return get("experiment"); }
    std::uint64_t seed() const;
    int replicas() const;
    int workers() const;
    std::filesystem::path out_dir() const { return get("out", "out"); }
    GraphSpec graph() const;
};

/// Every experiment name the runner accepts.
const std::vector<std::string>& experiment_names();

/// All violations, one message per problem; empty when the config is valid.
std::vector<std::string> validate(const RunConfig& cfg);

/// Run a validated config and return its report.
ExperimentReport run_experiment(const RunConfig& cfg);

struct RunResult {
    int status = 0;  ///< 0 ok, 2 validation, 3 budget, 1 other failure
    std::vector<std::string> messages;
    std::optional<ExperimentReport> report;
};

/// validate + run_experiment + write results.csv, report.json, plot.gp and
/// <experiment>-<seed>.{json,csv} into the output directory.
RunResult run(const RunConfig& cfg, std::ostream* log = nullptr);

/// gnuplot script reading results.csv.
std::string plot_script(const ExperimentReport& report);

}  // namespace frogsim
