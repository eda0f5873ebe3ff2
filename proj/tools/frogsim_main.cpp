// frogsim: batch runner for frog-model experiments.
//
//   frogsim run config.txt [key=value ...]
//   frogsim validate config.txt [key=value ...]
//   frogsim list

#include <CLI11.hpp>

#include <iostream>

#include "frogsim/config.hpp"
#include "frogsim/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"frog model with death: simulation and estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    int workers = -1;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("config", config_path, "key=value config file (use - for none)")->required();
    run->add_option("overrides", overrides, "key=value overrides");
    run->add_option("-w,--workers", workers, "worker threads (0 = all cores)");
    run->add_flag("-q,--quiet", quiet, "suppress the check summary");

    auto* val = app.add_subcommand("validate", "print every diagnostic of a config");
    val->add_option("config", config_path, "key=value config file (use - for none)")->required();
    val->add_option("overrides", overrides, "key=value overrides");

    auto* list = app.add_subcommand("list", "list experiment names");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& n : frogsim::experiment_names()) std::cout << n << "\n";
        return 0;
    }

    frogsim::RunConfig cfg;
    try {
        if (config_path != "-") cfg = frogsim::RunConfig::load(config_path);
        for (const auto& o : overrides) cfg.set(o);
        if (workers >= 0) cfg.set("workers", std::to_string(workers));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (val->parsed()) {
        const auto diags = frogsim::validate(cfg);
        for (const auto& d : diags) std::cout << d << "\n";
        return diags.empty() ? 0 : 2;
    }

    frogsim::RunResult res = frogsim::run(cfg, quiet ? nullptr : &std::cerr);
    for (const auto& m : res.messages) std::cerr << "error: " << m << "\n";
    return res.status;
}
