#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spme/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for the stochastic porous medium equation with Yosida regularisation"};
    app.require_subcommand(1);

    spme::RunOptions options;
    std::string config_path;
    std::string output_dir;

    for (const auto& name : spme::subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--set", options.overrides, "Override a config entry, e.g. --set solver.dt=0.01");
        sub->add_option("--workers", options.workers, "Parallel paths (results do not depend on it)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--output", output_dir, "Output directory (overrides output_dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : spme::kExitUsage;
    }

    options.subcommand = app.get_subcommands().front()->get_name();
    if (!config_path.empty()) options.config_path = config_path;
    if (!output_dir.empty()) options.output_dir = output_dir;
    return spme::run(options, std::cerr);
}
