// penaltylab — command-line front end for the encoded-penalty rate experiments

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "penaltylab/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Excitation-rate experiments for stabilizer-encoded Hamiltonians with energy penalties"};
    app.set_version_flag("--version", std::string(PENALTYLAB_VERSION));

    std::string command;
    std::string config;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;

    app.add_option("command", command, "check-code | rate | compare-dsame | sweep-penalty | sweep-size | propagate")
        ->required()
        ->check(CLI::IsMember(penaltylab::cli::commands()));
    app.add_option("--config,-c", config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
    app.add_option("--out,-o", out_dir, "output directory for CSV files and manifest.json");
    app.add_option("--seed", seed, "random seed (overrides run.seed)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : penaltylab::cli::kUsage;
    }

    try {
        return penaltylab::cli::execute(command, config, out_dir, seed, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return penaltylab::cli::kUsage;
    }
}
