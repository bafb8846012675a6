#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eaqec/cli.hpp"

namespace cli = eaqec::cli;

int main(int argc, char** argv) {
    CLI::App app{"Environment-assisted correction of qubit phase damping: sweeps and checks"};
    std::string mode;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_path;
    std::optional<double> w;
    std::optional<std::int64_t> steps;

    app.add_option("mode", mode, "roundtrip | scan | mixed-scan | fig4 | check-appendix")->required();
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--seed", seed, "64-bit seed");
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--w", w, "mixture weight of psi0 in the environment state");
    app.add_option("--steps", steps, "number of time grid points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kConfigError;
    }

    cli::RunConfig config = cli::RunConfig::defaults_for(mode);
    try {
        if (!config_path.empty()) cli::apply_config_file(config, config_path);
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kConfigError;
    }
    if (seed) config.seed = *seed;
    if (out_path) config.output_path = *out_path;
    if (w) config.w = *w;
    if (steps) config.t_steps = *steps;

    if (config.output_path.empty()) return cli::run(config, std::cout, std::cerr);

    std::ofstream out(config.output_path, std::ios::binary);
    if (!out) {
        std::cerr << "config error: cannot open output '" << config.output_path << "'\n";
        return cli::kConfigError;
    }
    return cli::run(config, out, std::cerr);
}
