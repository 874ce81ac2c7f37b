#include "projem/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Projected Euler-Maruyama simulation, convergence studies and MLMC pricing"};
    app.require_subcommand(1);

    projem::CommandOptions options;
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string config_path;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "Experiment config (JSON)")->required();
        cmd->add_option("--out", out_dir, "Output directory (overrides config)");
        cmd->add_option("--seed", seed, "Master seed (overrides config)");
        cmd->add_option("--threads", threads, "Worker threads, 0 = all cores (overrides config)");
    };
    auto* convergence = app.add_subcommand("convergence", "Strong-error study and rate fit");
    auto* mlmc = app.add_subcommand("mlmc", "Multilevel Monte Carlo pricing");
    auto* price = app.add_subcommand("price", "Closed-form, exact or Monte Carlo price");
    for (auto* cmd : {convergence, mlmc, price}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : projem::exit_code::config;
    }

    for (auto* cmd : {convergence, mlmc, price}) {
        if (cmd->count("--out")) options.out = out_dir;
        if (cmd->count("--seed")) options.seed = seed;
        if (cmd->count("--threads")) options.threads = threads;
    }

    if (*convergence) return projem::cmd_convergence(config_path, options, std::cout, std::cerr);
    if (*mlmc) return projem::cmd_mlmc(config_path, options, std::cout, std::cerr);
    return projem::cmd_price(config_path, options, std::cout, std::cerr);
}
