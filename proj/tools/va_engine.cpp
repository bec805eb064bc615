/**
 * @file va_engine.cpp
 * @brief Command-line entry point: check | boundary | price | fair-fee | tables.
 */
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "va/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Variable annuity surrender boundary and pricing engine"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string sweep_text;
    va::CliOptions opt;
    int n = 0;
    double eps = 0.0;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "YAML configuration file");
    app.add_option("--out", opt.out_dir, "Output directory for CSV files");
    app.add_flag("--plot", opt.plot, "Also write one two-column series per curve");
    app.add_flag("--verify", opt.verify, "Cross-check prices with Monte Carlo and the Bermudan recursion");
    app.add_option("--sweep", sweep_text, "Run once per value: KEY=lo:hi:step");
    auto* n_opt = app.add_option("--n", n, "Time steps of the boundary grid")->check(CLI::PositiveNumber);
    auto* eps_opt = app.add_option("--eps", eps, "Picard stopping tolerance")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed");

    auto* check = app.add_subcommand("check", "Check model assumptions and report t*, h and Lambda");
    auto* boundary = app.add_subcommand("boundary", "Solve the surrender boundary");
    auto* price = app.add_subcommand("price", "Price the contract and its surrender option");
    auto* fair_fee = app.add_subcommand("fair-fee", "Calibrate the fee rate that prices the contract at par");
    auto* tables = app.add_subcommand("tables", "Reproduce the reference fee and value tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return va::kExitConfig;
    }

    va::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = va::load_config(config_path);
        if (*n_opt) cfg.solver_n = n;
        if (*eps_opt) cfg.solver_eps = eps;
        if (*seed_opt) cfg.mc.seed = seed;
        cfg.validate();
        if (!sweep_text.empty()) opt.sweep = va::parse_sweep(sweep_text);
    } catch (const va::ConfigError& e) {
        std::cerr << "configuration error";
        if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
        std::cerr << ": " << e.what() << '\n';
        return va::kExitConfig;
    }

    try {
        if (*check) return va::cmd_check(cfg, opt, std::cout);
        if (*boundary) return va::cmd_boundary(cfg, opt, std::cout);
        if (*price) return va::cmd_price(cfg, opt, std::cout);
        if (*fair_fee) return va::cmd_fair_fee(cfg, opt, std::cout);
        if (*tables) return va::cmd_tables(cfg, opt, std::cout);
    } catch (const va::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return va::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return va::kExitSolver;
    }
    return va::kExitOk;
}
