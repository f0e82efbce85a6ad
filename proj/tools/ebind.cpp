// ebind: command-line driver for the enhanced-binding computations.
//
//   ebind <command> [--config FILE] [--out DIR] [--threads N] [--seed N] [--tol X]
//
// Commands: lambda0, eta2, sigma0, certify, sweep, selftest.
// Exit status: 0 success, 1 certificate/selftest failure, 2 bad arguments or
// config, 3 numeric failure.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ebind/cli.hpp"

int main(int argc, char** argv) {
    namespace cli = ebind::cli;

    CLI::App app{"Enhanced-binding threshold computations"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir = "ebind_out";
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;

    const std::map<std::string, std::string> blurbs{
        {"lambda0", "critical coupling of -Delta + lambda W"},
        {"eta2", "d functionals, C_W and eta^2"},
        {"sigma0", "truncated self-energy against inf L"},
        {"certify", "binding certificate at the configured lambda probes"},
        {"sweep", "bisected threshold lambda_c(alpha) plus CSV"},
        {"selftest", "invariant suite"},
    };
    for (const auto& name : cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
        sub->add_option("--config", config_path, "run configuration (INI)")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--tol", tol, "quadrature tolerance")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::exit_code::parse_error;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    cli::RunConfig config;
    try {
        if (!config_path.empty()) config = cli::parse_config_file(config_path);
        cli::apply_overrides(config, {threads, seed, tol});
    } catch (const ebind::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::exit_code::parse_error;
    }
    return cli::run_command(command, config, out_dir, std::cerr);
}
