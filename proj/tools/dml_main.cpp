#include "dml/cli.hpp"

#include <CLI11.hpp>

#include <exception>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Debiased cross-fit estimation of linear regression functionals"};
    app.require_subcommand(1);

    std::string config_path;
    std::string input_dir;
    std::string output_path;
    dml::CliOverrides overrides;

    std::uint64_t seed = 0;
    std::size_t replications = 0;
    std::size_t threads = 0;
    std::size_t folds = 0;
    std::string output_dir;

    auto* estimate = app.add_subcommand("estimate", "Point estimate and confidence interval");
    estimate->add_option("--config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    estimate->add_option("--seed", seed, "Override the config seed");
    estimate->add_option("--folds", folds, "Override the fold count");
    estimate->add_option("--output", output_dir, "Override the output directory");

    auto* simulate = app.add_subcommand("simulate", "Coverage study over synthetic data");
    simulate->add_option("--config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--seed", seed, "Override the config seed");
    simulate->add_option("--replications", replications, "Override the replication count");
    simulate->add_option("--threads", threads, "Override the worker thread count");
    simulate->add_option("--folds", folds, "Override the fold count");
    simulate->add_option("--output", output_dir, "Override the output directory");

    auto* bounds = app.add_subcommand("bounds", "Error-bound diagnostics");
    bounds->add_option("--config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    bounds->add_option("--output", output_dir, "Override the output directory");

    auto* report = app.add_subcommand("report", "Collate coverage tables into one markdown file");
    report->add_option("--dir", input_dir, "Directory holding coverage_*.csv files")
        ->required()
        ->check(CLI::ExistingDirectory);
    report->add_option("--output", output_path, "Report path (default <dir>/report.md)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    auto collect = [&](CLI::App* sub) {
        if (sub->count("--seed")) overrides.seed = seed;
        if (sub->count("--folds")) overrides.folds = folds;
        if (sub->count("--output")) overrides.output_dir = output_dir;
    };

    try {
        if (estimate->parsed()) {
            collect(estimate);
            return dml::cmd_estimate(config_path, overrides);
        }
        if (simulate->parsed()) {
            collect(simulate);
            if (simulate->count("--replications")) overrides.replications = replications;
            if (simulate->count("--threads")) overrides.threads = threads;
            return dml::cmd_simulate(config_path, overrides);
        }
        if (bounds->parsed()) {
            collect(bounds);
            return dml::cmd_bounds(config_path, overrides);
        }
        return dml::cmd_report(input_dir, output_path);
    } catch (const std::exception& e) {
        return dml::report_error(e);
    }
}
