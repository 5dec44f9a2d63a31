#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iurlse/cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Reliable level set estimation under input uncertainty"};
    app.require_subcommand(1);

    std::string config;
    iurlse::cli::Overrides o;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t replications = 0;
    std::string method;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "experiment config (TOML)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the run seed");
        sub->add_option("--out", out, "output directory");
    };

    CLI::App* run = app.add_subcommand("run", "run replications and write trial CSV plus summary JSON");
    add_common(run);
    run->add_option("--replications", replications, "override the replication count");
    run->add_option("--method", method, "override the method (proposed, straddle, mile, random)");

    CLI::App* oracle = app.add_subcommand("oracle", "Monte Carlo table of true reliabilities");
    add_common(oracle);

    std::vector<std::string> inputs;
    std::string report_out;
    CLI::App* report = app.add_subcommand("report", "aggregate trial CSVs into mean and standard error per trial");
    report->add_option("files", inputs, "trial CSV files")->required();
    report->add_option("--out", report_out, "output CSV (default stdout)");

    CLI::App* list = app.add_subcommand("list-benchmarks", "print the built-in benchmarks");

    CLI11_PARSE(app, argc, argv);

    const auto collect = [&](CLI::App* sub) {
        if (sub->count("--seed")) o.seed = seed;
        if (sub->count("--out")) o.out = out;
        if (sub == run && run->count("--replications")) o.replications = replications;
        if (sub == run && run->count("--method")) o.method = method;
    };

    try {
        if (*run) {
            collect(run);
            iurlse::cli::cmd_run(config, o, std::cerr);
        } else if (*oracle) {
            collect(oracle);
            iurlse::cli::cmd_oracle(config, o, std::cerr);
        } else if (*report) {
            iurlse::cli::cmd_report(inputs, report_out, std::cout);
        } else if (*list) {
            iurlse::cli::cmd_list_benchmarks(std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
