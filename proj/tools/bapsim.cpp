#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bap/cli/runner.hpp"

namespace cli = bap::cli;

int main(int argc, char** argv) {
    CLI::App app{"Block advertisement protocol simulator"};
    app.require_subcommand(1);

    cli::RunConfig cfg;
    std::string scenario, out, sweep;
    std::vector<std::string> strategies;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--scenario", scenario, "Scenario JSON file (defaults apply when omitted)");
        sub->add_option("--seed", seed, "Override the scenario seed");
        if (with_out) {
            sub->add_option("--out", out, std::string("Output directory (default $") + cli::kOutputRootEnv + " or " +
                                              cli::kDefaultOutputRoot + ")");
            sub->add_option("--strategy", strategies, "Relay strategy: baseline, advert or late_advert");
        }
    };

    auto* run = app.add_subcommand("run", "Run one scenario");
    add_common(run, true);
    auto* sw = app.add_subcommand("sweep", "Run a scenario once per value of one field");
    add_common(sw, true);
    sw->add_option("--sweep", sweep, "field=v1,v2,... (dotted field path, e.g. link.bandwidth=1e5,1e6)")->required();
    auto* cmp = app.add_subcommand("compare", "Run a scenario under several strategies with the same seed");
    add_common(cmp, true);
    auto* val = app.add_subcommand("validate-scenario", "Check a scenario and print it with defaults filled in");
    add_common(val, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::EXIT_OK : cli::EXIT_USAGE;
    }

    if (!scenario.empty()) cfg.scenario_path = scenario;
    if (!out.empty()) cfg.out_dir = out;
    auto* active = app.get_subcommands().front();
    if (active->count("--seed")) cfg.seed = seed;
    for (const auto& s : strategies) {
        auto st = bap::sim::parse_strategy(s);
        if (!st) {
            std::cerr << "unknown strategy: " << s << '\n';
            return cli::EXIT_USAGE;
        }
        cfg.strategies.push_back(*st);
    }
    if (!sweep.empty()) {
        cfg.sweep = cli::parse_sweep(sweep);
        if (!cfg.sweep) {
            std::cerr << "malformed --sweep, expected field=v1,v2,...\n";
            return cli::EXIT_USAGE;
        }
    }

    if (active == run) return cli::run_command(cfg, std::cout, std::cerr);
    if (active == sw) return cli::sweep_command(cfg, std::cout, std::cerr);
    if (active == cmp) return cli::compare_command(cfg, std::cout, std::cerr);
    return cli::validate_scenario_command(cfg, std::cout, std::cerr);
}
