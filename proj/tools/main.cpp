#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdlab/commands.hpp"
#include "sdlab/version.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;  // empty -> use config output.dir
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "master seed override")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
}

sdlab::config::RunConfig load_with_overrides(const CommonOpts& opts) {
    auto cfg = sdlab::config::load_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.output.dir = opts.out_dir;
    if (opts.seed_set) cfg.protocol.master_seed = opts.seed;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deprivation-test simulation lab"};
    app.set_version_flag("--version", std::string(sdlab::kToolVersion));
    app.require_subcommand(1);

    CommonOpts sim_opts;
    auto* sim = app.add_subcommand(
        "simulate", "integrate the model under input-on and deprived conditions");
    add_common(sim, sim_opts);

    CommonOpts proto_opts;
    bool strict = false;
    auto* proto = app.add_subcommand(
        "run-protocol", "run the full deprivation protocol with a twin control");
    add_common(proto, proto_opts);
    proto->add_flag("--strict", strict, "exit nonzero when the verdict is a fail");

    CommonOpts sweep_opts;
    std::string sweep_param;
    std::vector<double> sweep_values;
    auto* sweep = app.add_subcommand("sweep", "parameter sweep (A, alpha, C, a, k_days)");
    add_common(sweep, sweep_opts);
    sweep->add_option("--param", sweep_param, "parameter to sweep (overrides config)");
    sweep->add_option("--values", sweep_values, "values to sweep (overrides config)");

    std::string bundle_dir;
    auto* report = app.add_subcommand("report", "re-render plot data from an existing bundle");
    report->add_option("bundle", bundle_dir, "bundle directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : sdlab::commands::exit_code::usage;
    }

    using namespace sdlab::commands;
    return run_with_exit_codes(
        [&]() -> int {
            if (sim->parsed()) {
                auto cfg = load_with_overrides(sim_opts);
                cmd_simulate(cfg, cfg.output.dir, std::cout);
                return exit_code::ok;
            }
            if (proto->parsed()) {
                auto cfg = load_with_overrides(proto_opts);
                auto verdict = cmd_run_protocol(cfg, cfg.output.dir, std::cout);
                if (strict && !verdict.pass) return exit_code::verdict_failed;
                return exit_code::ok;
            }
            if (sweep->parsed()) {
                auto cfg = load_with_overrides(sweep_opts);
                if (!sweep_param.empty()) cfg.sweep.parameter = sweep_param;
                if (!sweep_values.empty()) cfg.sweep.values = sweep_values;
                cmd_sweep(cfg, cfg.output.dir, std::cout);
                return exit_code::ok;
            }
            cmd_report(bundle_dir, std::cout);
            return exit_code::ok;
        },
        std::cerr);
}
