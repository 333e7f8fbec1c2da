// Command-line front end. Four subcommands over one JSON experiment config:
//   simulate     draw a ground-truth trajectory and measurement dataset
//   estimate     run the requested estimators on an existing dataset
//   montecarlo   simulate-and-estimate over R seeded replicates
//   convergence  mesh-refinement study plus functional-convergence tables
// Exit codes: 0 success, 2 bad config or config/dataset mismatch, 3 I/O
// failure, 4 fewer than 90% of replicates completed. Output directory
// resolution: --out flag, then SDEMAP_OUT, then the config's output_dir.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdemap/harness.hpp"

namespace {

std::string resolve_out_dir(const std::string& flag_value, const sdemap::ExperimentConfig& cfg) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SDEMAP_OUT"); env != nullptr && *env != '\0') return env;
    return cfg.output_dir;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MAP and minimum-energy state-path/parameter estimation for SDE benchmarks"};
    app.require_subcommand(1);

    std::string config_path, dataset_path, out_flag;
    int workers = 1;
    std::uint64_t seed_override = 0;
    std::vector<CLI::Option*> seed_opts;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")
            ->required();
        cmd->add_option("--out", out_flag, "output directory (overrides config and SDEMAP_OUT)");
        cmd->add_option("--workers", workers, "worker threads (montecarlo)")
            ->check(CLI::PositiveNumber);
        seed_opts.push_back(
            cmd->add_option("--seed-override", seed_override, "replace the config's base seed"));
    };

    CLI::App* sim_cmd = app.add_subcommand("simulate", "generate a dataset");
    add_common(sim_cmd);
    CLI::App* est_cmd = app.add_subcommand("estimate", "estimate on an existing dataset");
    add_common(est_cmd);
    est_cmd->add_option("--dataset", dataset_path, "dataset CSV or a simulate output directory")
        ->required();
    CLI::App* mc_cmd = app.add_subcommand("montecarlo", "replicated simulate-and-estimate");
    add_common(mc_cmd);
    CLI::App* conv_cmd = app.add_subcommand("convergence", "mesh-refinement study");
    add_common(conv_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        sdemap::ExperimentConfig cfg =
            sdemap::parse_experiment_config(sdemap::read_text_file(config_path));
        for (const CLI::Option* opt : seed_opts)
            if (opt->count() > 0) cfg.seed = seed_override;
        const sdemap::BenchmarkSpec spec = sdemap::make_spec(cfg);
        const std::filesystem::path out = resolve_out_dir(out_flag, cfg);

        if (app.got_subcommand(sim_cmd)) return sdemap::cmd_simulate(cfg, spec, out);
        if (app.got_subcommand(est_cmd)) return sdemap::cmd_estimate(cfg, spec, dataset_path, out);
        if (app.got_subcommand(mc_cmd)) return sdemap::cmd_montecarlo(cfg, spec, out, workers);
        return sdemap::cmd_convergence(cfg, spec, out);
    } catch (const sdemap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return sdemap::exit_code::bad_config;
    } catch (const sdemap::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return sdemap::exit_code::io_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
