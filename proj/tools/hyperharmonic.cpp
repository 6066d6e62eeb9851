// Batch CLI over the staged pipeline. Settings are applied in this order,
// later sources winning: defaults, --config file, --manifest (run only),
// command-line flags.

#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hyperharmonic/pipeline.hpp"

namespace {

using hyperharmonic::PipelineConfig;

struct Command {
    CLI::App* app = nullptr;
    std::function<void(const PipelineConfig&)> action;
    // Settings flags in declaration order; std::map keeps storage addresses stable.
    std::vector<std::pair<std::string, CLI::Option*>> flags;
    std::map<std::string, std::string> values;
    std::string config_file;
    std::string manifest_file;
    bool quick = false;
};

const std::map<std::string, std::string>& flag_help()
{
    static const std::map<std::string, std::string> help{
        {"input", "input CSV with a header row of variable names"},
        {"kind", "discrete (empirical pmf) or continuous (Gaussian copula); default discrete"},
        {"smoothing", "additive smoothing pseudo-count for discrete estimation; default 0"},
        {"distribution", "distribution.json from `estimate`, used instead of --input"},
        {"structural", "structural.json from `complex`"},
        {"signals", "signals.json from `signals` (or fourier_signals.json for `cev`)"},
        {"spectrum-dir", "directory holding spectrum_n<n>.json files from `spectrum`"},
        {"dimensions", "comma-separated signal dimensions; default 2..min(N,5)"},
        {"measures", "comma-separated measures (tc, dtc, o_information, s_information, "
                     "interaction_information); default o_information,s_information"},
        {"metric", "mutual_information, abs_pearson or total_variation; default mutual_information"},
        {"aggregator", "mean, max or min for higher-order weights; default mean"},
        {"floor", "minimum positive simplex weight; default 1e-9"},
        {"max-n", "largest variable count index N accepted; default 16"},
        {"laplacian", "derived or step4_printed; default derived"},
        {"kernel-tolerance", "eigenvalues at or below tol*max count as kernel; default 1e-8"},
        {"random-bases", "number of random bases in control-random; default 80"},
        {"random-inner", "weighted or euclidean orthonormality of random bases; default weighted"},
        {"ranks", "comma-separated covariance ranks; default 2,9"},
        {"replicates", "replicates per rank; default 50"},
        {"samples", "samples per replicate; default 10000"},
        {"size", "number of synthetic variables; default 9"},
        {"synth-random-bases", "random bases per synthetic replicate; default 0"},
        {"log-base", "bits or nats; default bits"},
        {"seed", "single source of all randomness; default 0"},
        {"output", "output directory; default $HYPERHARMONIC_OUTPUT_DIR or ./hyperharmonic-out"},
        {"jobs", "worker threads; default 1"},
    };
    return help;
}

Command& add_command(CLI::App& root, std::vector<std::unique_ptr<Command>>& commands, const std::string& name,
                     const std::string& description, const std::vector<std::string>& keys,
                     std::function<void(const PipelineConfig&)> action)
{
    auto& cmd = *commands.emplace_back(std::make_unique<Command>());
    cmd.app = root.add_subcommand(name, description);
    cmd.action = std::move(action);
    cmd.app->add_option("--config", cmd.config_file, "flat key = value settings file; flags override it")
        ->check(CLI::ExistingFile);
    std::vector<std::string> all = keys;
    for (const char* common : {"log-base", "seed", "output", "jobs"})
        all.emplace_back(common);
    for (const auto& key : all)
        cmd.flags.emplace_back(key, cmd.app->add_option("--" + key, cmd.values[key], flag_help().at(key)));
    return cmd;
}

PipelineConfig resolve(const Command& cmd)
{
    PipelineConfig cfg;
    if (!cmd.config_file.empty())
        hyperharmonic::load_config_file(cfg, cmd.config_file);
    if (!cmd.manifest_file.empty())
        hyperharmonic::load_manifest(cfg, cmd.manifest_file);
    if (cmd.quick)
        cfg.replicates = 2;
    for (const auto& [key, option] : cmd.flags)
        if (option->count() > 0)
            hyperharmonic::apply_setting(cfg, key, cmd.values.at(key));
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral compression of high-order information signals on weighted simplices"};
    app.set_version_flag("--version", std::string(hyperharmonic::kVersion));
    app.require_subcommand(1);

    const std::vector<std::string> estimation{"input", "kind", "smoothing"};
    const std::vector<std::string> structure{"metric", "aggregator", "floor", "max-n"};
    auto concat = [](std::initializer_list<std::vector<std::string>> parts) {
        std::vector<std::string> out;
        for (const auto& p : parts)
            out.insert(out.end(), p.begin(), p.end());
        return out;
    };

    std::vector<std::unique_ptr<Command>> commands;
    add_command(app, commands, "estimate", "estimate the joint model of a CSV into distribution.json", estimation,
                hyperharmonic::run_estimate);
    add_command(app, commands, "complex", "build the structural simplex, boundary matrices and weights",
                concat({estimation, {"distribution"}, structure}), hyperharmonic::run_complex);
    add_command(app, commands, "signals", "compute canonical high-order signals",
                concat({estimation, {"distribution", "dimensions", "measures"}}), hyperharmonic::run_signals);
    add_command(app, commands, "spectrum", "Laplacians, eigenvalues and Fourier bases of a structural simplex",
                {"structural", "dimensions", "laplacian", "kernel-tolerance"}, hyperharmonic::run_spectrum);
    add_command(app, commands, "transform", "write canonical signals in the Fourier basis",
                {"signals", "spectrum-dir"}, hyperharmonic::run_transform);
    add_command(app, commands, "cev", "explained-variance reports for a signals document", {"signals"},
                hyperharmonic::run_cev);
    add_command(app, commands, "control-random", "Fourier basis against random bases",
                concat({estimation, structure,
                        {"dimensions", "measures", "laplacian", "random-bases", "random-inner", "signals",
                         "spectrum-dir"}}),
                hyperharmonic::run_control_random);
    auto& synth = add_command(app, commands, "control-synth", "rank-controlled synthetic experiment",
                              {"ranks", "replicates", "samples", "size", "dimensions", "measures", "aggregator",
                               "floor", "laplacian", "synth-random-bases", "random-inner"},
                              hyperharmonic::run_control_synth);
    synth.app->add_flag("--quick", synth.quick, "two replicates per rank, for smoke runs");
    auto& run = add_command(app, commands, "run", "full pipeline from a CSV to CEV reports",
                            concat({estimation, structure, {"dimensions", "measures", "laplacian", "kernel-tolerance"}}),
                            hyperharmonic::run_pipeline);
    run.app->add_option("--manifest", run.manifest_file, "replay the settings recorded in a manifest.json")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& cmd : commands)
            if (cmd->app->parsed()) {
                cmd->action(resolve(*cmd));
                return 0;
            }
    } catch (const hyperharmonic::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
