// tdli: desk-scale simulator for a three-pulse photoionization-grating
// interferometer. Subcommands compute contrast scans, synthesize detector
// shot streams, and rerun the reference cross-checks.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tdli/run.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    long long seed = -1; // -1 keeps the config value
    std::string model;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* c = cmd->add_option("-c,--config", args.config_path, "JSON run configuration");
    if (config_required) c->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", args.out_dir,
                    "output directory (default $TDLI_OUT_DIR, else current directory)");
    cmd->add_option("-s,--seed", args.seed, "override the config seed");
    cmd->add_option("-m,--model", args.model, "quantum | classical | both")
        ->check(CLI::IsMember({"quantum", "classical", "both"}));
    cmd->add_option("-j,--threads", args.threads, "worker threads (0 = all cores)");
}

tdli::RunOptions make_run_options(const CommonArgs& args) {
    tdli::RunOptions ropt;
    if (!args.out_dir.empty()) {
        ropt.out_dir = args.out_dir;
    } else if (const char* env = std::getenv("TDLI_OUT_DIR"); env && *env) {
        ropt.out_dir = env;
    }
    ropt.threads = args.threads;
    ropt.model_override = args.model;
    return ropt;
}

tdli::RunConfig load_config(const CommonArgs& args) {
    tdli::RunConfig cfg = tdli::load_run_config(args.config_path);
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    return cfg;
}

tdli::RunConfig default_config(const CommonArgs& args) {
    if (!args.config_path.empty()) return load_config(args);
    tdli::RunConfig cfg;
    cfg.raw = tdli::json::object();
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-pulse ionization-grating interferometer simulator"};
    app.set_version_flag("--version", tdli::version_string);
    app.require_subcommand(1);

    CommonArgs timing_args, mass_args, height_args, accel_args, synth_args, analyze_args,
        oracle_args, fit_args;

    auto* timing = app.add_subcommand("timing-scan", "contrast versus pulse asymmetry dT");
    add_common(timing, timing_args);
    auto* mass = app.add_subcommand("mass-scan", "contrast versus cluster size");
    add_common(mass, mass_args);
    auto* height = app.add_subcommand("height-scan", "contrast versus beam height (tilt lever)");
    add_common(height, height_args);
    auto* accel = app.add_subcommand("accel-scan", "fringe shift versus acceleration");
    add_common(accel, accel_args);
    auto* synth = app.add_subcommand("synthesize-shots",
                                     "generate resonant + reference shot streams (JSONL)");
    add_common(synth, synth_args);
    auto* analyze = app.add_subcommand("analyze-shots",
                                       "post-select shot streams and estimate rates");
    add_common(analyze, analyze_args);
    std::string analyze_resonant, analyze_reference;
    analyze->add_option("--resonant", analyze_resonant, "resonant stream path");
    analyze->add_option("--reference", analyze_reference, "reference stream path");
    auto* oracle = app.add_subcommand("oracle-check",
                                      "rerun brute-force reference checks (exit 3 on miss)");
    add_common(oracle, oracle_args, /*config_required=*/false);
    auto* fit = app.add_subcommand("fit", "fit a model to a scan table");
    std::string fit_kind, fit_input, fit_x, fit_y;
    fit->add_option("kind", fit_kind, "gaussian | damped-sine")
        ->required()
        ->check(CLI::IsMember({"gaussian", "damped-sine"}));
    fit->add_option("input", fit_input, "CSV or JSON table")->required()->check(CLI::ExistingFile);
    fit->add_option("-x,--x-column", fit_x, "x column name (default first column)");
    fit->add_option("-y,--y-column", fit_y, "y column name (default last column)");
    fit->add_option("-o,--out", fit_args.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (timing->parsed())
            return tdli::run_timing_scan(load_config(timing_args), make_run_options(timing_args));
        if (mass->parsed())
            return tdli::run_mass_scan(load_config(mass_args), make_run_options(mass_args));
        if (height->parsed())
            return tdli::run_height_scan(load_config(height_args), make_run_options(height_args));
        if (accel->parsed())
            return tdli::run_accel_scan(load_config(accel_args), make_run_options(accel_args));
        if (synth->parsed())
            return tdli::run_synthesize_shots(load_config(synth_args),
                                              make_run_options(synth_args));
        if (analyze->parsed())
            return tdli::run_analyze_shots(load_config(analyze_args),
                                           make_run_options(analyze_args), analyze_resonant,
                                           analyze_reference);
        if (oracle->parsed())
            return tdli::run_oracle_check(default_config(oracle_args),
                                          make_run_options(oracle_args));
        if (fit->parsed()) return tdli::run_fit(fit_kind, fit_input, fit_x, fit_y,
                                                make_run_options(fit_args));
    } catch (const tdli::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tdli::oracle_error& e) {
        std::cerr << "oracle mismatch: " << e.what() << "\n";
        return 3;
    } catch (const tdli::convergence_error& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
