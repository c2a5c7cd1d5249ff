#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "odebound/config.hpp"
#include "odebound/errors.hpp"
#include "odebound/pipeline.hpp"
#include "odebound/presets.hpp"

namespace {

// exit codes: 0 success, 1 usage or configuration error, 2 numerical
// failure, 3 bound violation detected by validate
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;
constexpr int kBoundViolation = 3;

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string tol;            // REL or REL,ABS
    std::string mode;           // sup | avg
    std::string normalization;  // identity | spectral
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run configuration");
    cmd->add_option("--preset", args.preset, "built-in experiment configuration");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "validation RNG seed override");
    cmd->add_option("--tol", args.tol, "integrator tolerance REL or REL,ABS");
    cmd->add_option("--mode", args.mode, "region reduction: sup or avg")
        ->check(CLI::IsMember({"sup", "avg"}));
    cmd->add_option("--normalization", args.normalization,
                    "fundamental matrix start: identity or spectral")
        ->check(CLI::IsMember({"identity", "spectral"}));
}

odebound::config::RunConfig resolve_config(const CommonArgs& args) {
    using namespace odebound;
    if (args.config_path.empty() && args.preset.empty())
        throw ConfigError("cli", "one of --config or --preset is required");
    if (!args.config_path.empty() && !args.preset.empty())
        throw ConfigError("cli", "--config and --preset are mutually exclusive");

    config::RunConfig cfg = args.preset.empty()
                                ? config::load_config_file(args.config_path)
                                : presets::make_preset(args.preset);

    if (args.seed) cfg.validation.seed = *args.seed;
    if (!args.tol.empty()) {
        const auto comma = args.tol.find(',');
        try {
            cfg.tolerances.rel = std::stod(args.tol.substr(0, comma));
            if (comma != std::string::npos)
                cfg.tolerances.abs = std::stod(args.tol.substr(comma + 1));
        } catch (const std::exception&) {
            throw ConfigError("cli.tol", "expected REL or REL,ABS as numbers");
        }
        if (!(cfg.tolerances.rel > 0.0) || !(cfg.tolerances.abs > 0.0))
            throw ConfigError("cli.tol", "tolerances must be > 0");
    }
    if (!args.mode.empty())
        cfg.regions.mode = args.mode == "sup" ? regions::ReductionMode::Sup
                                              : regions::ReductionMode::Averaged;
    if (!args.normalization.empty())
        cfg.normalization = args.normalization == "identity"
                                ? transition::NormalizationMode::Identity
                                : transition::NormalizationMode::SpectralW0;
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace odebound;

    CLI::App app{"certified norm bounds and region estimates for time-varying "
                 "nonlinear ODE systems"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "fundamental matrix path: singular values, p, k, exponents");
    CLI::App* bound = app.add_subcommand(
        "bound", "scalar comparison curves against the measured norm");
    CLI::App* criteria = app.add_subcommand("criteria", "decay criteria report");
    CLI::App* regions_cmd =
        app.add_subcommand("regions", "trapping and stability region certificates");
    CLI::App* validate_cmd = app.add_subcommand(
        "validate", "Monte-Carlo check of the bound against direct integration");
    CLI::App* trace = app.add_subcommand(
        "trace-boundary", "reverse-time tracing of the region boundary");
    CLI::App* reproduce =
        app.add_subcommand("reproduce", "run a built-in experiment end to end");
    for (CLI::App* cmd : {analyze, bound, criteria, regions_cmd, validate_cmd, trace})
        add_common(cmd, args);

    std::string reproduce_name;
    std::string reproduce_out;
    reproduce->add_option("preset", reproduce_name, "experiment name")->required();
    reproduce->add_option("--out", reproduce_out, "parent output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (reproduce->parsed()) {
            pipeline::run_preset(reproduce_name, reproduce_out);
            return kOk;
        }

        const config::RunConfig cfg = resolve_config(args);
        const pipeline::PreparedRun run = pipeline::prepare(cfg);
        const std::string outdir = cfg.output_dir;

        if (analyze->parsed()) {
            pipeline::run_analyze(run, outdir);
        } else if (bound->parsed()) {
            pipeline::run_bound(run, outdir);
        } else if (criteria->parsed()) {
            pipeline::run_criteria(run, outdir);
        } else if (regions_cmd->parsed()) {
            pipeline::run_regions(run, outdir);
        } else if (validate_cmd->parsed()) {
            const int violations = pipeline::run_validate(run, outdir);
            pipeline::write_manifest(run, outdir, "validate");
            if (violations > 0) {
                std::fprintf(stderr, "%d bound violation(s); see %s/violations.csv\n",
                             violations, outdir.c_str());
                return kBoundViolation;
            }
            return kOk;
        } else if (trace->parsed()) {
            pipeline::run_trace(run, outdir);
        }
        pipeline::write_manifest(run, outdir,
                                 app.get_subcommands().front()->get_name());
        return kOk;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumericalError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumericalError;
    }
    return kOk;
}
