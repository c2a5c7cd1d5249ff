#pragma once

#include <string>
#include <utility>

#include "odebound/config.hpp"
#include "odebound/scalar_bounds.hpp"
#include "odebound/transition.hpp"

namespace odebound::pipeline {

/// Shared precomputation for every command: the fundamental path, the
/// auxiliary coefficients with the Lipschitz profile attached, and the
/// resolved initial state / comparison level.
struct PreparedRun {
    config::RunConfig cfg;
    transition::FundamentalPath path;
    bounds::AuxCoefficients coeffs;
    lin::Vec x0;
    double X0 = 0.0;     // ||W^-1(t0) x0||
    double radius = 0.0;  // ball for the classical Lipschitz constant
    bool radius_defaulted = false;
    std::pair<double, double> window{0.0, 0.0};
    double t_star = 0.0;
};

[[nodiscard]] PreparedRun prepare(const config::RunConfig& cfg);

/// path.csv + exponents.json: singular values, p, k, running averages, and
/// the growth/conditioning estimates.
void run_analyze(const PreparedRun& run, const std::string& outdir);

/// bounds.csv with columns t, X_linear, X_nonlinear, norm_measured.
void run_bound(const PreparedRun& run, const std::string& outdir);

/// criteria.json with the decay-test report.
void run_criteria(const PreparedRun& run, const std::string& outdir);

/// regions.json with the reduction, fixed points, margins and certificates.
void run_regions(const PreparedRun& run, const std::string& outdir);

/// validation.json + violations.csv; returns the number of bound violations
/// so the caller can map them to a failing exit code.
int run_validate(const PreparedRun& run, const std::string& outdir);

/// trace.json + tail_cloud.csv from reverse-time boundary tracing.
void run_trace(const PreparedRun& run, const std::string& outdir);

/// Full per-figure bundle; `out_base` is the parent directory (the preset
/// name is appended), empty means the current directory.
void run_preset(const std::string& name, const std::string& out_base);

/// manifest.json + config.json echo; every command emits one.
void write_manifest(const PreparedRun& run, const std::string& outdir,
                    const std::string& command);

}  // namespace odebound::pipeline
