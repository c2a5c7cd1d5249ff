#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "odebound/linalg.hpp"
#include "odebound/model.hpp"
#include "odebound/regions.hpp"
#include "odebound/transition.hpp"

namespace odebound::config {

struct ToleranceConfig {
    double rel = 1e-8;
    double abs = 1e-10;
    double output_step = 0.01;
};

struct AnalysisConfig {
    double t_star_fraction = 0.1;  // fraction of the horizon discarded as transient
    int restarts = 8;
    /// Sup/average window; defaults to the full horizon.
    std::optional<std::pair<double, double>> window;
    /// Ball radius for the classical Lipschitz constant; defaults to
    /// kappa * X0 with kappa from the frozen-mean modal conditioning.
    std::optional<double> lipschitz_radius;
};

struct RegionsConfig {
    regions::ReductionMode mode = regions::ReductionMode::Sup;
    /// Window for the margin integration; defaults to the analysis window.
    std::optional<std::pair<double, double>> mu_window;
};

struct ValidationConfig {
    int samples = 100;
    std::uint64_t seed = 20240817;
    double rel_slack = 1e-3;
};

struct RunConfig {
    model::SystemSpec system;
    transition::NormalizationMode normalization =
        transition::NormalizationMode::Identity;
    ToleranceConfig tolerances;
    AnalysisConfig analysis;
    RegionsConfig regions;
    ValidationConfig validation;
    std::string output_dir = "out";
    /// Starting point for measured-norm curves; defaults to a small corner
    /// state when absent.
    std::optional<lin::Vec> initial_state;
    /// One entry per defaulted field, e.g. "tolerances.rel = 1e-08 (default)".
    std::vector<std::string> applied_defaults;
};

/// Strict JSON parse: unknown keys anywhere are rejected with the full JSON
/// path, as are monomials of degree zero (the nonlinearity must vanish at
/// x = 0).  Every default applied is recorded in applied_defaults.
/// Throws ConfigError.
[[nodiscard]] RunConfig parse_config(const std::string& text);

[[nodiscard]] RunConfig load_config_file(const std::string& path);

/// Canonical full-precision JSON round-trip of the configuration; feeding it
/// back through parse_config reproduces the run.
[[nodiscard]] std::string config_to_json(const RunConfig& cfg);

/// FNV-1a over the canonical JSON; stable across platforms.
[[nodiscard]] std::uint64_t config_hash(const RunConfig& cfg);

[[nodiscard]] const char* normalization_name(transition::NormalizationMode mode);
[[nodiscard]] const char* mode_name(regions::ReductionMode mode);

}  // namespace odebound::config
