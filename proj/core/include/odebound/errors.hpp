#pragma once

#include <stdexcept>
#include <string>

namespace odebound {

/// Base class for failures of the numerical machinery (integration, SVD,
/// exponent estimation).  The CLI maps these to exit code 2.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Step size fell below the resolvable fraction of the integration span,
/// which usually indicates stiffness or a coefficient singularity.
struct StepUnderflowError : NumericalError {
    double t;
    StepUnderflowError(double t_, const std::string& what)
        : NumericalError(what), t(t_) {}
};

/// A state or derivative evaluation stopped being finite.
struct DivergenceError : NumericalError {
    double last_valid_time;
    DivergenceError(double t, const std::string& what)
        : NumericalError(what), last_valid_time(t) {}
};

/// A matrix that must be comfortably invertible is numerically singular.
struct NearSingularError : NumericalError {
    using NumericalError::NumericalError;
};

/// The requested horizon is too short for the tail-window statistics.
struct InsufficientHorizonError : NumericalError {
    using NumericalError::NumericalError;
};

/// Configuration rejection; `path` names the offending JSON location.
/// The CLI maps these to exit code 1.
struct ConfigError : std::runtime_error {
    std::string path;
    ConfigError(std::string path_, const std::string& what)
        : std::runtime_error(path_ + ": " + what), path(std::move(path_)) {}
};

}  // namespace odebound
