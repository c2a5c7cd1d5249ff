#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "odebound/linalg.hpp"

// Adaptive explicit Runge-Kutta integration with an embedded 5(4) pair,
// cubic Hermite dense output onto a uniform grid, and reverse-time support.
// Vector and matrix systems share the same stepper; matrices travel as
// flattened row-major vectors.

namespace odebound::ode {

using Rhs = std::function<lin::Vec(double, const lin::Vec&)>;

struct IntegrateOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double output_step = 0.01;
    /// Norm threshold at which integration stops with the escape flag set.
    /// Escape is a reportable outcome, not an error.
    double escape_radius = 1e6;
    /// Upper bound on the internal step size; 0 means unlimited.
    double max_step = 0.0;
};

struct Trajectory {
    std::vector<double> grid;        // uniform, increasing or decreasing
    std::vector<lin::Vec> states;
    double rel_tol_used = 0.0;
    double abs_tol_used = 0.0;
    bool escaped = false;
    std::optional<double> escape_time;

    [[nodiscard]] std::size_t size() const { return grid.size(); }
};

/// Integrates x' = rhs(t, x) from t_start to t_end (either direction).
/// Local error per step is controlled against abs_tol + rel_tol * |state|.
/// Throws StepUnderflowError when the step falls below 1e-12 of the span and
/// DivergenceError when states or derivatives stop being finite.
[[nodiscard]] Trajectory integrate(const Rhs& rhs, double t_start, double t_end,
                                   const lin::Vec& x0,
                                   const IntegrateOptions& opts = {});

using MatRhs = std::function<lin::Mat(double, const lin::Mat&)>;

struct MatrixTrajectory {
    std::vector<double> grid;
    std::vector<lin::Mat> states;
    bool escaped = false;
    std::optional<double> escape_time;
};

[[nodiscard]] MatrixTrajectory integrate_matrix(const MatRhs& rhs, double t_start,
                                                double t_end, const lin::Mat& w0,
                                                const IntegrateOptions& opts = {});

}  // namespace odebound::ode
