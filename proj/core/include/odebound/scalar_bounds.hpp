#pragma once

#include <optional>
#include <string>
#include <vector>

#include "odebound/model.hpp"
#include "odebound/transition.hpp"

// Scalar comparison bounds.  With p(t), k(t) from the fundamental-matrix
// path, an envelope L(t, rho) >= ||f(t, x)|| / (rho = ||x||) and the forcing
// norm ||F(t)||, the scalar initial value problem
//
//     X' = p(t) X + k(t) (L(t, X) + ||F(t)||),   X(t0) = ||W^-1(t0) x0||
//
// dominates ||x(t, x0)|| for every x0 in the ellipsoid it starts from.  This
// module solves that equation, its linearization via a classical Lipschitz
// constant, and the closed-form single-power (Bernoulli) case, and evaluates
// the associated decay criteria.

namespace odebound::bounds {

struct LipschitzData {
    double radius = 0;        // ball radius the constant is valid on
    double l_hat = 0;         // sup of the profile
    std::vector<double> l;    // l(t) on the grid
    bool radius_defaulted = false;
};

struct AuxCoefficients {
    std::vector<double> grid;
    std::vector<double> p;
    std::vector<double> k;
    model::LipschitzEnvelope envelope;
    std::vector<double> forcing_norm;  // ||F(t)|| sampled on the grid
    double forcing_hat = 0;            // exact sup bound of ||F(t)||
    std::optional<LipschitzData> lipschitz;
};

/// Collects p, k, the envelope of sys.f and the forcing norm on the path grid.
[[nodiscard]] AuxCoefficients make_aux_coefficients(const transition::FundamentalPath& path,
                                                    const model::SystemSpec& sys);

/// Attaches the classical Lipschitz profile for ball radius R.
void attach_lipschitz(AuxCoefficients& coeffs, double R, bool defaulted = false);

enum class BoundKind { Linear, Nonlinear, Bernoulli, SupReduced, Averaged };

struct BoundCurve {
    std::vector<double> grid;
    std::vector<double> values;
    double X0 = 0;
    BoundKind kind = BoundKind::Nonlinear;
    /// Set when the curve left the escape radius before the end of the grid;
    /// the curve then ends at the last computed point.
    std::optional<double> blow_up_time;
};

/// Variation-of-constants solution of X' = (p + k l) X + k ||F||, evaluated
/// with cumulative trapezoid quadrature in a single overflow-safe pass.
/// Requires the Lipschitz profile to be attached.
[[nodiscard]] BoundCurve solve_linear(const AuxCoefficients& coeffs, double X0);

/// Integrates X' = p X + k (L(t, X) + ||F||) with p, k, ||F|| interpolated
/// linearly between grid points and the envelope evaluated exactly in t.
[[nodiscard]] BoundCurve solve_nonlinear(const AuxCoefficients& coeffs, double X0,
                                         const ode::IntegrateOptions& opts = {});

/// Closed form for the single-power envelope L = c(t) X^alpha with no
/// forcing, via the substitution u = X^(1-alpha).  alpha = 1 is rejected.
[[nodiscard]] BoundCurve solve_bernoulli(const std::vector<double>& grid,
                                         const std::vector<double>& p,
                                         const std::vector<double>& k,
                                         const std::vector<double>& c,
                                         double alpha, double X0);
[[nodiscard]] BoundCurve solve_bernoulli(double p, double k, double c, double alpha,
                                         double X0, double t0, double t1,
                                         double step);

struct ClassicalOverride {
    std::optional<double> N;
    std::optional<double> lambda;
};

struct CriteriaReport {
    double t_star = 0;

    // pointwise decay: p + k l <= 0 beyond t_star, equality only isolated
    bool cor1_holds = false;
    double cor1_max_excess = 0;
    double cor1_equality_fraction = 0;

    // uniform margin nu = -sup (p + k l); ultimate bound F_hat k_hat / nu
    bool cor2_holds = false;
    double nu = 0;
    std::optional<double> cor2_ultimate_bound;

    // averaged margin chi = mu_max + chi_star
    bool cor3_holds = false;
    double chi = 0;
    double mu_max = 0;
    double chi_star = 0;

    // decay-rate split rho = -chi - epsilon with transient gain D_hat
    bool cor4_holds = false;
    double rho = 0;
    double D_hat = 0;
    std::optional<double> cor4_ultimate_bound;

    // classical tests based on N, l_hat, lambda
    bool classical6_holds = false;
    double N = 1;
    double l_hat = 0;
    double lambda = 0;
    double classical6_value = 0;
    bool classical8_holds = false;
    double classical8_value = 0;

    double f_hat = 0;
    double k_hat = 1;
};

[[nodiscard]] double classical_margin(double N, double l_hat, double lambda);

/// Evaluates all criteria on [t_star, end of grid].  The override slots let a
/// caller supply externally estimated N or lambda for the classical tests.
[[nodiscard]] CriteriaReport evaluate_criteria(const AuxCoefficients& coeffs,
                                               const transition::FundamentalPath& path,
                                               double t_star, int restarts = 8,
                                               const ClassicalOverride& override_vals = {});

[[nodiscard]] std::string criteria_to_json(const CriteriaReport& report);

/// Piecewise-linear sample of a grid series at arbitrary t (clamped ends).
[[nodiscard]] double interp_series(const std::vector<double>& grid,
                                   const std::vector<double>& values, double t);

struct ScalarCurveResult {
    ode::Trajectory traj;
    /// Failure time of a step underflow or divergence, recovered as the
    /// vertical asymptote of the curve; the trajectory then ends just short
    /// of it.
    std::optional<double> asymptote;
};

/// Integrates a scalar comparison equation, absorbing blow-up: a steep power
/// law can drive the step below the resolvable floor before the escape
/// radius is reached, and with smooth coefficients that underflow is the
/// asymptote itself, not an error.
[[nodiscard]] ScalarCurveResult integrate_scalar_curve(const ode::Rhs& rhs,
                                                       double t0, double t1,
                                                       double X0,
                                                       const ode::IntegrateOptions& opts);

}  // namespace odebound::bounds
