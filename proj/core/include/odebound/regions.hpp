#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "odebound/linalg.hpp"
#include "odebound/ode.hpp"
#include "odebound/scalar_bounds.hpp"
#include "odebound/transition.hpp"

namespace odebound::regions {

/// Sup mode keeps rigorous pointwise majorants of the comparison
/// coefficients; Averaged mode replaces them with window time-averages and
/// records how far the full-window and half-window averages disagree.
enum class ReductionMode { Sup, Averaged };

struct AutonomousReduction {
    ReductionMode mode = ReductionMode::Sup;
    double p_hat = 0.0;
    double k_hat = 1.0;
    double f_hat = 0.0;
    /// (degree, coefficient) pairs, ascending degree, coefficients >= 0.
    std::vector<std::pair<int, double>> coefficients;
    /// Averaged mode only: max relative full-vs-half window disagreement.
    double convergence_diagnostic = 0.0;
    bool averaging_warning = false;  // diagnostic > 0.1

    /// Q(X) = p_hat X + k_hat sum c_d X^d + k_hat f_hat
    [[nodiscard]] double q(double X) const;
    [[nodiscard]] double dq(double X) const;
};

[[nodiscard]] AutonomousReduction reduce_sup(const bounds::AuxCoefficients& coeffs,
                                             std::pair<double, double> window);
[[nodiscard]] AutonomousReduction reduce_average(const bounds::AuxCoefficients& coeffs,
                                                 std::pair<double, double> window);

enum class Stability { Stable, Unstable, SemiStable };

struct FixedPoint {
    double d = 0.0;      // strictly positive root of Q
    double slope = 0.0;  // Q'(d)
    Stability stability = Stability::SemiStable;
};

struct FixedPointSet {
    std::vector<FixedPoint> roots;  // ascending in d
    /// True when Q stays positive on the scanned range: every solution grows
    /// monotonically.  Zero is always an equilibrium when f_hat = 0 and is
    /// not listed.
    bool monotone_growth = false;
    double scan_ceiling = 0.0;
};

/// Sign-change scan on (0, ceiling] with the grid refined until the root
/// count is stable across two refinements, then bisection to 1e-12 relative
/// width.  A second pass over the critical points of Q recovers repeated
/// (tangent) roots.  Stability comes from the sign of Q'(d); |Q'(d)| within
/// 1e-8 * max(|p_hat|, k_hat) is reported SemiStable.
[[nodiscard]] FixedPointSet find_fixed_points(const AutonomousReduction& red);

/// Empirical margin for an averaged root: integrates the raw time-varying
/// scalar equation from X = d over the window (forward for a Stable root,
/// reverse time for an Unstable one, which makes it attracting) and takes
/// sup |X - d| over the trailing half.  epsilon > 0 caps the integrator
/// step so fast oscillations are resolved; pass 0 to use the defaults.
/// Returns nullopt when the trajectory leaves [0, 2d] or the sup reaches d:
/// the margin is unusable and the caller should fall back to Sup mode.
[[nodiscard]] std::optional<double> estimate_mu(const bounds::AuxCoefficients& coeffs,
                                                const AutonomousReduction& red,
                                                double d, Stability stability,
                                                double epsilon,
                                                std::pair<double, double> window,
                                                const ode::IntegrateOptions& opts = {});

struct RegionEstimate {
    enum class Kind { StabilityBasin, TrappingRegion, UltimateBound, Unbounded };
    Kind kind = Kind::TrappingRegion;
    double level = 0.0;      // ellipsoid level X*; infinity for Unbounded
    double mu_margin = 0.0;  // margin already folded into the level
    double t0 = 0.0;
    lin::Mat ellipsoid_map;  // W^-1(t0); membership is ||W^-1(t0) x0|| <= level
    /// False when the level had to be truncated to fit the validity ball.
    bool validity_radius_checked = true;
};

[[nodiscard]] const char* kind_name(RegionEstimate::Kind k);

/// Classification table, with mu the per-root margin (zeros in Sup mode):
///   f_hat = 0, unique Unstable d   -> StabilityBasin(d - mu), TrappingRegion(d)
///   f_hat = 0, unique Stable d     -> TrappingRegion(d), UltimateBound(d)
///   f_hat > 0, roots d2 < d1       -> TrappingRegion(d1 - mu1),
///     (Stable, Unstable)              TrappingRegion(d2 - mu2), UltimateBound(d2 + mu2)
///   repeated (SemiStable) root d   -> TrappingRegion(d - mu)
///   no roots, growth               -> Unbounded
/// Other root patterns fall back to per-root estimates: Unstable ->
/// TrappingRegion(d - mu), Stable -> UltimateBound(d + mu), with a
/// StabilityBasin at the lowest Unstable root when f_hat = 0.
/// Levels are truncated to fit inside the ball of radius omega2_radius
/// (when finite) and flagged via validity_radius_checked.
[[nodiscard]] std::vector<RegionEstimate> classify_regions(
    const FixedPointSet& fps, const AutonomousReduction& red,
    const transition::FundamentalPath& path, double t0,
    const std::vector<double>& mu_per_root,
    double omega2_radius = std::numeric_limits<double>::infinity());

/// True iff ||W^-1(t0) x0|| <= level (boundary counts as inside).
[[nodiscard]] bool ellipsoid_membership(const transition::FundamentalPath& path,
                                        double t0, const lin::Vec& x0, double level);

/// Integrates X' = Q(X) from X0; kind SupReduced or Averaged by mode.
[[nodiscard]] bounds::BoundCurve integrate_reduction(const AutonomousReduction& red,
                                                     double X0, double t0, double t1,
                                                     const ode::IntegrateOptions& opts = {});

/// JSON array of {kind, level, mu, t0, Winv_t0 (row-major), validity_radius_checked}.
[[nodiscard]] std::string regions_to_json(const std::vector<RegionEstimate>& regions);

}  // namespace odebound::regions
