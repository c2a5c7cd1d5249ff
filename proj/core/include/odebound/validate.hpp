#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "odebound/linalg.hpp"
#include "odebound/model.hpp"
#include "odebound/ode.hpp"
#include "odebound/scalar_bounds.hpp"
#include "odebound/transition.hpp"

namespace odebound::validate {

/// Deterministic across platforms: raw mt19937_64 output mapped to doubles
/// with fixed arithmetic (standard library distributions are not portable).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    [[nodiscard]] std::uint64_t raw() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    [[nodiscard]] double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; generates pairs, caches the second.
    [[nodiscard]] double normal();

  private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

enum class SampleMode { Surface, Volume };

/// Points x0 = W(t0) z with z uniform on the sphere of radius `level`
/// (Surface) or in the ball (Volume); by construction ||W^-1(t0) x0|| = ||z||.
[[nodiscard]] std::vector<lin::Vec> sample_ellipsoid(
    const transition::FundamentalPath& path, double t0, double level, int count,
    SampleMode mode, std::uint64_t seed);

struct Violation {
    int sample = 0;
    double time = 0.0;
    double measured = 0.0;
    double bound = 0.0;
};

struct ViolationReport {
    int samples = 0;
    std::vector<Violation> violations;
    double max_ratio = 0.0;       // max over samples and times of measured/bound
    double decayed_fraction = 0.0;  // ||x(T)|| < 1e-2 ||x0||; zero x0 counts
    std::uint64_t seed = 0;
    double rel_slack = 1e-3;
};

/// Integrates every sample with the full system over the bound's grid and
/// flags points where ||x(t_i)|| > (1 + rel_slack) X(t_i).  A trajectory
/// escaping while the bound is still finite is a violation at the escape
/// time.  Samples are expected to lie inside the ellipsoid at the curve's X0.
[[nodiscard]] ViolationReport check_bound(const model::SystemSpec& sys,
                                          const bounds::BoundCurve& curve,
                                          const std::vector<lin::Vec>& samples,
                                          double rel_slack = 1e-3,
                                          std::uint64_t seed = 0,
                                          const ode::IntegrateOptions& opts = {});

/// Fraction of samples with ||x(T)|| < threshold * ||x0||.  Zero initial
/// states count as decayed; escaped trajectories count as not decayed.
[[nodiscard]] double check_decay(const model::SystemSpec& sys,
                                 const std::vector<lin::Vec>& samples, double T,
                                 double threshold,
                                 const ode::IntegrateOptions& opts = {});

struct BoundaryTrace {
    std::vector<ode::Trajectory> trajectories;  // reverse time
    std::pair<int, int> plane{0, 1};
    /// States from the trailing 25% of each non-escaped trajectory,
    /// projected onto the plane pair.
    std::vector<std::array<double, 2>> tail_cloud;
    /// Max over seeds of the relative loop-radius change between the two
    /// trailing quarters; small drift means the trace settled onto a loop.
    double loop_drift = 0.0;
    bool no_finite_boundary = false;  // every seed escaped
    int escaped_count = 0;
    std::uint64_t seed = 0;
};

/// Seeds on the ellipsoid at 0.9 * level_hint integrated in reverse time
/// with escape radius 1e3 * level_hint; the attracting set of the reversed
/// flow traces the boundary of the forward basin.
[[nodiscard]] BoundaryTrace trace_boundary(const model::SystemSpec& sys,
                                           const transition::FundamentalPath& path,
                                           double level_hint, double t0,
                                           double horizon_reverse, int n_seeds,
                                           std::uint64_t seed,
                                           const ode::IntegrateOptions& opts = {});

/// Convex hull (counter-clockwise, no repeated endpoint) of a 2D cloud.
[[nodiscard]] std::vector<std::array<double, 2>> convex_hull(
    std::vector<std::array<double, 2>> points);

[[nodiscard]] bool inside_convex_hull(const std::vector<std::array<double, 2>>& hull,
                                      const std::array<double, 2>& pt);

/// Fraction of points (projected onto the hull's plane) inside the hull.
[[nodiscard]] double containment_fraction(
    const std::vector<std::array<double, 2>>& hull,
    const std::vector<lin::Vec>& points, std::pair<int, int> plane = {0, 1});

/// Runs fn(i) for i in [0, n) across threads; results must be written to
/// index i of a pre-sized buffer so the outcome is order-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace odebound::validate
