#include "odebound/regions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "odebound/errors.hpp"
#include "odebound/model.hpp"

namespace odebound::regions {

namespace {

std::pair<std::size_t, std::size_t> window_indices(const std::vector<double>& grid,
                                                   std::pair<double, double> window) {
    if (!(window.second > window.first))
        throw std::invalid_argument("window must have positive length");
    if (window.first < grid.front() - 1e-9 || window.second > grid.back() + 1e-9)
        throw std::invalid_argument("window outside the computed horizon");
    const auto lo = std::lower_bound(grid.begin(), grid.end(), window.first - 1e-12);
    const auto hi = std::upper_bound(grid.begin(), grid.end(), window.second + 1e-12);
    const std::size_t a = static_cast<std::size_t>(lo - grid.begin());
    const std::size_t b = static_cast<std::size_t>(hi - grid.begin());
    if (b - a < 2) throw std::invalid_argument("window covers fewer than two grid points");
    return {a, b - 1};
}

double window_average(const std::vector<double>& grid, const std::vector<double>& v,
                      std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t i = a + 1; i <= b; ++i)
        acc += 0.5 * (v[i] + v[i - 1]) * (grid[i] - grid[i - 1]);
    return acc / (grid[b] - grid[a]);
}

double rel_diff(double full, double half) {
    const double scale = std::max({std::abs(full), std::abs(half), 1e-12});
    return std::abs(full - half) / scale;
}

std::size_t index_at(const transition::FundamentalPath& path, double t) {
    const auto it = std::lower_bound(path.grid.begin(), path.grid.end(), t - 1e-12);
    return std::min(static_cast<std::size_t>(it - path.grid.begin()),
                    path.grid.size() - 1);
}

}  // namespace

double AutonomousReduction::q(double X) const {
    double acc = p_hat * X + k_hat * f_hat;
    for (const auto& [deg, c] : coefficients) acc += k_hat * c * std::pow(X, deg);
    return acc;
}

double AutonomousReduction::dq(double X) const {
    double acc = p_hat;
    for (const auto& [deg, c] : coefficients)
        acc += k_hat * c * static_cast<double>(deg) * std::pow(X, deg - 1);
    return acc;
}

AutonomousReduction reduce_sup(const bounds::AuxCoefficients& coeffs,
                               std::pair<double, double> window) {
    const auto [a, b] = window_indices(coeffs.grid, window);
    AutonomousReduction red;
    red.mode = ReductionMode::Sup;
    red.p_hat = *std::max_element(coeffs.p.begin() + static_cast<long>(a),
                                  coeffs.p.begin() + static_cast<long>(b) + 1);
    red.k_hat = *std::max_element(coeffs.k.begin() + static_cast<long>(a),
                                  coeffs.k.begin() + static_cast<long>(b) + 1);
    red.f_hat = coeffs.forcing_hat;
    for (const auto& term : coeffs.envelope.terms)
        red.coefficients.emplace_back(term.degree,
                                      coeffs.envelope.coefficient_sup(term.degree));
    return red;
}

AutonomousReduction reduce_average(const bounds::AuxCoefficients& coeffs,
                                   std::pair<double, double> window) {
    const auto [a, b] = window_indices(coeffs.grid, window);
    const double t_mid = 0.5 * (coeffs.grid[a] + coeffs.grid[b]);
    const std::size_t mid = static_cast<std::size_t>(
        std::lower_bound(coeffs.grid.begin() + static_cast<long>(a),
                         coeffs.grid.begin() + static_cast<long>(b) + 1, t_mid) -
        coeffs.grid.begin());

    AutonomousReduction red;
    red.mode = ReductionMode::Averaged;

    double diag = 0.0;
    const auto averaged = [&](const std::vector<double>& series) {
        const double full = window_average(coeffs.grid, series, a, b);
        const double half = window_average(coeffs.grid, series, mid, b);
        diag = std::max(diag, rel_diff(full, half));
        return full;
    };

    red.p_hat = averaged(coeffs.p);
    red.k_hat = averaged(coeffs.k);
    if (coeffs.forcing_hat > 0.0) red.f_hat = averaged(coeffs.forcing_norm);

    std::vector<double> profile(coeffs.grid.size());
    for (const auto& term : coeffs.envelope.terms) {
        for (std::size_t i = 0; i < coeffs.grid.size(); ++i)
            profile[i] =
                coeffs.envelope.coefficient_profile(term.degree, coeffs.grid[i]);
        red.coefficients.emplace_back(term.degree, averaged(profile));
    }
    red.convergence_diagnostic = diag;
    red.averaging_warning = diag > 0.1;
    return red;
}

namespace {

// 10x the largest balancing point of any coefficient pair; beyond it the
// leading term dominates and Q cannot change sign again
double scan_ceiling_for(const AutonomousReduction& red) {
    std::vector<std::pair<int, double>> terms;  // degree, |coefficient|
    if (red.k_hat * red.f_hat > 0.0) terms.emplace_back(0, red.k_hat * red.f_hat);
    double a1 = red.p_hat;
    for (const auto& [deg, c] : red.coefficients)
        if (deg == 1) a1 += red.k_hat * c;
    if (a1 != 0.0) terms.emplace_back(1, std::abs(a1));
    for (const auto& [deg, c] : red.coefficients)
        if (deg != 1 && red.k_hat * c > 0.0) terms.emplace_back(deg, red.k_hat * c);

    double ceiling = 1.0;
    for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            const auto [di, ai] = terms[i];
            const auto [dj, aj] = terms[j];
            if (di == dj) continue;
            const double balance =
                std::pow(ai / aj, 1.0 / static_cast<double>(dj - di));
            if (std::isfinite(balance)) ceiling = std::max(ceiling, 10.0 * balance);
        }
    return ceiling;
}

double bisect(const AutonomousReduction& red, double lo, double hi, double f_lo) {
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = red.q(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double bisect_dq(const AutonomousReduction& red, double lo, double hi, double f_lo) {
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = red.dq(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

FixedPointSet find_fixed_points(const AutonomousReduction& red) {
    FixedPointSet fps;
    fps.scan_ceiling = scan_ceiling_for(red);
    const double scale = std::max(std::abs(red.p_hat), red.k_hat);

    // sign-change scan, refined until the bracket count repeats twice
    std::vector<std::pair<double, double>> brackets;
    std::size_t prev_count = static_cast<std::size_t>(-1);
    int stable_rounds = 0;
    for (std::size_t n = 256; n <= (1u << 20); n *= 2) {
        brackets.clear();
        double x_prev = fps.scan_ceiling / static_cast<double>(n);
        double f_prev = red.q(x_prev);
        for (std::size_t j = 2; j <= n; ++j) {
            const double x = fps.scan_ceiling * static_cast<double>(j) /
                             static_cast<double>(n);
            const double f = red.q(x);
            if ((f_prev <= 0.0 && f > 0.0) || (f_prev >= 0.0 && f < 0.0) ||
                (f_prev < 0.0 && f >= 0.0) || (f_prev > 0.0 && f <= 0.0))
                brackets.emplace_back(x_prev, x);
            x_prev = x;
            f_prev = f;
        }
        if (brackets.size() == prev_count) {
            if (++stable_rounds >= 2) break;
        } else {
            stable_rounds = 0;
        }
        prev_count = brackets.size();
    }

    for (const auto& [lo, hi] : brackets) {
        const double d = bisect(red, lo, hi, red.q(lo));
        fps.roots.push_back({d, red.dq(d), Stability::SemiStable});
    }

    // tangent roots: critical points of Q where Q itself vanishes
    {
        const std::size_t n = 1u << 14;
        double x_prev = fps.scan_ceiling / static_cast<double>(n);
        double f_prev = red.dq(x_prev);
        for (std::size_t j = 2; j <= n; ++j) {
            const double x = fps.scan_ceiling * static_cast<double>(j) /
                             static_cast<double>(n);
            const double f = red.dq(x);
            if ((f_prev < 0.0 && f >= 0.0) || (f_prev > 0.0 && f <= 0.0)) {
                const double xc = bisect_dq(red, x_prev, x, f_prev);
                if (std::abs(red.q(xc)) <= 1e-10 * scale) {
                    bool dup = false;
                    for (const auto& r : fps.roots)
                        if (std::abs(r.d - xc) <= 1e-9 * std::max(1.0, xc)) dup = true;
                    if (!dup) fps.roots.push_back({xc, red.dq(xc), Stability::SemiStable});
                }
            }
            x_prev = x;
            f_prev = f;
        }
    }

    std::sort(fps.roots.begin(), fps.roots.end(),
              [](const FixedPoint& a, const FixedPoint& b) { return a.d < b.d; });
    for (auto& r : fps.roots) {
        if (std::abs(r.slope) <= 1e-8 * scale)
            r.stability = Stability::SemiStable;
        else
            r.stability = r.slope < 0.0 ? Stability::Stable : Stability::Unstable;
    }

    if (fps.roots.empty())
        fps.monotone_growth = red.q(std::max(fps.scan_ceiling, 1.0)) > 0.0 ||
                              (red.p_hat > 0.0 && red.f_hat > 0.0);
    return fps;
}

std::optional<double> estimate_mu(const bounds::AuxCoefficients& coeffs,
                                  const AutonomousReduction& red, double d,
                                  Stability stability, double epsilon,
                                  std::pair<double, double> window,
                                  const ode::IntegrateOptions& opts) {
    if (red.mode != ReductionMode::Averaged)
        throw std::invalid_argument("margins only apply to the Averaged reduction");
    if (!(d > 0.0)) throw std::invalid_argument("root must be positive");

    const ode::Rhs rhs = [&coeffs](double t, const lin::Vec& y) {
        const double X = std::max(y[0], 0.0);
        const double p = bounds::interp_series(coeffs.grid, coeffs.p, t);
        const double k = bounds::interp_series(coeffs.grid, coeffs.k, t);
        const double Fn = bounds::interp_series(coeffs.grid, coeffs.forcing_norm, t);
        return lin::Vec{p * y[0] + k * (coeffs.envelope.eval(t, X) + Fn)};
    };

    ode::IntegrateOptions o = opts;
    const double span = window.second - window.first;
    o.output_step = std::min(o.output_step, span / 1000.0);
    if (epsilon > 0.0) o.max_step = epsilon;
    o.escape_radius = 2.5 * d;

    const bool forward = stability != Stability::Unstable;
    const double ta = forward ? window.first : window.second;
    const double tb = forward ? window.second : window.first;
    const ode::Trajectory traj = ode::integrate(rhs, ta, tb, {d}, o);
    if (traj.escaped) return std::nullopt;

    double mu = 0.0;
    const std::size_t half = traj.grid.size() / 2;
    for (std::size_t i = 0; i < traj.grid.size(); ++i) {
        const double X = traj.states[i][0];
        if (X < 0.0 || X > 2.0 * d) return std::nullopt;
        if (i >= half) mu = std::max(mu, std::abs(X - d));
    }
    if (mu >= d) return std::nullopt;
    return mu;
}

const char* kind_name(RegionEstimate::Kind k) {
    switch (k) {
        case RegionEstimate::Kind::StabilityBasin: return "StabilityBasin";
        case RegionEstimate::Kind::TrappingRegion: return "TrappingRegion";
        case RegionEstimate::Kind::UltimateBound: return "UltimateBound";
        case RegionEstimate::Kind::Unbounded: return "Unbounded";
    }
    return "Unknown";
}

std::vector<RegionEstimate> classify_regions(const FixedPointSet& fps,
                                             const AutonomousReduction& red,
                                             const transition::FundamentalPath& path,
                                             double t0,
                                             const std::vector<double>& mu_per_root,
                                             double omega2_radius) {
    const std::size_t i0 = index_at(path, t0);
    const auto mu_at = [&](std::size_t i) {
        return i < mu_per_root.size() ? mu_per_root[i] : 0.0;
    };

    std::vector<RegionEstimate> out;
    const auto emit = [&](RegionEstimate::Kind kind, double level, double mu) {
        RegionEstimate e;
        e.kind = kind;
        e.level = level;
        e.mu_margin = mu;
        e.t0 = path.grid[i0];
        e.ellipsoid_map = path.Winv[i0];
        if (std::isfinite(omega2_radius) && std::isfinite(level)) {
            // the ellipsoid at level X* sits inside the ball of radius
            // sigma_max(W(t0)) * X*
            const double limit = omega2_radius / path.sigma_max[i0];
            if (level > limit) {
                e.level = limit;
                e.validity_radius_checked = false;
            }
        }
        out.push_back(e);
    };

    const auto& roots = fps.roots;
    const bool forced = red.f_hat > 0.0;

    if (roots.empty()) {
        if (fps.monotone_growth)
            emit(RegionEstimate::Kind::Unbounded,
                 std::numeric_limits<double>::infinity(), 0.0);
        else
            // Q negative on the whole scanned range: decay everywhere seen
            emit(RegionEstimate::Kind::StabilityBasin, fps.scan_ceiling, 0.0);
        return out;
    }

    if (!forced && roots.size() == 1 && roots[0].stability == Stability::Unstable) {
        emit(RegionEstimate::Kind::StabilityBasin, roots[0].d - mu_at(0), mu_at(0));
        emit(RegionEstimate::Kind::TrappingRegion, roots[0].d, 0.0);
        return out;
    }
    if (!forced && roots.size() == 1 && roots[0].stability == Stability::Stable) {
        emit(RegionEstimate::Kind::TrappingRegion, roots[0].d, 0.0);
        emit(RegionEstimate::Kind::UltimateBound, roots[0].d, 0.0);
        return out;
    }
    if (roots.size() == 1 && roots[0].stability == Stability::SemiStable) {
        emit(RegionEstimate::Kind::TrappingRegion, roots[0].d - mu_at(0), mu_at(0));
        return out;
    }
    if (forced && roots.size() == 2 && roots[0].stability == Stability::Stable &&
        roots[1].stability == Stability::Unstable) {
        emit(RegionEstimate::Kind::TrappingRegion, roots[1].d - mu_at(1), mu_at(1));
        emit(RegionEstimate::Kind::TrappingRegion, roots[0].d - mu_at(0), mu_at(0));
        emit(RegionEstimate::Kind::UltimateBound, roots[0].d + mu_at(0), mu_at(0));
        return out;
    }

    // general alternation: sublevel sets below Unstable roots are invariant,
    // Stable roots attract their neighborhoods
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double mu = mu_at(i);
        switch (roots[i].stability) {
            case Stability::Unstable:
                emit(RegionEstimate::Kind::TrappingRegion, roots[i].d - mu, mu);
                break;
            case Stability::Stable:
                emit(RegionEstimate::Kind::UltimateBound, roots[i].d + mu, mu);
                break;
            case Stability::SemiStable:
                emit(RegionEstimate::Kind::TrappingRegion, roots[i].d - mu, mu);
                break;
        }
    }
    if (!forced && roots.front().stability == Stability::Unstable)
        emit(RegionEstimate::Kind::StabilityBasin, roots.front().d - mu_at(0), mu_at(0));
    return out;
}

bool ellipsoid_membership(const transition::FundamentalPath& path, double t0,
                          const lin::Vec& x0, double level) {
    if (level < 0.0) throw std::invalid_argument("level must be >= 0");
    const std::size_t i0 = index_at(path, t0);
    const lin::Vec z = lin::matvec(path.Winv[i0], x0);
    return lin::norm2(z) <= level + 1e-12 * std::max(1.0, level);
}

bounds::BoundCurve integrate_reduction(const AutonomousReduction& red, double X0,
                                       double t0, double t1,
                                       const ode::IntegrateOptions& opts) {
    if (X0 < 0.0) throw std::invalid_argument("X0 must be >= 0");
    const ode::Rhs rhs = [&red](double, const lin::Vec& y) {
        return lin::Vec{red.q(std::max(y[0], 0.0))};
    };
    const bounds::ScalarCurveResult res =
        bounds::integrate_scalar_curve(rhs, t0, t1, X0, opts);

    bounds::BoundCurve out;
    out.kind = red.mode == ReductionMode::Sup ? bounds::BoundKind::SupReduced
                                              : bounds::BoundKind::Averaged;
    out.X0 = X0;
    out.grid = res.traj.grid;
    out.values.reserve(res.traj.states.size());
    for (const auto& s : res.traj.states) out.values.push_back(std::max(s[0], 0.0));
    if (res.traj.escaped)
        out.blow_up_time = res.traj.escape_time;
    else if (res.asymptote)
        out.blow_up_time = res.asymptote;
    return out;
}

std::string regions_to_json(const std::vector<RegionEstimate>& regions) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : regions) {
        nlohmann::json j;
        j["kind"] = kind_name(r.kind);
        j["level"] = r.level;
        j["mu"] = r.mu_margin;
        j["t0"] = r.t0;
        j["Winv_t0"] = r.ellipsoid_map.a;
        j["validity_radius_checked"] = r.validity_radius_checked;
        arr.push_back(j);
    }
    return arr.dump(2);
}

}  // namespace odebound::regions
