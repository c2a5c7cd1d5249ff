#include "odebound/validate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "odebound/errors.hpp"

namespace odebound::validate {

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // 1 - u keeps the log argument in (0, 1]
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

std::vector<lin::Vec> sample_ellipsoid(const transition::FundamentalPath& path,
                                       double t0, double level, int count,
                                       SampleMode mode, std::uint64_t seed) {
    if (level < 0.0) throw std::invalid_argument("level must be >= 0");
    if (count < 1) throw std::invalid_argument("count must be >= 1");

    const auto it = std::lower_bound(path.grid.begin(), path.grid.end(), t0 - 1e-12);
    const std::size_t i0 =
        std::min(static_cast<std::size_t>(it - path.grid.begin()), path.grid.size() - 1);
    const lin::Mat& W = path.W[i0];
    const int n = W.n;

    Rng rng(seed);
    std::vector<lin::Vec> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        lin::Vec z(static_cast<std::size_t>(n));
        double nrm = 0.0;
        for (auto& zi : z) {
            zi = rng.normal();
            nrm += zi * zi;
        }
        nrm = std::sqrt(nrm);
        if (nrm < 1e-300) {
            z.assign(static_cast<std::size_t>(n), 0.0);
            z[0] = 1.0;
            nrm = 1.0;
        }
        double radius = level;
        if (mode == SampleMode::Volume)
            radius *= std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
        for (auto& zi : z) zi *= radius / nrm;
        out.push_back(lin::matvec(W, z));
    }
    return out;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(n, std::min<std::size_t>(hw, 16));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

ViolationReport check_bound(const model::SystemSpec& sys,
                            const bounds::BoundCurve& curve,
                            const std::vector<lin::Vec>& samples, double rel_slack,
                            std::uint64_t seed, const ode::IntegrateOptions& opts) {
    if (curve.grid.size() < 2)
        throw std::invalid_argument("bound curve has no usable grid");

    ViolationReport rep;
    rep.samples = static_cast<int>(samples.size());
    rep.seed = seed;
    rep.rel_slack = rel_slack;

    const double t0 = curve.grid.front();
    const double T = curve.grid.back();
    ode::IntegrateOptions o = opts;
    o.output_step = (T - t0) / static_cast<double>(curve.grid.size() - 1);

    const ode::Rhs rhs = model::make_rhs(sys);
    std::vector<std::vector<Violation>> per_sample(samples.size());
    std::vector<double> per_max(samples.size(), 0.0);
    std::vector<char> per_decayed(samples.size(), 0);

    parallel_for(samples.size(), [&](std::size_t s) {
        // step underflow or divergence on a sample is blow-up in disguise;
        // fold it into the escape bookkeeping instead of aborting the sweep
        ode::Trajectory traj;
        try {
            traj = ode::integrate(rhs, t0, T, samples[s], o);
        } catch (const StepUnderflowError& e) {
            traj.escaped = true;
            traj.escape_time = e.t;
        } catch (const DivergenceError& e) {
            traj.escaped = true;
            traj.escape_time = e.last_valid_time;
        }
        double local_max = 0.0;
        for (std::size_t i = 0; i < traj.grid.size(); ++i) {
            const double measured = lin::norm2(traj.states[i]);
            const double bound =
                i < curve.values.size()
                    ? curve.values[i]
                    : bounds::interp_series(curve.grid, curve.values, traj.grid[i]);
            local_max = std::max(local_max, measured / std::max(bound, 1e-300));
            if (measured > (1.0 + rel_slack) * bound)
                per_sample[s].push_back(
                    {static_cast<int>(s), traj.grid[i], measured, bound});
        }
        if (traj.escaped) {
            const double t_esc = traj.escape_time.value_or(T);
            const double bound_at =
                bounds::interp_series(curve.grid, curve.values, t_esc);
            per_sample[s].push_back({static_cast<int>(s), t_esc,
                                     o.escape_radius, bound_at});
            local_max = std::max(local_max, o.escape_radius / std::max(bound_at, 1e-300));
        }
        per_max[s] = local_max;

        const double x0n = lin::norm2(samples[s]);
        if (x0n == 0.0) {
            per_decayed[s] = 1;
        } else if (!traj.escaped && !traj.states.empty()) {
            per_decayed[s] = lin::norm2(traj.states.back()) < 1e-2 * x0n ? 1 : 0;
        }
    });

    int decayed = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        rep.max_ratio = std::max(rep.max_ratio, per_max[s]);
        decayed += per_decayed[s];
        for (const auto& v : per_sample[s]) rep.violations.push_back(v);
    }
    rep.decayed_fraction = samples.empty()
                               ? 0.0
                               : static_cast<double>(decayed) /
                                     static_cast<double>(samples.size());
    return rep;
}

double check_decay(const model::SystemSpec& sys, const std::vector<lin::Vec>& samples,
                   double T, double threshold, const ode::IntegrateOptions& opts) {
    if (samples.empty()) return 0.0;
    const ode::Rhs rhs = model::make_rhs(sys);
    ode::IntegrateOptions o = opts;
    o.output_step = std::min(o.output_step, (T - sys.t0) / 100.0);

    std::vector<char> decayed(samples.size(), 0);
    parallel_for(samples.size(), [&](std::size_t s) {
        const double x0n = lin::norm2(samples[s]);
        if (x0n == 0.0) {
            decayed[s] = 1;
            return;
        }
        try {
            const ode::Trajectory traj =
                ode::integrate(rhs, sys.t0, T, samples[s], o);
            if (!traj.escaped && !traj.states.empty())
                decayed[s] =
                    lin::norm2(traj.states.back()) < threshold * x0n ? 1 : 0;
        } catch (const NumericalError&) {
            // blow-up or breakdown counts as not decayed
        }
    });
    int acc = 0;
    for (const char d : decayed) acc += d;
    return static_cast<double>(acc) / static_cast<double>(samples.size());
}

BoundaryTrace trace_boundary(const model::SystemSpec& sys,
                             const transition::FundamentalPath& path,
                             double level_hint, double t0, double horizon_reverse,
                             int n_seeds, std::uint64_t seed,
                             const ode::IntegrateOptions& opts) {
    if (n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");
    if (!(level_hint > 0.0)) throw std::invalid_argument("level_hint must be > 0");

    BoundaryTrace trace;
    trace.seed = seed;
    const std::vector<lin::Vec> starts =
        sample_ellipsoid(path, t0, 0.9 * level_hint, n_seeds, SampleMode::Surface, seed);

    const ode::Rhs rhs = model::make_rhs(sys);
    ode::IntegrateOptions o = opts;
    o.escape_radius = 1e3 * level_hint;

    trace.trajectories.resize(starts.size());
    parallel_for(starts.size(), [&](std::size_t s) {
        try {
            trace.trajectories[s] =
                ode::integrate(rhs, t0, t0 - horizon_reverse, starts[s], o);
        } catch (const StepUnderflowError& e) {
            trace.trajectories[s].grid = {t0};
            trace.trajectories[s].states = {starts[s]};
            trace.trajectories[s].escaped = true;
            trace.trajectories[s].escape_time = e.t;
        } catch (const DivergenceError& e) {
            trace.trajectories[s].grid = {t0};
            trace.trajectories[s].states = {starts[s]};
            trace.trajectories[s].escaped = true;
            trace.trajectories[s].escape_time = e.last_valid_time;
        }
    });

    double drift = 0.0;
    for (const auto& traj : trace.trajectories) {
        if (traj.escaped) {
            ++trace.escaped_count;
            continue;
        }
        const std::size_t m = traj.grid.size();
        if (m < 8) continue;
        const std::size_t q3 = m / 2, q4 = (3 * m) / 4;

        const int pi = trace.plane.first, pj = trace.plane.second;
        double cx = 0.0, cy = 0.0;
        for (std::size_t i = q3; i < m; ++i) {
            cx += traj.states[i][static_cast<std::size_t>(pi)];
            cy += traj.states[i][static_cast<std::size_t>(pj)];
        }
        cx /= static_cast<double>(m - q3);
        cy /= static_cast<double>(m - q3);

        const auto mean_radius = [&](std::size_t a, std::size_t b) {
            double acc = 0.0;
            for (std::size_t i = a; i < b; ++i) {
                const double dx = traj.states[i][static_cast<std::size_t>(pi)] - cx;
                const double dy = traj.states[i][static_cast<std::size_t>(pj)] - cy;
                acc += std::sqrt(dx * dx + dy * dy);
            }
            return acc / static_cast<double>(b - a);
        };
        const double r3 = mean_radius(q3, q4);
        const double r4 = mean_radius(q4, m);
        drift = std::max(drift, std::abs(r4 - r3) / std::max(r3, 1e-300));

        for (std::size_t i = q4; i < m; ++i)
            trace.tail_cloud.push_back({traj.states[i][static_cast<std::size_t>(pi)],
                                        traj.states[i][static_cast<std::size_t>(pj)]});
    }
    trace.loop_drift = drift;
    trace.no_finite_boundary =
        trace.escaped_count == static_cast<int>(trace.trajectories.size());
    return trace;
}

std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;

    const auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                          const std::array<double, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };

    std::vector<std::array<double, 2>> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

bool inside_convex_hull(const std::vector<std::array<double, 2>>& hull,
                        const std::array<double, 2>& pt) {
    if (hull.size() < 3) return false;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        const double cr = (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0]);
        if (cr < -1e-12) return false;
    }
    return true;
}

double containment_fraction(const std::vector<std::array<double, 2>>& hull,
                            const std::vector<lin::Vec>& points,
                            std::pair<int, int> plane) {
    if (points.empty()) return 0.0;
    int inside = 0;
    for (const auto& p : points) {
        const std::array<double, 2> q{p[static_cast<std::size_t>(plane.first)],
                                      p[static_cast<std::size_t>(plane.second)]};
        if (inside_convex_hull(hull, q)) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(points.size());
}

}  // namespace odebound::validate
