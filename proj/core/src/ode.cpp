#include "odebound/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "odebound/errors.hpp"

namespace odebound::ode {
namespace {

// Dormand-Prince 5(4) pair.

// Node coefficients
constexpr double c2 = 1.0 / 5.0;
constexpr double c3 = 3.0 / 10.0;
constexpr double c4 = 4.0 / 5.0;
constexpr double c5 = 8.0 / 9.0;

// Runge-Kutta matrix
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;

// Weight coefficients (5th order solution, also the last stage row)
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;

// Error coefficients (difference to the embedded 4th order solution)
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

bool all_finite(const lin::Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Cubic Hermite interpolation on an accepted step; fourth-order accurate,
// which matches the tolerance range the pair is run at.
lin::Vec hermite(double theta, const lin::Vec& ya, const lin::Vec& fa,
                 const lin::Vec& yb, const lin::Vec& fb, double h) {
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + theta;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    lin::Vec y(ya.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = h00 * ya[i] + h * h10 * fa[i] + h01 * yb[i] + h * h11 * fb[i];
    return y;
}

double error_norm(const lin::Vec& err, const lin::Vec& y0, const lin::Vec& y1,
                  double abs_tol, double rel_tol) {
    double s = 0.0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double sc =
            abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = err[i] / sc;
        s += q * q;
    }
    return std::sqrt(s / static_cast<double>(err.size()));
}

double initial_step(const Rhs& rhs, double t0, const lin::Vec& y0,
                    const lin::Vec& f0, double dir, double span,
                    double abs_tol, double rel_tol) {
    const auto scaled_norm = [&](const lin::Vec& v, const lin::Vec& ref) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double sc = abs_tol + rel_tol * std::abs(ref[i]);
            const double q = v[i] / sc;
            s += q * q;
        }
        return std::sqrt(s / static_cast<double>(v.size()));
    };
    const double d0 = scaled_norm(y0, y0);
    const double d1 = scaled_norm(f0, y0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    lin::Vec y1(y0.size());
    for (std::size_t i = 0; i < y1.size(); ++i) y1[i] = y0[i] + dir * h0 * f0[i];
    const lin::Vec f1 = rhs(t0 + dir * h0, y1);
    if (!all_finite(f1)) return std::min(1e-6, span);
    lin::Vec df(f1.size());
    for (std::size_t i = 0; i < df.size(); ++i) df[i] = f1[i] - f0[i];
    const double d2 = scaled_norm(df, y0) / h0;
    double h1;
    if (std::max(d1, d2) <= 1e-15) {
        h1 = std::max(1e-6, h0 * 1e-3);
    } else {
        h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
    }
    return std::min({100.0 * h0, h1, span});
}

}  // namespace

Trajectory integrate(const Rhs& rhs, double t_start, double t_end,
                     const lin::Vec& x0, const IntegrateOptions& opts) {
    if (!(opts.output_step > 0.0))
        throw std::invalid_argument("output_step must be > 0");
    if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0))
        throw std::invalid_argument("tolerances must be > 0");

    Trajectory traj;
    traj.rel_tol_used = opts.rel_tol;
    traj.abs_tol_used = opts.abs_tol;

    const double span = std::abs(t_end - t_start);
    if (span == 0.0) {
        traj.grid = {t_start};
        traj.states = {x0};
        return traj;
    }
    const double dir = t_end > t_start ? 1.0 : -1.0;

    // uniform output grid; the step is nudged to divide the span exactly
    const std::size_t n_out =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     std::llround(span / opts.output_step)));
    const double grid_step = span / static_cast<double>(n_out) * dir;
    std::vector<double> grid(n_out + 1);
    for (std::size_t i = 0; i <= n_out; ++i)
        grid[i] = t_start + static_cast<double>(i) * grid_step;
    grid[n_out] = t_end;

    traj.grid.reserve(grid.size());
    traj.states.reserve(grid.size());
    traj.grid.push_back(grid[0]);
    traj.states.push_back(x0);
    std::size_t next_out = 1;

    if (lin::norm2(x0) > opts.escape_radius) {
        traj.escaped = true;
        traj.escape_time = t_start;
        return traj;
    }

    lin::Vec y = x0;
    double t = t_start;
    lin::Vec f = rhs(t, y);
    if (!all_finite(f))
        throw DivergenceError(t, "derivative is not finite at the initial state");

    const double h_min = 1e-12 * span;
    double h = initial_step(rhs, t, y, f, dir, span, opts.abs_tol, opts.rel_tol);
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);

    const std::size_t n = y.size();
    lin::Vec k2(n), k3(n), k4(n), k5(n), k6(n), ytmp(n), ynew(n), err(n);
    bool last_rejected = false;
    long safety_counter = 0;

    while ((t_end - t) * dir > 0.0) {
        if (++safety_counter > 100'000'000L)
            throw NumericalError("integration exceeded the internal step budget");
        if (h < h_min)
            throw StepUnderflowError(
                t, "step size underflow, the system appears stiff or singular here");
        double hs = h;
        if ((t + dir * hs - t_end) * dir > 0.0) hs = std::abs(t_end - t);
        const double hd = dir * hs;

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hd * a21 * f[i];
        k2 = rhs(t + c2 * hd, ytmp);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + hd * (a31 * f[i] + a32 * k2[i]);
        k3 = rhs(t + c3 * hd, ytmp);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + hd * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(t + c4 * hd, ytmp);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + hd * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(t + c5 * hd, ytmp);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + hd * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] +
                                   a64 * k4[i] + a65 * k5[i]);
        k6 = rhs(t + hd, ytmp);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + hd * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] +
                                   b5 * k5[i] + b6 * k6[i]);
        const lin::Vec k7 = rhs(t + hd, ynew);  // FSAL stage

        bool finite = all_finite(ynew) && all_finite(k7);
        double err_norm_val = 0.0;
        if (finite) {
            for (std::size_t i = 0; i < n; ++i)
                err[i] = hd * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                               e6 * k6[i] + e7 * k7[i]);
            err_norm_val = error_norm(err, y, ynew, opts.abs_tol, opts.rel_tol);
            if (!std::isfinite(err_norm_val)) finite = false;
        }

        if (!finite) {
            h = 0.5 * hs;
            last_rejected = true;
            if (h < h_min)
                throw DivergenceError(t, "state or derivative became non-finite");
            continue;
        }

        if (err_norm_val <= 1.0) {
            const double t_new = t + hd;
            // dense output for every grid point inside this step
            const double eps = 1e-9 * std::abs(hd) + 1e-14 * std::abs(t_new);
            while (next_out < grid.size() &&
                   (grid[next_out] - t_new) * dir <= eps) {
                const double theta = (grid[next_out] - t) / hd;
                traj.grid.push_back(grid[next_out]);
                traj.states.push_back(
                    theta >= 1.0 ? ynew : hermite(theta, y, f, ynew, k7, hd));
                ++next_out;
            }
            y = ynew;
            f = k7;
            t = t_new;
            if (lin::norm2(y) > opts.escape_radius) {
                traj.escaped = true;
                traj.escape_time = t;
                return traj;
            }
            double fac = 0.9 * std::pow(std::max(err_norm_val, 1e-10), -0.2);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
            h = hs * fac;
            if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
            last_rejected = false;
        } else {
            h = hs * std::clamp(0.9 * std::pow(err_norm_val, -0.2), 0.1, 0.9);
            last_rejected = true;
        }
    }
    return traj;
}

MatrixTrajectory integrate_matrix(const MatRhs& rhs, double t_start, double t_end,
                                  const lin::Mat& w0, const IntegrateOptions& opts) {
    const int n = w0.n;
    const Rhs flat = [&rhs, n](double t, const lin::Vec& y) {
        lin::Mat w(n);
        w.a = y;
        const lin::Mat dw = rhs(t, w);
        return dw.a;
    };
    const Trajectory traj = integrate(flat, t_start, t_end, w0.a, opts);
    MatrixTrajectory out;
    out.grid = traj.grid;
    out.escaped = traj.escaped;
    out.escape_time = traj.escape_time;
    out.states.reserve(traj.states.size());
    for (const auto& s : traj.states) {
        lin::Mat w(n);
        w.a = s;
        out.states.push_back(std::move(w));
    }
    return out;
}

}  // namespace odebound::ode
