#include "odebound/transition.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "odebound/errors.hpp"

namespace odebound::transition {

lin::Mat modal_matrix(const lin::Mat& a) {
    const int n = a.n;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = a(i, j);

    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw NearSingularError("eigen decomposition of the frozen mean matrix failed");

    lin::Mat modal(n);
    std::vector<bool> used(n, false);
    int col = 0;
    const double scale = m.cwiseAbs().maxCoeff() + 1.0;
    for (int j = 0; j < n && col < n; ++j) {
        if (used[j]) continue;
        const std::complex<double> lam = es.eigenvalues()(j);
        if (std::abs(lam.imag()) <= 1e-12 * scale) {
            for (int i = 0; i < n; ++i) modal(i, col) = es.eigenvectors()(i, j).real();
            ++col;
            used[j] = true;
        } else {
            // complex pair: consume this eigenvalue and its conjugate
            int mate = -1;
            for (int q = j + 1; q < n; ++q) {
                if (used[q]) continue;
                if (std::abs(es.eigenvalues()(q) - std::conj(lam)) <=
                    1e-8 * (std::abs(lam) + scale)) {
                    mate = q;
                    break;
                }
            }
            if (mate < 0)
                throw NearSingularError(
                    "complex eigenvalue without a conjugate mate; matrix is not real-diagonalizable");
            for (int i = 0; i < n; ++i) {
                modal(i, col) = es.eigenvectors()(i, j).real();
                modal(i, col + 1) = es.eigenvectors()(i, j).imag();
            }
            col += 2;
            used[j] = used[mate] = true;
        }
    }
    if (col != n)
        throw NearSingularError("frozen mean matrix lacks a complete real eigenbasis");

    const lin::Svd svd = lin::jacobi_svd(modal);
    if (svd.sigma.back() <= 1e-12 * svd.sigma.front())
        throw NearSingularError("frozen mean matrix eigenbasis is numerically defective");
    return modal;
}

lin::Mat spectral_initial(const model::MatrixFunction& A) {
    lin::Mat m = modal_matrix(A.frozen_mean());
    const double top = lin::jacobi_svd(m).sigma.front();
    for (double& x : m.a) x /= top;
    return m;
}

lin::Mat initial_matrix(const model::MatrixFunction& A, NormalizationMode mode) {
    if (mode == NormalizationMode::Identity) return lin::Mat::identity(A.n);
    return spectral_initial(A);
}

FundamentalPath compute_fundamental(const model::MatrixFunction& A, double t0,
                                    double horizon, NormalizationMode mode,
                                    const ode::IntegrateOptions& opts) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");

    const lin::Mat w0 = initial_matrix(A, mode);
    const ode::MatRhs rhs = [&A](double t, const lin::Mat& w) {
        return lin::matmul(A.eval(t), w);
    };
    ode::IntegrateOptions mopts = opts;
    mopts.escape_radius = std::numeric_limits<double>::infinity();

    // The stepper controls local error against abs_tol + rel_tol*|entry|, so
    // once ||W|| drifts far from O(1) the absolute term swamps the entries and
    // the singular directions turn to noise. W is therefore integrated in
    // short chunks and rescaled to unit Frobenius norm whenever its magnitude
    // leaves [1e-1, 1e1]. p, k, u1, v1 are invariant under W -> cW; the path
    // stores true-scale values reassembled from the accumulated log factor.
    const std::size_t n_out = std::max<std::size_t>(
        1,
        static_cast<std::size_t>(std::llround(horizon / mopts.output_step)));
    const double grid_step = horizon / static_cast<double>(n_out);
    mopts.output_step = grid_step;
    const std::size_t chunk = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(0.25 / grid_step)));

    FundamentalPath path;
    path.normalization = mode;
    path.grid.resize(n_out + 1);
    for (std::size_t i = 0; i <= n_out; ++i)
        path.grid[i] = t0 + static_cast<double>(i) * grid_step;
    path.grid[n_out] = t0 + horizon;

    std::vector<lin::Mat> scaled(n_out + 1, lin::Mat(A.n));
    std::vector<double> logscale(n_out + 1, 0.0);
    scaled[0] = w0;
    lin::Mat cur = w0;
    double lcur = 0.0;
    for (std::size_t ia = 0; ia < n_out;) {
        const std::size_t ib = std::min(ia + chunk, n_out);
        // slowly varying systems would otherwise cross the whole chunk in one
        // accepted step and leave only interpolated states on the grid
        const double cap = (path.grid[ib] - path.grid[ia]) / 5.0;
        mopts.max_step = opts.max_step > 0.0 ? std::min(opts.max_step, cap) : cap;
        const ode::MatrixTrajectory mt =
            ode::integrate_matrix(rhs, path.grid[ia], path.grid[ib], cur, mopts);
        if (mt.states.size() != ib - ia + 1)
            throw NumericalError(
                "fundamental path chunk produced a misaligned output grid");
        for (std::size_t j = 1; j < mt.states.size(); ++j) {
            scaled[ia + j] = mt.states[j];
            logscale[ia + j] = lcur;
        }
        cur = mt.states.back();
        double fro = 0.0;
        for (double x : cur.a) fro += x * x;
        fro = std::sqrt(fro);
        if (!(fro > 0.0))
            throw NearSingularError(
                "fundamental matrix collapsed to zero norm at t = " +
                std::to_string(path.grid[ib]));
        if (fro < 1e-1 || fro > 1e1) {
            for (double& x : cur.a) x /= fro;
            lcur += std::log(fro);
        }
        ia = ib;
    }

    const std::size_t m = path.grid.size();
    path.W.resize(m);
    path.Winv.resize(m);
    path.sigma_max.resize(m);
    path.sigma_min.resize(m);
    path.sigma_second.resize(m);
    path.u1.resize(m);
    path.v1.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const lin::SingularTriplet tr = lin::singular_triplet(scaled[i]);
        if (tr.sigma_min < 1e-12 * tr.sigma_max)
            throw NearSingularError(
                "fundamental matrix is numerically singular at t = " +
                std::to_string(path.grid[i]));
        const double s = std::exp(logscale[i]);
        path.sigma_max[i] = tr.sigma_max * s;
        path.sigma_min[i] = tr.sigma_min * s;
        path.sigma_second[i] = tr.sigma_second * s;
        path.u1[i] = tr.u1;
        path.v1[i] = tr.v1;
        lin::Mat w = scaled[i];
        for (double& x : w.a) x *= s;
        path.W[i] = std::move(w);
        lin::Mat winv = lin::inverse(scaled[i]);
        for (double& x : winv.a) x /= s;
        path.Winv[i] = std::move(winv);
    }
    compute_pk(path, A);
    return path;
}

void compute_pk(FundamentalPath& path, const model::MatrixFunction& A) {
    const std::size_t m = path.grid.size();
    path.p.assign(m, 0.0);
    path.k.assign(m, 1.0);
    path.fd_fallback_count = 0;
    for (std::size_t i = 0; i < m; ++i) {
        path.k[i] = path.sigma_max[i] / path.sigma_min[i];
        const double gap =
            (path.sigma_max[i] - path.sigma_second[i]) / path.sigma_max[i];
        if (gap >= 1e-6) {
            const lin::Vec aw =
                lin::matvec(A.eval(path.grid[i]), lin::matvec(path.W[i], path.v1[i]));
            path.p[i] = lin::dot(path.u1[i], aw) / path.sigma_max[i];
        } else {
            // coalescing singular values: differentiate ln sigma_max instead
            ++path.fd_fallback_count;
            const auto lg = [&](std::size_t j) { return std::log(path.sigma_max[j]); };
            if (i == 0) {
                path.p[i] = (lg(1) - lg(0)) / (path.grid[1] - path.grid[0]);
            } else if (i + 1 == m) {
                path.p[i] = (lg(m - 1) - lg(m - 2)) /
                            (path.grid[m - 1] - path.grid[m - 2]);
            } else {
                path.p[i] =
                    (lg(i + 1) - lg(i - 1)) / (path.grid[i + 1] - path.grid[i - 1]);
            }
        }
    }
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& grid,
                                         const std::vector<double>& series) {
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        out[i] = out[i - 1] +
                 0.5 * (series[i] + series[i - 1]) * (grid[i] - grid[i - 1]);
    return out;
}

std::vector<double> running_average(const std::vector<double>& grid,
                                    const std::vector<double>& series) {
    std::vector<double> out(grid.size());
    const std::vector<double> acc = cumulative_trapezoid(grid, series);
    out[0] = series[0];
    for (std::size_t i = 1; i < grid.size(); ++i)
        out[i] = acc[i] / (grid[i] - grid[0]);
    return out;
}

double verify_norm_identity(const FundamentalPath& path) {
    const std::vector<double> phi = cumulative_trapezoid(path.grid, path.p);
    double worst = 0.0;
    for (std::size_t i = 0; i < path.grid.size(); ++i) {
        const double ratio = path.sigma_max[i] / path.sigma_max[0];
        worst = std::max(worst, std::abs(std::exp(phi[i]) - ratio) / ratio);
    }
    return worst;
}

ExponentEstimates estimate_exponents(const FundamentalPath& path, int restarts) {
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    const std::size_t m = path.grid.size();
    const double t0 = path.t0();
    const double span = path.t_end() - t0;

    const auto tail_begin_index = [&](double anchor_t) {
        const double tb = anchor_t + 0.8 * (path.t_end() - anchor_t);
        return static_cast<std::size_t>(
            std::lower_bound(path.grid.begin(), path.grid.end(), tb) -
            path.grid.begin());
    };

    const std::size_t tail0 = tail_begin_index(t0);
    if (m - tail0 < 2)
        throw InsufficientHorizonError(
            "horizon too short: the tail window holds fewer than two grid points");

    ExponentEstimates est;
    double acc = 0.0;
    for (std::size_t i = tail0; i < m; ++i)
        acc += std::log(path.sigma_max[i] / path.sigma_max[0]) / (path.grid[i] - t0);
    est.mu_max = acc / static_cast<double>(m - tail0);

    const std::vector<double> phi = cumulative_trapezoid(path.grid, path.p);
    double sup_avg = -std::numeric_limits<double>::infinity();
    double sup_k = 0.0;
    for (int j = 0; j < restarts; ++j) {
        const double anchor_t =
            t0 + (restarts == 1 ? 0.0
                                : 0.5 * span * static_cast<double>(j) /
                                      static_cast<double>(restarts));
        const std::size_t ai = static_cast<std::size_t>(
            std::lower_bound(path.grid.begin(), path.grid.end(), anchor_t) -
            path.grid.begin());
        sup_k = std::max(sup_k, path.k[std::min(ai, m - 1)]);
        const std::size_t tb = tail_begin_index(path.grid[std::min(ai, m - 1)]);
        for (std::size_t i = std::max(tb, ai + 1); i < m; ++i) {
            const double avg =
                (phi[i] - phi[ai]) / (path.grid[i] - path.grid[ai]);
            sup_avg = std::max(sup_avg, avg);
        }
    }
    est.N = sup_k;
    est.lambda = -sup_avg;
    return est;
}

void write_path_csv(const FundamentalPath& path, std::ostream& os) {
    const std::vector<double> pavg = running_average(path.grid, path.p);
    const std::vector<double> kavg = running_average(path.grid, path.k);
    os << "t,sigma_max,sigma_min,p,k,p_running_avg,k_running_avg\n";
    char buf[64];
    const auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
        os << buf;
    };
    for (std::size_t i = 0; i < path.grid.size(); ++i) {
        put(path.grid[i], ',');
        put(path.sigma_max[i], ',');
        put(path.sigma_min[i], ',');
        put(path.p[i], ',');
        put(path.k[i], ',');
        put(pavg[i], ',');
        put(kavg[i], '\n');
    }
}

double default_radius_factor(const model::MatrixFunction& A) {
    return lin::cond2(modal_matrix(A.frozen_mean()));
}

}  // namespace odebound::transition
