#pragma once

#include <iosfwd>
#include <vector>

#include "odebound/model.hpp"
#include "odebound/ode.hpp"

// Fundamental-matrix analysis for x' = A(t) x.  Along the computed path we
// track the leading singular triplet of W(t), the instantaneous growth rate
// p(t) = d ln ||W(t)|| / dt and the running condition number
// k(t) = sigma_max / sigma_min, which together drive every scalar bound
// downstream.

namespace odebound::transition {

enum class NormalizationMode {
    Identity,    // W(t0) = I
    SpectralW0,  // W(t0) = real eigenbasis of the frozen mean matrix, scaled
                 // so that sigma_max = 1; flattens the oscillation of p(t)
};

struct FundamentalPath {
    std::vector<double> grid;
    std::vector<lin::Mat> W;
    std::vector<lin::Mat> Winv;
    std::vector<double> sigma_max;
    std::vector<double> sigma_min;
    std::vector<double> sigma_second;  // gap diagnostic for the p(t) formula
    std::vector<lin::Vec> u1;
    std::vector<lin::Vec> v1;
    std::vector<double> p;
    std::vector<double> k;
    NormalizationMode normalization = NormalizationMode::Identity;
    int fd_fallback_count = 0;  // grid points where p used finite differences

    [[nodiscard]] double t0() const { return grid.front(); }
    [[nodiscard]] double t_end() const { return grid.back(); }
    [[nodiscard]] std::size_t size() const { return grid.size(); }
};

/// Real modal matrix of a constant matrix: columns are real eigenvectors, and
/// (Re v, Im v) pairs for complex eigenvalues.  Throws NearSingularError when
/// the eigenbasis is defective.
[[nodiscard]] lin::Mat modal_matrix(const lin::Mat& a);

/// Modal matrix of the frozen mean of A, scaled so that sigma_max = 1.
[[nodiscard]] lin::Mat spectral_initial(const model::MatrixFunction& A);

/// Initial matrix for the requested normalization; always has norm 1.
[[nodiscard]] lin::Mat initial_matrix(const model::MatrixFunction& A,
                                      NormalizationMode mode);

/// Integrates W' = A(t) W from t0 over the horizon and fills in the singular
/// data, p and k series.  Throws NearSingularError when sigma_min falls below
/// 1e-12 * sigma_max anywhere on the grid.
[[nodiscard]] FundamentalPath compute_fundamental(const model::MatrixFunction& A,
                                                  double t0, double horizon,
                                                  NormalizationMode mode,
                                                  const ode::IntegrateOptions& opts = {});

/// Fills path.p and path.k.  p comes from the analytic derivative of the
/// leading singular value, p = u1' A(t) W v1 / sigma_max, falling back to a
/// finite difference of ln sigma_max when the relative singular value gap is
/// below 1e-6 (the analytic formula needs a simple leading value).
void compute_pk(FundamentalPath& path, const model::MatrixFunction& A);

/// Cumulative trapezoid average: out[i] = integral from t0 to t_i / (t_i-t0);
/// the first entry is the series value itself.
[[nodiscard]] std::vector<double> running_average(const std::vector<double>& grid,
                                                  const std::vector<double>& series);

[[nodiscard]] std::vector<double> cumulative_trapezoid(const std::vector<double>& grid,
                                                       const std::vector<double>& series);

/// Max relative error of exp(integral of p) against sigma_max(t)/sigma_max(t0)
/// over the whole grid; an internal consistency check of quadrature + SVD.
[[nodiscard]] double verify_norm_identity(const FundamentalPath& path);

struct ExponentEstimates {
    double mu_max = 0;  // tail-window average of ln sigma_max(t) / (t - t0)
    double N = 1;       // sup of k over the restart anchors
    double lambda = 0;  // -sup over restart anchors and tail of avg growth
};

/// Tail windows cover the last 20% of the horizon.  `restarts` anchor times
/// spread over the first half of the horizon feed the sup defining N and
/// lambda; 1 reproduces the single-anchor estimate at t0.
/// Throws InsufficientHorizonError when the tail window has fewer than two
/// grid points.
[[nodiscard]] ExponentEstimates estimate_exponents(const FundamentalPath& path,
                                                   int restarts = 8);

/// CSV with columns t, sigma_max, sigma_min, p, k, p_running_avg,
/// k_running_avg.
void write_path_csv(const FundamentalPath& path, std::ostream& os);

/// Condition number of the (unscaled) modal matrix of the frozen mean; used
/// as the default ball-radius factor R = factor * X0 when bounding solutions
/// that start with ||W^-1(t0) x0|| = X0.
[[nodiscard]] double default_radius_factor(const model::MatrixFunction& A);

using lin::singular_triplet;

}  // namespace odebound::transition
