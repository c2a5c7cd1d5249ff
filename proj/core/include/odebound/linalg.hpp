#pragma once

#include <cstddef>
#include <vector>

// Dense linear algebra for small square matrices (system dimensions of a
// handful, not hundreds).  Everything is plain row-major storage; no
// expression templates, no allocator games.

namespace odebound::lin {

using Vec = std::vector<double>;

struct Mat {
    int n = 0;
    std::vector<double> a;  // row-major, size n*n

    Mat() = default;
    explicit Mat(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}

    static Mat identity(int n);

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    bool operator==(const Mat&) const = default;
};

[[nodiscard]] Vec matvec(const Mat& m, const Vec& x);
[[nodiscard]] Mat matmul(const Mat& a, const Mat& b);
[[nodiscard]] Mat transpose(const Mat& m);
[[nodiscard]] double dot(const Vec& a, const Vec& b);
[[nodiscard]] double norm2(const Vec& x);
[[nodiscard]] Vec axpy(double alpha, const Vec& x, const Vec& y);  // alpha*x + y

/// Gauss-Jordan inverse with partial pivoting.  Throws NearSingularError when
/// a pivot vanishes relative to the row scale.
[[nodiscard]] Mat inverse(const Mat& m);

/// Full SVD, M = U * diag(sigma) * V^T with sigma sorted descending.
/// Computed by one-sided Jacobi rotations on the columns, which keeps the
/// residual M*v_j - sigma_j*u_j at rounding level by construction.
struct Svd {
    std::vector<double> sigma;
    Mat u;
    Mat v;
};
[[nodiscard]] Svd jacobi_svd(const Mat& m);

/// Leading singular triplet plus the smallest singular value.
/// Invariant: || M v1 - sigma_max u1 || <= 1e-12 * sigma_max.
struct SingularTriplet {
    double sigma_max = 0;
    double sigma_min = 0;
    double sigma_second = 0;  // second largest, used for gap detection
    Vec u1;
    Vec v1;
};
[[nodiscard]] SingularTriplet singular_triplet(const Mat& m);

[[nodiscard]] double cond2(const Mat& m);

}  // namespace odebound::lin
