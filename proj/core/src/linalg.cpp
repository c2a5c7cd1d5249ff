#include "odebound/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "odebound/errors.hpp"

namespace odebound::lin {

Mat Mat::identity(int n) {
    Mat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec matvec(const Mat& m, const Vec& x) {
    Vec y(m.n, 0.0);
    for (int i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.n; ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.n);
    for (int i = 0; i < a.n; ++i)
        for (int k = 0; k < a.n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < a.n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Mat transpose(const Mat& m) {
    Mat t(m.n);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) t(j, i) = m(i, j);
    return t;
}

double dot(const Vec& a, const Vec& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

Vec axpy(double alpha, const Vec& x, const Vec& y) {
    Vec r(y);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += alpha * x[i];
    return r;
}

Mat inverse(const Mat& m) {
    const int n = m.n;
    Mat a = m;
    Mat inv = Mat::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > best) {
                best = std::abs(a(r, col));
                piv = r;
            }
        }
        double scale = 0.0;
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(piv, j)));
        if (best <= 1e-14 * std::max(scale, 1e-300))
            throw NearSingularError("matrix inverse: pivot vanished, matrix is numerically singular");
        if (piv != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        }
        const double d = a(col, col);
        for (int j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

Svd jacobi_svd(const Mat& m) {
    const int n = m.n;
    Mat g = m;                      // working columns, ends as U * diag(sigma)
    Mat v = Mat::identity(n);
    const double tol = 1e-15;
    const int max_sweeps = 60;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int i = 0; i < n; ++i) {
                    app += g(i, p) * g(i, p);
                    aqq += g(i, q) * g(i, q);
                    apq += g(i, p) * g(i, q);
                }
                if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < n; ++i) {
                    const double gp = g(i, p), gq = g(i, q);
                    g(i, p) = c * gp - s * gq;
                    g(i, q) = s * gp + c * gq;
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    Svd out;
    out.sigma.resize(n);
    out.u = Mat(n);
    out.v = Mat(n);
    std::vector<double> norms(n);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += g(i, j) * g(i, j);
        norms[j] = std::sqrt(s);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return norms[a] > norms[b]; });
    for (int j = 0; j < n; ++j) {
        const int src = order[j];
        out.sigma[j] = norms[src];
        for (int i = 0; i < n; ++i) out.v(i, j) = v(i, src);
        if (norms[src] > 0.0) {
            for (int i = 0; i < n; ++i) out.u(i, j) = g(i, src) / norms[src];
        } else {
            // zero singular value: complete the left basis by Gram-Schmidt
            // against the columns already placed
            Vec e(n, 0.0);
            for (int attempt = 0; attempt < n; ++attempt) {
                std::fill(e.begin(), e.end(), 0.0);
                e[attempt] = 1.0;
                for (int jj = 0; jj < j; ++jj) {
                    double proj = 0.0;
                    for (int i = 0; i < n; ++i) proj += out.u(i, jj) * e[i];
                    for (int i = 0; i < n; ++i) e[i] -= proj * out.u(i, jj);
                }
                const double en = norm2(e);
                if (en > 0.5) {
                    for (int i = 0; i < n; ++i) out.u(i, j) = e[i] / en;
                    break;
                }
            }
        }
    }
    return out;
}

SingularTriplet singular_triplet(const Mat& m) {
    const Svd s = jacobi_svd(m);
    SingularTriplet t;
    const int n = m.n;
    t.sigma_max = s.sigma.front();
    t.sigma_min = s.sigma.back();
    t.sigma_second = n > 1 ? s.sigma[1] : s.sigma[0];
    t.u1.resize(n);
    t.v1.resize(n);
    for (int i = 0; i < n; ++i) {
        t.u1[i] = s.u(i, 0);
        t.v1[i] = s.v(i, 0);
    }
    return t;
}

double cond2(const Mat& m) {
    const Svd s = jacobi_svd(m);
    if (s.sigma.back() <= 0.0)
        throw NearSingularError("cond2: matrix is singular");
    return s.sigma.front() / s.sigma.back();
}

}  // namespace odebound::lin
