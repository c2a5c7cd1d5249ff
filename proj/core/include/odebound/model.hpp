#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "odebound/linalg.hpp"

// Problem description layer: systems of the form
//
//     x' = A(t) x + f(t, x) + F(t)
//
// with trig-affine matrix entries, a polynomial perturbation field f that
// vanishes at x = 0, and a trig-affine forcing term.  The restriction to this
// class is deliberate: suprema and norm envelopes of every coefficient are
// then available in closed form instead of by sampling.

namespace odebound::model {

struct Harmonic {
    double amplitude = 0.0;
    double omega = 0.0;  // angular frequency, must be >= 0
    double phase = 0.0;

    bool operator==(const Harmonic&) const = default;
};

/// c + sum_i a_i * sin(w_i t + phi_i)
struct TrigAffineScalar {
    double constant = 0.0;
    std::vector<Harmonic> harmonics;

    TrigAffineScalar() = default;
    TrigAffineScalar(double c) : constant(c) {}  // NOLINT: implicit by design
    TrigAffineScalar(double c, std::vector<Harmonic> h)
        : constant(c), harmonics(std::move(h)) {}

    [[nodiscard]] double operator()(double t) const;

    /// Exact upper bound of the signed value: constant + sum |amplitude|.
    [[nodiscard]] double sup() const;

    /// Exact upper bound of the absolute value: |constant| + sum |amplitude|.
    [[nodiscard]] double abs_bound() const;

    [[nodiscard]] bool is_constant() const { return harmonics.empty(); }

    /// Throws std::invalid_argument on a negative angular frequency.
    void check() const;

    bool operator==(const TrigAffineScalar&) const = default;
};

/// Square matrix of trig-affine entries, row-major.
struct MatrixFunction {
    int n = 0;
    std::vector<TrigAffineScalar> entries;

    MatrixFunction() = default;
    explicit MatrixFunction(int n_)
        : n(n_), entries(static_cast<std::size_t>(n_) * n_) {}

    TrigAffineScalar& operator()(int i, int j) {
        return entries[static_cast<std::size_t>(i) * n + j];
    }
    const TrigAffineScalar& operator()(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * n + j];
    }

    [[nodiscard]] lin::Mat eval(double t) const;

    /// Entry-wise constant parts; the harmonics are dropped.
    [[nodiscard]] lin::Mat frozen_mean() const;

    bool operator==(const MatrixFunction&) const = default;
};

/// coefficient(t) * prod_i x_i^{e_i} with total degree >= 1, so that any
/// field assembled from monomials vanishes at x = 0.
struct Monomial {
    TrigAffineScalar coefficient;
    std::vector<int> exponents;

    Monomial(TrigAffineScalar c, std::vector<int> e);

    [[nodiscard]] int degree() const;
    [[nodiscard]] double eval(double t, const lin::Vec& x) const;

    bool operator==(const Monomial&) const = default;
};

struct PolynomialField {
    int n = 0;
    std::vector<std::vector<Monomial>> components;  // one list per component

    [[nodiscard]] lin::Vec eval(double t, const lin::Vec& x) const;
    [[nodiscard]] bool empty() const;
};

struct ForcingTerm {
    std::vector<TrigAffineScalar> components;

    [[nodiscard]] lin::Vec eval(double t) const;
    [[nodiscard]] bool empty() const;
};

struct SystemSpec {
    int n = 0;
    MatrixFunction A;
    PolynomialField f;
    ForcingTerm F;
    double t0 = 0.0;
    double horizon = 50.0;
    /// Radius of the ball on which the norm envelope of f is claimed valid;
    /// absent means the envelope holds globally.
    std::optional<double> omega2_radius;

    /// Dimension consistency and coefficient sanity.  Throws
    /// std::invalid_argument with a description of the offending member.
    void check() const;
};

[[nodiscard]] lin::Vec eval_rhs(const SystemSpec& sys, double t, const lin::Vec& x);
[[nodiscard]] std::function<lin::Vec(double, const lin::Vec&)> make_rhs(const SystemSpec& sys);

/// Norm envelope of a polynomial field:  ||f(t, x)|| <= L(t, ||x||) with
/// L(t, rho) = sum_d c_d(t) rho^d,  c_d(t) = sum over the degree-d monomials
/// of |coefficient(t)|.  Valid globally because |x_m|^e <= ||x||^e for the
/// Euclidean norm and ||f||_2 <= ||f||_1.
struct LipschitzEnvelope {
    struct Term {
        int degree = 0;
        std::vector<TrigAffineScalar> coefficients;
        bool operator==(const Term&) const = default;
    };
    std::vector<Term> terms;  // strictly ascending degree

    [[nodiscard]] bool empty() const { return terms.empty(); }
    [[nodiscard]] int max_degree() const;

    /// c_d(t); zero for degrees without a term.
    [[nodiscard]] double coefficient_profile(int degree, double t) const;

    /// sup_t c_d(t), assembled from the harmonic bounds (exact, not sampled).
    [[nodiscard]] double coefficient_sup(int degree) const;

    [[nodiscard]] double eval(double t, double rho) const;
    [[nodiscard]] double eval_sup(double rho) const;  // sum chat_d rho^d

    bool operator==(const LipschitzEnvelope&) const = default;
};

[[nodiscard]] LipschitzEnvelope derive_envelope(const PolynomialField& f);

/// Classical Lipschitz constant of the envelope on a ball of radius R:
/// l(t) = sum_d c_d(t) R^{d-1}, valid for ||x|| <= R.  Throws
/// std::invalid_argument when R <= 0.
[[nodiscard]] double lipschitz_profile(const LipschitzEnvelope& env, double t, double R);
[[nodiscard]] double lipschitz_constant(const LipschitzEnvelope& env, double R);

/// Euclidean norm of the vector of per-component sup bounds; an upper bound
/// for ||F(t)|| at every t.
[[nodiscard]] double forcing_amplitude(const ForcingTerm& F);

}  // namespace odebound::model
