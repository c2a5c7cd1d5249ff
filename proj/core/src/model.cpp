#include "odebound/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace odebound::model {

double TrigAffineScalar::operator()(double t) const {
    double v = constant;
    for (const auto& h : harmonics) v += h.amplitude * std::sin(h.omega * t + h.phase);
    return v;
}

double TrigAffineScalar::sup() const {
    double v = constant;
    for (const auto& h : harmonics) v += std::abs(h.amplitude);
    return v;
}

double TrigAffineScalar::abs_bound() const {
    double v = std::abs(constant);
    for (const auto& h : harmonics) v += std::abs(h.amplitude);
    return v;
}

void TrigAffineScalar::check() const {
    for (const auto& h : harmonics)
        if (h.omega < 0.0)
            throw std::invalid_argument("harmonic angular frequency must be >= 0");
}

lin::Mat MatrixFunction::eval(double t) const {
    lin::Mat m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = (*this)(i, j)(t);
    return m;
}

lin::Mat MatrixFunction::frozen_mean() const {
    lin::Mat m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = (*this)(i, j).constant;
    return m;
}

Monomial::Monomial(TrigAffineScalar c, std::vector<int> e)
    : coefficient(std::move(c)), exponents(std::move(e)) {
    for (int k : exponents)
        if (k < 0) throw std::invalid_argument("monomial exponents must be >= 0");
    if (degree() < 1)
        throw std::invalid_argument(
            "monomial degree must be >= 1 so the field vanishes at x = 0");
}

int Monomial::degree() const {
    return std::accumulate(exponents.begin(), exponents.end(), 0);
}

double Monomial::eval(double t, const lin::Vec& x) const {
    double v = coefficient(t);
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        for (int k = 0; k < exponents[i]; ++k) v *= x[i];
    }
    return v;
}

lin::Vec PolynomialField::eval(double t, const lin::Vec& x) const {
    lin::Vec y(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (const auto& mono : components[i]) y[i] += mono.eval(t, x);
    return y;
}

bool PolynomialField::empty() const {
    return std::all_of(components.begin(), components.end(),
                       [](const auto& c) { return c.empty(); });
}

lin::Vec ForcingTerm::eval(double t) const {
    lin::Vec y(components.size(), 0.0);
    for (std::size_t i = 0; i < components.size(); ++i) y[i] = components[i](t);
    return y;
}

bool ForcingTerm::empty() const {
    return std::all_of(components.begin(), components.end(), [](const auto& c) {
        return c.constant == 0.0 && c.harmonics.empty();
    });
}

void SystemSpec::check() const {
    if (n < 1) throw std::invalid_argument("system dimension must be >= 1");
    if (A.n != n) throw std::invalid_argument("A dimension does not match n");
    for (const auto& e : A.entries) e.check();
    if (!f.components.empty()) {
        if (f.n != n || static_cast<int>(f.components.size()) != n)
            throw std::invalid_argument("f component count does not match n");
        for (const auto& comp : f.components)
            for (const auto& mono : comp) {
                mono.coefficient.check();
                if (static_cast<int>(mono.exponents.size()) != n)
                    throw std::invalid_argument("monomial exponent count does not match n");
            }
    }
    if (!F.components.empty()) {
        if (static_cast<int>(F.components.size()) != n)
            throw std::invalid_argument("F component count does not match n");
        for (const auto& c : F.components) c.check();
    }
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    if (omega2_radius && !(*omega2_radius > 0.0))
        throw std::invalid_argument("omega2_radius must be > 0 when given");
}

lin::Vec eval_rhs(const SystemSpec& sys, double t, const lin::Vec& x) {
    lin::Vec y = lin::matvec(sys.A.eval(t), x);
    if (!sys.f.components.empty()) {
        const lin::Vec fx = sys.f.eval(t, x);
        for (int i = 0; i < sys.n; ++i) y[i] += fx[i];
    }
    if (!sys.F.components.empty()) {
        const lin::Vec Ft = sys.F.eval(t);
        for (int i = 0; i < sys.n; ++i) y[i] += Ft[i];
    }
    return y;
}

std::function<lin::Vec(double, const lin::Vec&)> make_rhs(const SystemSpec& sys) {
    return [sys](double t, const lin::Vec& x) { return eval_rhs(sys, t, x); };
}

int LipschitzEnvelope::max_degree() const {
    return terms.empty() ? 0 : terms.back().degree;
}

double LipschitzEnvelope::coefficient_profile(int degree, double t) const {
    for (const auto& term : terms) {
        if (term.degree != degree) continue;
        double c = 0.0;
        for (const auto& coef : term.coefficients) c += std::abs(coef(t));
        return c;
    }
    return 0.0;
}

double LipschitzEnvelope::coefficient_sup(int degree) const {
    for (const auto& term : terms) {
        if (term.degree != degree) continue;
        double c = 0.0;
        for (const auto& coef : term.coefficients) c += coef.abs_bound();
        return c;
    }
    return 0.0;
}

double LipschitzEnvelope::eval(double t, double rho) const {
    double L = 0.0;
    for (const auto& term : terms) {
        double c = 0.0;
        for (const auto& coef : term.coefficients) c += std::abs(coef(t));
        L += c * std::pow(rho, term.degree);
    }
    return L;
}

double LipschitzEnvelope::eval_sup(double rho) const {
    double L = 0.0;
    for (const auto& term : terms)
        L += coefficient_sup(term.degree) * std::pow(rho, term.degree);
    return L;
}

LipschitzEnvelope derive_envelope(const PolynomialField& f) {
    LipschitzEnvelope env;
    for (const auto& comp : f.components) {
        for (const auto& mono : comp) {
            const int d = mono.degree();
            auto it = std::find_if(env.terms.begin(), env.terms.end(),
                                   [d](const auto& t) { return t.degree == d; });
            if (it == env.terms.end()) {
                env.terms.push_back({d, {mono.coefficient}});
            } else {
                it->coefficients.push_back(mono.coefficient);
            }
        }
    }
    std::sort(env.terms.begin(), env.terms.end(),
              [](const auto& a, const auto& b) { return a.degree < b.degree; });
    return env;
}

double lipschitz_profile(const LipschitzEnvelope& env, double t, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("Lipschitz ball radius must be > 0");
    double l = 0.0;
    for (const auto& term : env.terms)
        l += env.coefficient_profile(term.degree, t) * std::pow(R, term.degree - 1);
    return l;
}

double lipschitz_constant(const LipschitzEnvelope& env, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("Lipschitz ball radius must be > 0");
    double l = 0.0;
    for (const auto& term : env.terms)
        l += env.coefficient_sup(term.degree) * std::pow(R, term.degree - 1);
    return l;
}

double forcing_amplitude(const ForcingTerm& F) {
    double s = 0.0;
    for (const auto& c : F.components) {
        const double b = c.abs_bound();
        s += b * b;
    }
    return std::sqrt(s);
}

}  // namespace odebound::model
