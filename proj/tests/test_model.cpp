#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "odebound/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

using namespace odebound;
using model::Harmonic;
using model::Monomial;
using model::TrigAffineScalar;

namespace {

// damped spring with a cubic velocity term and optional harmonic forcing:
//   x1' = x2,  x2' = -(4 - 0.5 sin(pi t) - 0.5 sin(7 t)) x1 - 0.2 x2 - 0.1 x2^3
model::SystemSpec spring_system(double forcing_amp = 0.0) {
    model::SystemSpec sys;
    sys.n = 2;
    sys.A = model::MatrixFunction(2);
    sys.A(0, 1) = TrigAffineScalar(1.0);
    sys.A(1, 0) = TrigAffineScalar(-4.0, {{-0.5, M_PI, 0.0}, {-0.5, 7.0, 0.0}});
    sys.A(1, 1) = TrigAffineScalar(-0.2);
    sys.f.n = 2;
    sys.f.components.resize(2);
    sys.f.components[1].push_back(Monomial(TrigAffineScalar(-0.1), {0, 3}));
    if (forcing_amp != 0.0)
        sys.F.components = {TrigAffineScalar(0.0),
                            TrigAffineScalar(0.0, {{forcing_amp, 2.0 * M_PI, 0.0}})};
    sys.horizon = 50.0;
    sys.check();
    return sys;
}

}  // namespace

TEST_CASE("trig-affine scalar evaluation and bounds") {
    const TrigAffineScalar c(-4.0, {{-0.5, M_PI, 0.0}, {-0.5, 7.0, 0.0}});
    CHECK(c(0.0) == doctest::Approx(-4.0).epsilon(1e-15));
    CHECK(c(0.5) == doctest::Approx(-4.0 - 0.5 * std::sin(M_PI * 0.5) -
                                    0.5 * std::sin(3.5)));
    CHECK(c.sup() == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(c.abs_bound() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK_FALSE(c.is_constant());
    CHECK(TrigAffineScalar(2.5).is_constant());

    TrigAffineScalar bad(0.0, {{1.0, -2.0, 0.0}});
    CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}

TEST_CASE("matrix function evaluation and frozen mean") {
    const auto sys = spring_system();
    const lin::Mat a0 = sys.A.eval(0.0);
    CHECK(a0(0, 1) == 1.0);
    CHECK(a0(1, 0) == doctest::Approx(-4.0));
    const lin::Mat mean = sys.A.frozen_mean();
    CHECK(mean(1, 0) == doctest::Approx(-4.0));  // harmonics dropped
    CHECK(mean(1, 1) == doctest::Approx(-0.2));
}

TEST_CASE("monomial degree, evaluation, and rejection") {
    const Monomial m(TrigAffineScalar(-0.1), {0, 3});
    CHECK(m.degree() == 3);
    CHECK(m.eval(0.0, {5.0, 2.0}) == doctest::Approx(-0.8));

    CHECK_THROWS_AS(Monomial(TrigAffineScalar(1.0), {0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Monomial(TrigAffineScalar(1.0), {-1, 2}), std::invalid_argument);
}

TEST_CASE("right-hand side assembly") {
    const auto sys = spring_system();
    const lin::Vec r = model::eval_rhs(sys, 0.0, {1.0, 0.0});
    CHECK(r[0] == doctest::Approx(0.0));
    CHECK(r[1] == doctest::Approx(-4.0));

    // the field vanishes at the origin and there is no forcing
    const lin::Vec z = model::eval_rhs(sys, 1.7, {0.0, 0.0});
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);

    const auto rhs = model::make_rhs(sys);
    const lin::Vec a = rhs(0.3, {0.4, -0.7});
    const lin::Vec b = model::eval_rhs(sys, 0.3, {0.4, -0.7});
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
}

TEST_CASE("pure forcing response") {
    model::SystemSpec sys;
    sys.n = 2;
    sys.A = model::MatrixFunction(2);
    sys.F.components = {TrigAffineScalar(0.0),
                        TrigAffineScalar(0.0, {{0.01, 2.0 * M_PI, 0.0}})};
    sys.check();
    const lin::Vec r = model::eval_rhs(sys, 0.25, {0.0, 0.0});
    CHECK(r[0] == doctest::Approx(0.0));
    CHECK(r[1] == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("system consistency checks name the offending member") {
    model::SystemSpec sys;
    sys.n = 2;
    sys.A = model::MatrixFunction(3);
    try {
        sys.check();
        FAIL("expected a dimension error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("A") != std::string::npos);
    }
}

TEST_CASE("norm envelope of a cubic field") {
    const auto sys = spring_system();
    const auto env = model::derive_envelope(sys.f);
    REQUIRE(env.terms.size() == 1);
    CHECK(env.terms[0].degree == 3);
    CHECK(env.eval(0.0, 2.0) == doctest::Approx(0.8).epsilon(1e-14));  // 0.1 * 8
    CHECK(env.eval_sup(1.0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(env.max_degree() == 3);
    CHECK(env.coefficient_sup(3) == doctest::Approx(0.1));
    CHECK(env.coefficient_profile(2, 0.0) == 0.0);
}

TEST_CASE("norm envelope of a mixed-degree field") {
    model::PolynomialField f;
    f.n = 2;
    f.components.resize(2);
    f.components[0].push_back(Monomial(TrigAffineScalar(1.0), {1, 3}));
    f.components[1].push_back(Monomial(TrigAffineScalar(1.0), {2, 0}));
    const auto env = model::derive_envelope(f);
    REQUIRE(env.terms.size() == 2);
    CHECK(env.terms[0].degree == 2);
    CHECK(env.terms[1].degree == 4);
    CHECK(env.eval(0.0, 1.0) == doctest::Approx(2.0));  // rho^4 + rho^2 at 1
    CHECK(env.eval(0.0, 2.0) == doctest::Approx(20.0));
}

TEST_CASE("empty field gives an empty envelope") {
    model::PolynomialField f;
    f.n = 2;
    const auto env = model::derive_envelope(f);
    CHECK(env.empty());
    CHECK(env.eval(0.0, 3.0) == 0.0);
}

TEST_CASE("ball Lipschitz constant from the envelope") {
    const auto cubic = model::derive_envelope(spring_system().f);
    CHECK(model::lipschitz_constant(cubic, 2.0) == doctest::Approx(0.4).epsilon(1e-14));

    model::PolynomialField f;
    f.n = 2;
    f.components.resize(2);
    f.components[0].push_back(Monomial(TrigAffineScalar(1.0), {1, 3}));
    f.components[1].push_back(Monomial(TrigAffineScalar(1.0), {2, 0}));
    const auto env = model::derive_envelope(f);
    CHECK(model::lipschitz_constant(env, 1.0) == doctest::Approx(2.0).epsilon(1e-14));

    CHECK_THROWS_AS((void)model::lipschitz_constant(cubic, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)model::lipschitz_profile(cubic, 0.0, -1.0),
                    std::invalid_argument);
}

TEST_CASE("envelope dominates the field norm") {
    model::PolynomialField f;
    f.n = 2;
    f.components.resize(2);
    f.components[0].push_back(
        Monomial(TrigAffineScalar(1.0, {{0.5, 3.0, 0.0}}), {1, 3}));
    f.components[1].push_back(Monomial(TrigAffineScalar(1.0), {2, 0}));
    const auto env = model::derive_envelope(f);

    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    std::uniform_real_distribution<double> time(0.0, 20.0);
    for (int i = 0; i < 10000; ++i) {
        lin::Vec x{coord(gen), coord(gen)};
        const double rho = lin::norm2(x);
        if (rho > 10.0) continue;
        const double t = time(gen);
        const lin::Vec v = f.eval(t, x);
        CHECK(lin::norm2(v) <= env.eval(t, rho) * (1.0 + 1e-12) + 1e-300);
    }
}

TEST_CASE("ball constant dominates the envelope linearly") {
    const auto env = model::derive_envelope(spring_system().f);
    const double R = 1.5;
    for (double t : {0.0, 0.7, 3.9}) {
        const double l = model::lipschitz_profile(env, t, R);
        for (double rho = 0.05; rho <= R; rho += 0.05)
            CHECK(env.eval(t, rho) <= l * rho * (1.0 + 1e-12));
    }
}

TEST_CASE("linear field reduces to a Lipschitz profile") {
    model::PolynomialField f;
    f.n = 2;
    f.components.resize(2);
    f.components[0].push_back(
        Monomial(TrigAffineScalar(0.0, {{0.1, 1.0, 0.0}}), {1, 0}));
    const auto env = model::derive_envelope(f);
    REQUIRE(env.terms.size() == 1);
    CHECK(env.terms[0].degree == 1);

    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    std::uniform_real_distribution<double> time(0.0, 10.0);
    for (int i = 0; i < 10000; ++i) {
        lin::Vec x{coord(gen), coord(gen)};
        const double t = time(gen);
        const double l = model::lipschitz_profile(env, t, 1.0);  // degree 1: R drops out
        CHECK(lin::norm2(f.eval(t, x)) <= l * lin::norm2(x) * (1.0 + 1e-12) + 1e-300);
    }
}

TEST_CASE("cubic-in-position and cubic-in-velocity fields share an envelope") {
    model::PolynomialField duffing;
    duffing.n = 2;
    duffing.components.resize(2);
    duffing.components[1].push_back(Monomial(TrigAffineScalar(-0.1), {3, 0}));

    model::PolynomialField damping;
    damping.n = 2;
    damping.components.resize(2);
    damping.components[1].push_back(Monomial(TrigAffineScalar(-0.1), {0, 3}));

    CHECK(model::derive_envelope(duffing) == model::derive_envelope(damping));
}

TEST_CASE("forcing amplitude") {
    CHECK(model::forcing_amplitude(spring_system(0.01).F) ==
          doctest::Approx(0.01).epsilon(1e-14));
    CHECK(model::forcing_amplitude({}) == 0.0);

    model::ForcingTerm F;
    F.components = {TrigAffineScalar(0.0, {{0.03, 1.0, 0.0}}),
                    TrigAffineScalar(0.0, {{0.04, 1.0, M_PI / 2.0}})};
    CHECK(model::forcing_amplitude(F) == doctest::Approx(0.05).epsilon(1e-14));

    // the amplitude dominates the pointwise norm
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> time(0.0, 100.0);
    const double amp = model::forcing_amplitude(F);
    for (int i = 0; i < 10000; ++i)
        CHECK(lin::norm2(F.eval(time(gen))) <= amp * (1.0 + 1e-12));
}
