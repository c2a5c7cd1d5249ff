#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "odebound/errors.hpp"
#include "odebound/transition.hpp"

#include <cmath>
#include <sstream>
#include <string>

using namespace odebound;
using transition::NormalizationMode;

namespace {

model::MatrixFunction constant_matrix(double a00, double a01, double a10, double a11) {
    model::MatrixFunction A(2);
    A(0, 0) = model::TrigAffineScalar(a00);
    A(0, 1) = model::TrigAffineScalar(a01);
    A(1, 0) = model::TrigAffineScalar(a10);
    A(1, 1) = model::TrigAffineScalar(a11);
    return A;
}

// damped spring matrix, x1' = x2, x2' = -(4 + spring(t)) x1 - 0.2 x2
model::MatrixFunction spring_matrix(bool oscillatory) {
    model::MatrixFunction A(2);
    A(0, 1) = model::TrigAffineScalar(1.0);
    A(1, 0) = oscillatory
                  ? model::TrigAffineScalar(-4.0, {{-0.5, M_PI, 0.0}, {-0.5, 7.0, 0.0}})
                  : model::TrigAffineScalar(-4.0);
    A(1, 1) = model::TrigAffineScalar(-0.2);
    return A;
}

}  // namespace

TEST_CASE("zero generator leaves the fundamental matrix at the start value") {
    const auto A = constant_matrix(0.0, 0.0, 0.0, 0.0);
    const auto path = transition::compute_fundamental(A, 0.0, 5.0,
                                                      NormalizationMode::Identity);
    for (std::size_t i = 0; i < path.size(); ++i) {
        for (std::size_t e = 0; e < path.W[i].a.size(); ++e)
            CHECK(std::abs(path.W[i].a[e] - lin::Mat::identity(2).a[e]) < 1e-14);
        CHECK(path.sigma_max[i] == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(path.p[i]) < 1e-9);
        CHECK(path.k[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
    // equal singular values force the finite-difference branch everywhere
    CHECK(path.fd_fallback_count == static_cast<int>(path.size()));
    CHECK(transition::verify_norm_identity(path) < 1e-12);
}

TEST_CASE("diagonal decay has closed-form singular data") {
    const auto A = constant_matrix(-1.0, 0.0, 0.0, -2.0);
    const auto path = transition::compute_fundamental(A, 0.0, 5.0,
                                                      NormalizationMode::Identity);
    const std::size_t i1 = path.size() / 5;  // t = 1 on the default grid
    CHECK(path.grid[i1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(path.sigma_max[i1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-7));
    CHECK(path.sigma_min[i1] == doctest::Approx(std::exp(-2.0)).epsilon(1e-7));
    CHECK(path.k[i1] == doctest::Approx(2.718281828459045).epsilon(1e-7));
    for (std::size_t i = 0; i < path.size(); ++i)
        CHECK(path.p[i] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(transition::verify_norm_identity(path) < 1e-6);
}

TEST_CASE("uniform contraction keeps the condition number at one") {
    const auto A = constant_matrix(-1.0, 0.0, 0.0, -1.0);
    const auto path = transition::compute_fundamental(A, 0.0, 3.0,
                                                      NormalizationMode::Identity);
    for (std::size_t i = 0; i < path.size(); ++i) {
        CHECK(path.p[i] == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(path.k[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("condition number never drops below one") {
    const auto path = transition::compute_fundamental(spring_matrix(true), 0.0, 50.0,
                                                      NormalizationMode::SpectralW0);
    for (double k : path.k) CHECK(k >= 1.0 - 1e-12);
    for (std::size_t i = 0; i < path.size(); ++i) {
        CHECK(path.sigma_max[i] >= path.sigma_second[i]);
        CHECK(path.sigma_second[i] >= path.sigma_min[i]);
    }
}

TEST_CASE("modal start of the constant spring") {
    const auto A = spring_matrix(false);
    const lin::Mat modal = transition::modal_matrix(A.frozen_mean());
    CHECK(lin::cond2(modal) == doctest::Approx(2.0041716011393955).epsilon(1e-9));
    CHECK(transition::default_radius_factor(A) ==
          doctest::Approx(2.0041716011393955).epsilon(1e-9));

    const lin::Mat w0 = transition::initial_matrix(A, NormalizationMode::SpectralW0);
    CHECK(lin::jacobi_svd(w0).sigma[0] == doctest::Approx(1.0).epsilon(1e-12));

    const lin::Mat wi = transition::initial_matrix(A, NormalizationMode::Identity);
    CHECK(wi == lin::Mat::identity(2));
}

TEST_CASE("spectral start flattens the growth rate of the constant spring") {
    const auto A = spring_matrix(false);
    const auto path = transition::compute_fundamental(A, 0.0, 200.0,
                                                      NormalizationMode::SpectralW0);
    CHECK(path.p[0] == doctest::Approx(-0.1).epsilon(1e-6));
    const auto pavg = transition::running_average(path.grid, path.p);
    CHECK(std::abs(pavg.back() + 0.1) < 0.005);
    CHECK(transition::verify_norm_identity(path) < 1e-4);
}

TEST_CASE("long-horizon averages recover the dominant eigenvalue") {
    // sigma_max shrinks by ~9 decades over this span; the rescaled
    // integration must keep p clean the whole way
    const auto A = spring_matrix(false);
    const auto path = transition::compute_fundamental(A, 0.0, 200.0,
                                                      NormalizationMode::Identity);
    const auto est = transition::estimate_exponents(path);
    CHECK(std::abs(est.mu_max + 0.1) < 0.01);
}

TEST_CASE("single-anchor exponents of a diagonal system") {
    const auto A = constant_matrix(-1.0, 0.0, 0.0, -2.0);
    const auto path = transition::compute_fundamental(A, 0.0, 5.0,
                                                      NormalizationMode::Identity);
    const auto est = transition::estimate_exponents(path, 1);
    CHECK(est.mu_max == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(est.N == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(est.lambda == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("too short a horizon for exponent estimates") {
    ode::IntegrateOptions o;
    o.output_step = 0.9;
    const auto path = transition::compute_fundamental(
        constant_matrix(-1.0, 0.0, 0.0, -2.0), 0.0, 1.0,
        NormalizationMode::Identity, o);
    CHECK_THROWS_AS((void)transition::estimate_exponents(path),
                    InsufficientHorizonError);
}

TEST_CASE("running averages") {
    std::vector<double> grid, ones, sine, ramp;
    const std::size_t m = 20001;
    for (std::size_t i = 0; i < m; ++i) {
        const double t = M_PI * static_cast<double>(i) / (m - 1);
        grid.push_back(t);
        ones.push_back(3.5);
        sine.push_back(std::sin(t));
        ramp.push_back(t);
    }
    const auto a1 = transition::running_average(grid, ones);
    CHECK(a1.front() == doctest::Approx(3.5));
    CHECK(a1.back() == doctest::Approx(3.5).epsilon(1e-12));

    const auto a2 = transition::running_average(grid, sine);
    CHECK(a2.back() == doctest::Approx(0.6366197723675814).epsilon(1e-6));

    const auto a3 = transition::running_average(grid, ramp);
    CHECK(a3.back() == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
}

TEST_CASE("cumulative trapezoid") {
    const std::vector<double> grid{0.0, 1.0, 2.0};
    const std::vector<double> vals{0.0, 1.0, 2.0};
    const auto c = transition::cumulative_trapezoid(grid, vals);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == doctest::Approx(0.5));
    CHECK(c[2] == doctest::Approx(2.0));
}

TEST_CASE("path csv header") {
    const auto path = transition::compute_fundamental(
        constant_matrix(-1.0, 0.0, 0.0, -2.0), 0.0, 1.0,
        NormalizationMode::Identity);
    std::ostringstream os;
    transition::write_path_csv(path, os);
    const std::string text = os.str();
    CHECK(text.substr(0, text.find('\n')) ==
          "t,sigma_max,sigma_min,p,k,p_running_avg,k_running_avg");
}

TEST_CASE("defective frozen mean is rejected") {
    // a Jordan block has no real eigenbasis
    const auto A = constant_matrix(1.0, 1.0, 0.0, 1.0);
    CHECK_THROWS_AS((void)transition::spectral_initial(A), NearSingularError);
}
