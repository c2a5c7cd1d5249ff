#include "odebound/scalar_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "odebound/errors.hpp"

namespace odebound::bounds {

namespace {
constexpr double kCurveCap = 1e6;  // matches the integrator escape default
}

AuxCoefficients make_aux_coefficients(const transition::FundamentalPath& path,
                                      const model::SystemSpec& sys) {
    AuxCoefficients c;
    c.grid = path.grid;
    c.p = path.p;
    c.k = path.k;
    c.envelope = model::derive_envelope(sys.f);
    c.forcing_hat = model::forcing_amplitude(sys.F);
    c.forcing_norm.resize(c.grid.size(), 0.0);
    if (!sys.F.components.empty()) {
        for (std::size_t i = 0; i < c.grid.size(); ++i)
            c.forcing_norm[i] = lin::norm2(sys.F.eval(c.grid[i]));
    }
    return c;
}

void attach_lipschitz(AuxCoefficients& coeffs, double R, bool defaulted) {
    LipschitzData data;
    data.radius = R;
    data.radius_defaulted = defaulted;
    data.l_hat = model::lipschitz_constant(coeffs.envelope, R);
    data.l.resize(coeffs.grid.size());
    for (std::size_t i = 0; i < coeffs.grid.size(); ++i)
        data.l[i] = model::lipschitz_profile(coeffs.envelope, coeffs.grid[i], R);
    coeffs.lipschitz = std::move(data);
}

double interp_series(const std::vector<double>& grid,
                     const std::vector<double>& values, double t) {
    if (t <= grid.front()) return values.front();
    if (t >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    const double w = (t - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

BoundCurve solve_linear(const AuxCoefficients& coeffs, double X0) {
    if (!coeffs.lipschitz)
        throw std::invalid_argument("solve_linear requires an attached Lipschitz profile");
    if (X0 < 0.0) throw std::invalid_argument("X0 must be >= 0");

    const std::size_t m = coeffs.grid.size();
    std::vector<double> rate(m);
    for (std::size_t i = 0; i < m; ++i)
        rate[i] = coeffs.p[i] + coeffs.k[i] * coeffs.lipschitz->l[i];
    const std::vector<double> phi =
        transition::cumulative_trapezoid(coeffs.grid, rate);

    BoundCurve out;
    out.kind = BoundKind::Linear;
    out.X0 = X0;
    out.grid.reserve(m);
    out.values.reserve(m);
    out.grid.push_back(coeffs.grid[0]);
    out.values.push_back(X0);

    // single pass; only exponentials of per-interval increments appear, so
    // neither a decaying nor a growing envelope can overflow the factors
    double hom = X0;
    double inhom = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
        const double dphi = phi[i] - phi[i - 1];
        const double grow = std::exp(dphi);
        const double h = coeffs.grid[i] - coeffs.grid[i - 1];
        const double g_prev = coeffs.k[i - 1] * coeffs.forcing_norm[i - 1];
        const double g_here = coeffs.k[i] * coeffs.forcing_norm[i];
        hom *= grow;
        inhom = grow * inhom + 0.5 * h * (grow * g_prev + g_here);
        const double X = hom + inhom;
        if (!std::isfinite(X) || X > kCurveCap) {
            out.blow_up_time = coeffs.grid[i];
            return out;
        }
        out.grid.push_back(coeffs.grid[i]);
        out.values.push_back(X);
    }
    return out;
}

BoundCurve solve_nonlinear(const AuxCoefficients& coeffs, double X0,
                           const ode::IntegrateOptions& opts) {
    if (X0 < 0.0) throw std::invalid_argument("X0 must be >= 0");

    const std::size_t m = coeffs.grid.size();
    const ode::Rhs rhs = [&coeffs](double t, const lin::Vec& y) {
        const double X = std::max(y[0], 0.0);
        const double p = interp_series(coeffs.grid, coeffs.p, t);
        const double k = interp_series(coeffs.grid, coeffs.k, t);
        const double Fn = interp_series(coeffs.grid, coeffs.forcing_norm, t);
        return lin::Vec{p * y[0] + k * (coeffs.envelope.eval(t, X) + Fn)};
    };
    ode::IntegrateOptions o = opts;
    o.output_step = (coeffs.grid.back() - coeffs.grid.front()) /
                    static_cast<double>(m - 1);
    const double ta = coeffs.grid.front();
    const double tb = coeffs.grid.back();

    const ScalarCurveResult res = integrate_scalar_curve(rhs, ta, tb, X0, o);

    BoundCurve out;
    out.kind = BoundKind::Nonlinear;
    out.X0 = X0;
    out.grid = res.traj.grid;
    out.values.reserve(res.traj.states.size());
    for (const auto& s : res.traj.states) out.values.push_back(std::max(s[0], 0.0));
    if (res.traj.escaped)
        out.blow_up_time = res.traj.escape_time;
    else if (res.asymptote)
        out.blow_up_time = res.asymptote;
    return out;
}

ScalarCurveResult integrate_scalar_curve(const ode::Rhs& rhs, double t0, double t1,
                                         double X0,
                                         const ode::IntegrateOptions& opts) {
    ScalarCurveResult res;
    try {
        res.traj = ode::integrate(rhs, t0, t1, {X0}, opts);
        return res;
    } catch (const NumericalError& first) {
        double tf = t1;
        if (const auto* su = dynamic_cast<const StepUnderflowError*>(&first))
            tf = su->t;
        else if (const auto* dv = dynamic_cast<const DivergenceError*>(&first))
            tf = dv->last_valid_time;
        else
            throw;
        res.asymptote = tf;
    }
    // retreat from the asymptote until the integrator can finish
    for (const double frac : {0.999, 0.99, 0.9}) {
        const double te = t0 + frac * (*res.asymptote - t0);
        if (!((te - t0) * (t1 - t0) > 0.0)) break;
        try {
            res.traj = ode::integrate(rhs, t0, te, {X0}, opts);
            return res;
        } catch (const NumericalError&) {
        }
    }
    res.traj.grid = {t0};
    res.traj.states = {lin::Vec{X0}};
    return res;
}

BoundCurve solve_bernoulli(const std::vector<double>& grid,
                           const std::vector<double>& p,
                           const std::vector<double>& k,
                           const std::vector<double>& c, double alpha, double X0) {
    if (alpha == 1.0)
        throw std::invalid_argument("alpha = 1 is the linear case, not a power law");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (X0 < 0.0) throw std::invalid_argument("X0 must be >= 0");

    BoundCurve out;
    out.kind = BoundKind::Bernoulli;
    out.X0 = X0;

    const std::size_t m = grid.size();
    if (alpha > 1.0 && X0 == 0.0) {
        // the zero solution is the bound: the power term vanishes at 0
        out.grid = grid;
        out.values.assign(m, 0.0);
        return out;
    }

    const double q = 1.0 - alpha;
    const std::vector<double> P = transition::cumulative_trapezoid(grid, p);

    out.grid.reserve(m);
    out.values.reserve(m);
    out.grid.push_back(grid[0]);
    out.values.push_back(X0);

    double u_prev = std::pow(X0, q);
    double t_prev = grid[0];
    for (std::size_t i = 1; i < m; ++i) {
        const double dP = q * (P[i] - P[i - 1]);
        const double grow = std::exp(dP);
        const double h = grid[i] - grid[i - 1];
        const double g_prev = k[i - 1] * c[i - 1];
        const double g_here = k[i] * c[i];
        const double u = grow * u_prev + q * 0.5 * h * (grow * g_prev + g_here);
        if (q < 0.0 && u <= 0.0) {
            // u hit zero: finite-time blow-up, located by linear interpolation
            const double frac = u_prev / (u_prev - u);
            out.blow_up_time = t_prev + frac * h;
            return out;
        }
        const double X = std::pow(u, 1.0 / q);
        if (!std::isfinite(X) || X > kCurveCap) {
            out.blow_up_time = grid[i];
            return out;
        }
        out.grid.push_back(grid[i]);
        out.values.push_back(X);
        u_prev = u;
        t_prev = grid[i];
    }
    return out;
}

BoundCurve solve_bernoulli(double p, double k, double c, double alpha, double X0,
                           double t0, double t1, double step) {
    if (!(step > 0.0) || !(t1 > t0))
        throw std::invalid_argument("need t1 > t0 and step > 0");
    const std::size_t n =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((t1 - t0) / step)));
    std::vector<double> grid(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        grid[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);
    const std::vector<double> ps(n + 1, p), ks(n + 1, k), cs(n + 1, c);
    return solve_bernoulli(grid, ps, ks, cs, alpha, X0);
}

double classical_margin(double N, double l_hat, double lambda) {
    return N * l_hat - lambda;
}

CriteriaReport evaluate_criteria(const AuxCoefficients& coeffs,
                                 const transition::FundamentalPath& path,
                                 double t_star, int restarts,
                                 const ClassicalOverride& override_vals) {
    if (!coeffs.lipschitz)
        throw std::invalid_argument("evaluate_criteria requires an attached Lipschitz profile");

    const std::size_t m = coeffs.grid.size();
    const double t0 = coeffs.grid.front();
    const double T = coeffs.grid.back();
    CriteriaReport rep;
    rep.t_star = t_star;
    rep.f_hat = coeffs.forcing_hat;
    rep.k_hat = *std::max_element(coeffs.k.begin(), coeffs.k.end());
    rep.l_hat = coeffs.lipschitz->l_hat;

    std::vector<double> s(m);
    for (std::size_t i = 0; i < m; ++i)
        s[i] = coeffs.p[i] + coeffs.k[i] * coeffs.lipschitz->l[i];

    const std::size_t star = static_cast<std::size_t>(
        std::lower_bound(coeffs.grid.begin(), coeffs.grid.end(), t_star) -
        coeffs.grid.begin());
    const std::size_t star_i = std::min(star, m - 1);

    // pointwise test with an isolated-equality allowance
    constexpr double kEqTol = 1e-10;
    double max_excess = 0.0;
    std::size_t eq_count = 0;
    for (std::size_t i = star_i; i < m; ++i) {
        max_excess = std::max(max_excess, s[i]);
        if (std::abs(s[i]) <= kEqTol) ++eq_count;
    }
    rep.cor1_max_excess = std::max(0.0, max_excess);
    rep.cor1_equality_fraction =
        static_cast<double>(eq_count) / static_cast<double>(m - star_i);
    rep.cor1_holds = max_excess <= kEqTol && rep.cor1_equality_fraction <= 0.01;

    // uniform margin
    rep.nu = -*std::max_element(s.begin() + static_cast<long>(star_i), s.end());
    rep.cor2_holds = rep.nu > 0.0;
    if (rep.cor2_holds) rep.cor2_ultimate_bound = rep.f_hat * rep.k_hat / rep.nu;

    // averaged margin: growth exponent plus the averaged perturbation gain
    const transition::ExponentEstimates est = estimate_exponents(path, restarts);
    rep.mu_max = est.mu_max;
    std::vector<double> kl(m);
    for (std::size_t i = 0; i < m; ++i) kl[i] = coeffs.k[i] * coeffs.lipschitz->l[i];
    const std::vector<double> kl_int = transition::cumulative_trapezoid(coeffs.grid, kl);
    std::vector<double> kl_avg(m);
    kl_avg[0] = kl[0];
    for (std::size_t i = 1; i < m; ++i) kl_avg[i] = kl_int[i] / (coeffs.grid[i] - t0);
    const double wlen = (T - t0) / 8.0;
    double chi_star = -std::numeric_limits<double>::infinity();
    for (double wa = t0 + 0.5 * (T - t0); wa < T - 1e-12; wa += wlen) {
        const double wb = std::min(wa + wlen, T);
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (coeffs.grid[i] >= wa && coeffs.grid[i] <= wb) {
                acc += kl_avg[i];
                ++cnt;
            }
        }
        if (cnt > 0) chi_star = std::max(chi_star, acc / static_cast<double>(cnt));
    }
    rep.chi_star = chi_star;
    rep.chi = rep.mu_max + rep.chi_star;
    rep.cor3_holds = rep.chi < 0.0;

    // rate split with transient gain
    constexpr double kEps = 1e-3;
    rep.rho = -rep.chi - kEps;
    rep.cor4_holds = rep.rho > 0.0;
    if (rep.cor4_holds) {
        const std::vector<double> phi_s = transition::cumulative_trapezoid(coeffs.grid, s);
        constexpr std::size_t kSub = 64;
        double dhat = 0.0;
        for (std::size_t a = 0; a < kSub; ++a) {
            const std::size_t ia = star_i + a * (m - 1 - star_i) / (kSub - 1);
            for (std::size_t b = a; b < kSub; ++b) {
                const std::size_t ib = star_i + b * (m - 1 - star_i) / (kSub - 1);
                const double theta = phi_s[ib] - phi_s[ia];
                const double val =
                    std::exp(theta + rep.rho * (coeffs.grid[ib] - coeffs.grid[ia]));
                dhat = std::max(dhat, val);
            }
        }
        rep.D_hat = dhat;
        rep.cor4_ultimate_bound = rep.D_hat * rep.f_hat * rep.k_hat / rep.rho;
    }

    // classical tests
    rep.N = override_vals.N.value_or(est.N);
    rep.lambda = override_vals.lambda.value_or(est.lambda);
    rep.classical6_value = classical_margin(rep.N, rep.l_hat, rep.lambda);
    rep.classical6_holds = rep.classical6_value < 0.0;

    const std::vector<double> phi_p = transition::cumulative_trapezoid(coeffs.grid, coeffs.p);
    const double tail_t = t0 + 0.8 * (T - t0);
    const std::size_t tail_i = static_cast<std::size_t>(
        std::lower_bound(coeffs.grid.begin(), coeffs.grid.end(), tail_t) -
        coeffs.grid.begin());
    const std::size_t ti = std::min(tail_i, m - 2);
    const double p_tail_avg =
        (phi_p[m - 1] - phi_p[ti]) / (coeffs.grid[m - 1] - coeffs.grid[ti]);
    rep.classical8_value = p_tail_avg + rep.N * rep.l_hat;
    rep.classical8_holds = rep.classical8_value < 0.0;

    return rep;
}

std::string criteria_to_json(const CriteriaReport& r) {
    nlohmann::json j;
    j["t_star"] = r.t_star;
    j["cor1"] = {{"holds", r.cor1_holds},
                 {"max_excess", r.cor1_max_excess},
                 {"equality_fraction", r.cor1_equality_fraction}};
    j["cor2"] = {{"holds", r.cor2_holds}, {"nu", r.nu}};
    if (r.cor2_ultimate_bound) j["cor2"]["ultimate_bound"] = *r.cor2_ultimate_bound;
    j["cor3"] = {{"holds", r.cor3_holds},
                 {"chi", r.chi},
                 {"mu_max", r.mu_max},
                 {"chi_star", r.chi_star}};
    j["cor4"] = {{"holds", r.cor4_holds}, {"rho", r.rho}, {"D_hat", r.D_hat}};
    if (r.cor4_ultimate_bound) j["cor4"]["ultimate_bound"] = *r.cor4_ultimate_bound;
    j["classical6"] = {{"holds", r.classical6_holds},
                       {"N", r.N},
                       {"l_hat", r.l_hat},
                       {"lambda", r.lambda},
                       {"value", r.classical6_value}};
    j["classical8"] = {{"holds", r.classical8_holds}, {"value", r.classical8_value}};
    j["f_hat"] = r.f_hat;
    j["k_hat"] = r.k_hat;
    return j.dump(2);
}

}  // namespace odebound::bounds
