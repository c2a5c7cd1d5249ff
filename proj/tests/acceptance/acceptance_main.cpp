// End-to-end acceptance checks.  Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any of them fail.  Tolerances are pinned
// here on purpose: loosening them is a deliberate decision, not a tweak.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "odebound/model.hpp"
#include "odebound/pipeline.hpp"
#include "odebound/presets.hpp"
#include "odebound/regions.hpp"
#include "odebound/scalar_bounds.hpp"
#include "odebound/transition.hpp"
#include "odebound/validate.hpp"

using namespace odebound;

namespace {

const std::vector<std::string> kPresets{"fig1",   "fig2_1", "fig2_2", "fig4_1",
                                        "fig4_2", "fig4_3", "fig5",   "fig6"};

std::map<std::string, pipeline::PreparedRun>& run_cache() {
    static std::map<std::string, pipeline::PreparedRun> cache;
    return cache;
}

const pipeline::PreparedRun& prep(const std::string& name) {
    auto& cache = run_cache();
    auto it = cache.find(name);
    if (it == cache.end())
        it = cache.emplace(name, pipeline::prepare(presets::make_preset(name))).first;
    return it->second;
}

ode::IntegrateOptions run_opts(const pipeline::PreparedRun& run) {
    ode::IntegrateOptions o;
    o.rel_tol = run.cfg.tolerances.rel;
    o.abs_tol = run.cfg.tolerances.abs;
    o.output_step = run.cfg.tolerances.output_step;
    return o;
}

model::MatrixFunction spring_matrix(bool oscillatory) {
    model::MatrixFunction A(2);
    A(0, 1) = model::TrigAffineScalar(1.0);
    A(1, 0) = oscillatory
                  ? model::TrigAffineScalar(-4.0, {{-0.5, M_PI, 0.0}, {-0.5, 7.0, 0.0}})
                  : model::TrigAffineScalar(-4.0);
    A(1, 1) = model::TrigAffineScalar(-0.2);
    return A;
}

struct Failure {
    std::string detail;
};

void require(bool ok, const std::string& detail) {
    if (!ok) throw Failure{detail};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// --- criteria ---------------------------------------------------------------

void criterion_growth_rate_average() {
    using transition::NormalizationMode;
    const auto t_begin = std::chrono::steady_clock::now();
    for (const bool oscillatory : {false, true}) {
        const double tol = oscillatory ? 0.02 : 0.005;
        for (const auto mode :
             {NormalizationMode::Identity, NormalizationMode::SpectralW0}) {
            const auto path = transition::compute_fundamental(
                spring_matrix(oscillatory), 0.0, 200.0, mode);
            const auto avg = transition::running_average(path.grid, path.p);
            require(std::abs(avg.back() + 0.1) < tol,
                    std::string(oscillatory ? "oscillating" : "constant") +
                        " spring: tail average " + fmt(avg.back()) +
                        " missed -0.1 by more than " + fmt(tol));
        }
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t_begin)
                            .count();
    require(secs < 30.0, "took " + fmt(secs) + " s, budget 30 s");
}

void criterion_norm_identity() {
    for (const auto& name : kPresets) {
        const double err = transition::verify_norm_identity(prep(name).path);
        require(err < 1e-4,
                name + ": norm identity error " + fmt(err) + " >= 1e-4");
    }
}

void criterion_no_violations() {
    for (const std::string name : {"fig2_1", "fig2_2"}) {
        const auto t_begin = std::chrono::steady_clock::now();
        const auto& run = prep(name);
        const auto opts = run_opts(run);
        const auto curve = bounds::solve_nonlinear(run.coeffs, run.X0, opts);
        const auto samples = validate::sample_ellipsoid(
            run.path, run.path.t0(), run.X0, 100, validate::SampleMode::Surface,
            run.cfg.validation.seed);
        const auto rep =
            validate::check_bound(run.cfg.system, curve, samples, 1e-3,
                                  run.cfg.validation.seed, opts);
        require(rep.violations.empty(),
                name + ": " + std::to_string(rep.violations.size()) +
                    " violations, max ratio " + fmt(rep.max_ratio));
        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t_begin)
                                .count();
        require(secs < 120.0, name + " took " + fmt(secs) + " s, budget 120 s");
    }
}

void criterion_dominance_order() {
    for (const auto& name : kPresets) {
        const auto& run = prep(name);
        const auto opts = run_opts(run);

        const auto red = regions::reduce_sup(run.coeffs, run.window);
        const auto sup_curve = regions::integrate_reduction(
            red, run.X0, run.path.t0(), run.path.t_end(), opts);
        const auto nl_curve = bounds::solve_nonlinear(run.coeffs, run.X0, opts);

        // blown-up curves end early, so compare on the common time range
        const double t_shared = std::min(sup_curve.grid.back(), nl_curve.grid.back());
        require(t_shared > run.path.t0(), name + ": no overlapping domain");
        std::size_t compared = 0;
        for (std::size_t i = 0;
             i < nl_curve.grid.size() && nl_curve.grid[i] <= t_shared; ++i) {
            const double sup_v = bounds::interp_series(sup_curve.grid,
                                                       sup_curve.values,
                                                       nl_curve.grid[i]);
            const double nl_v = nl_curve.values[i];
            require(nl_v <= sup_v + 1e-9 * std::max(1.0, std::abs(sup_v)),
                    name + ": reduced curve dips below the full one at t = " +
                        fmt(nl_curve.grid[i]) + " (" + fmt(sup_v) + " < " +
                        fmt(nl_v) + ")");
            ++compared;
        }
        require(compared >= 2, name + ": no overlapping domain");

        // the verifying trajectory is integrated well below the certificate's
        // tolerance, otherwise its own accumulated error floor (~4000 steps at
        // abs_tol) drowns the deeply decayed tail it is checking
        ode::IntegrateOptions measure = opts;
        measure.rel_tol = 1e-10;
        measure.abs_tol = 1e-14;
        const auto traj = ode::integrate(model::make_rhs(run.cfg.system),
                                         run.path.t0(), run.path.t_end(),
                                         run.x0, measure);
        // the scalar bound still carries the certificate's own noise once it
        // has decayed to the order of abs_tol; below that the inequality is
        // not checkable
        const double floor = 10.0 * opts.abs_tol;
        for (std::size_t i = 0;
             i < traj.grid.size() && traj.grid[i] <= nl_curve.grid.back(); ++i) {
            const double measured = lin::norm2(traj.states[i]);
            const double nl_v = bounds::interp_series(nl_curve.grid,
                                                      nl_curve.values,
                                                      traj.grid[i]);
            require(measured <= nl_v * (1.0 + 1e-3) + floor,
                    name + ": measured norm " + fmt(measured) +
                        " above the bound " + fmt(nl_v) + " at t = " +
                        fmt(traj.grid[i]));
        }
    }
}

void criterion_power_law_closed_form() {
    bounds::AuxCoefficients coeffs;
    for (int i = 0; i <= 1000; ++i) {
        coeffs.grid.push_back(0.01 * i);
        coeffs.p.push_back(-0.1);
        coeffs.k.push_back(1.0);
        coeffs.forcing_norm.push_back(0.0);
    }
    model::LipschitzEnvelope::Term term;
    term.degree = 3;
    term.coefficients = {model::TrigAffineScalar(0.05)};
    coeffs.envelope.terms.push_back(term);

    for (const double x0 : {0.5, 1.0, 1.3}) {
        const auto closed =
            bounds::solve_bernoulli(-0.1, 1.0, 0.05, 3.0, x0, 0.0, 10.0, 1e-4);
        const auto general = bounds::solve_nonlinear(coeffs, x0);
        double worst = 0.0;
        for (std::size_t i = 0; i < general.grid.size(); ++i) {
            const double ref = bounds::interp_series(closed.grid, closed.values,
                                                     general.grid[i]);
            worst = std::max(worst, std::abs(general.values[i] - ref));
        }
        require(worst < 1e-5, "start " + fmt(x0) + ": max deviation " +
                                  fmt(worst) + " >= 1e-5");
    }

    const double t_star = 5.0 * std::log(2.0);
    const auto closed_blow =
        bounds::solve_bernoulli(-0.1, 1.0, 0.05, 3.0, 2.0, 0.0, 10.0, 1e-4);
    require(closed_blow.blow_up_time.has_value(),
            "closed form missed the blow-up");
    require(std::abs(*closed_blow.blow_up_time - t_star) < 1e-2,
            "closed-form blow-up at " + fmt(*closed_blow.blow_up_time) +
                ", expected " + fmt(t_star));
    const auto general_blow = bounds::solve_nonlinear(coeffs, 2.0);
    require(general_blow.blow_up_time.has_value(),
            "general solver missed the blow-up");
    require(std::abs(*general_blow.blow_up_time - t_star) < 1e-2,
            "general blow-up at " + fmt(*general_blow.blow_up_time) +
                ", expected " + fmt(t_star));
}

void criterion_fixed_point_thresholds() {
    regions::AutonomousReduction red;
    red.p_hat = -0.1;
    red.k_hat = 1.0;
    red.coefficients = {{3, 0.05}};

    const auto unforced = regions::find_fixed_points(red);
    require(unforced.roots.size() == 1,
            "unforced: expected one root, got " +
                std::to_string(unforced.roots.size()));
    require(std::abs(unforced.roots[0].d - std::sqrt(2.0)) < 1e-10,
            "unforced root " + fmt(unforced.roots[0].d) + " missed sqrt(2)");
    require(unforced.roots[0].stability == regions::Stability::Unstable,
            "unforced root not flagged unstable");

    red.f_hat = 0.01;
    const auto forced = regions::find_fixed_points(red);
    require(forced.roots.size() == 2,
            "forced: expected two roots, got " +
                std::to_string(forced.roots.size()));
    require(std::abs(forced.roots[0].d - 0.100507653525) < 1e-8,
            "inner root " + fmt(forced.roots[0].d) + " off the closed form");
    require(forced.roots[0].stability == regions::Stability::Stable,
            "inner root not flagged stable");
    require(std::abs(forced.roots[1].d - 1.361278552847) < 1e-8,
            "outer root " + fmt(forced.roots[1].d) + " off the closed form");
    require(forced.roots[1].stability == regions::Stability::Unstable,
            "outer root not flagged unstable");
}

void criterion_nested_levels() {
    const auto& run = prep("fig2_1");
    const auto opts = run_opts(run);
    std::vector<bounds::BoundCurve> curves;
    for (int i = 1; i <= 8; ++i)
        curves.push_back(bounds::solve_nonlinear(run.coeffs, 0.05 * i, opts));
    for (std::size_t c = 1; c < curves.size(); ++c) {
        const auto& lo = curves[c - 1];
        const auto& hi = curves[c];
        const std::size_t m = std::min(lo.grid.size(), hi.grid.size());
        for (std::size_t i = 0; i < m; ++i)
            require(hi.values[i] >= lo.values[i] - 1e-9,
                    "curves from starts " + fmt(lo.X0) + " and " + fmt(hi.X0) +
                        " cross at t = " + fmt(hi.grid[i]));
    }
}

void criterion_shared_envelope() {
    const auto& duffing = prep("fig6");
    const auto& velocity = prep("fig2_1");
    require(duffing.coeffs.envelope == velocity.coeffs.envelope,
            "envelopes of the two cubic springs differ");
    require(!duffing.coeffs.envelope.empty(), "shared envelope is empty");
}

void criterion_certified_basin() {
    const auto t_begin = std::chrono::steady_clock::now();
    const auto& run = prep("fig4_1");
    const auto red = regions::reduce_sup(run.coeffs, run.window);
    const auto fps = regions::find_fixed_points(red);
    const auto regs = regions::classify_regions(
        fps, red, run.path, run.path.t0(),
        std::vector<double>(fps.roots.size(), 0.0));

    double basin = 0.0;
    for (const auto& r : regs)
        if (r.kind == regions::RegionEstimate::Kind::StabilityBasin)
            basin = r.level;
    require(basin > 0.0, "no stability basin was certified");

    const auto samples = validate::sample_ellipsoid(
        run.path, run.path.t0(), 0.95 * basin, 100, validate::SampleMode::Volume,
        run.cfg.validation.seed);
    const double frac = validate::check_decay(run.cfg.system, samples, 200.0,
                                              1e-2, run_opts(run));
    require(frac >= 0.99, "only " + fmt(100.0 * frac) +
                              "% of basin samples decayed to 1% by t = 200");

    const auto trace = validate::trace_boundary(
        run.cfg.system, run.path, basin, run.path.t0(), 50.0, 16,
        run.cfg.validation.seed, run_opts(run));
    require(!trace.no_finite_boundary, "reverse tracing found no boundary");
    require(trace.loop_drift < 0.05,
            "boundary loop still drifting: " + fmt(trace.loop_drift));

    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t_begin)
                            .count();
    require(secs < 300.0, "took " + fmt(secs) + " s, budget 300 s");
}

void criterion_margin_beats_classical() {
    model::SystemSpec sys;
    sys.n = 1;
    sys.A = model::MatrixFunction(1);
    sys.A(0, 0) = model::TrigAffineScalar(-0.15);
    sys.f.n = 1;
    sys.f.components.resize(1);
    sys.f.components[0].push_back(
        model::Monomial(model::TrigAffineScalar(0.1), {1}));
    sys.horizon = 20.0;
    sys.check();

    const auto path = transition::compute_fundamental(
        sys.A, 0.0, sys.horizon, transition::NormalizationMode::Identity);
    auto coeffs = bounds::make_aux_coefficients(path, sys);
    bounds::attach_lipschitz(coeffs, 1.0);

    bounds::ClassicalOverride ov;
    ov.N = 2.0;
    ov.lambda = 0.15;
    const auto rep = bounds::evaluate_criteria(coeffs, path, 2.0, 8, ov);

    require(std::abs(rep.classical6_value - 0.05) < 1e-6,
            "aggregate margin " + fmt(rep.classical6_value) + ", expected 0.05");
    require(!rep.classical6_holds && !rep.classical8_holds,
            "aggregate tests unexpectedly passed");
    require(std::abs(rep.nu - 0.05) < 1e-6,
            "pointwise margin " + fmt(rep.nu) + ", expected 0.05");
    require(rep.cor1_holds && rep.cor2_holds,
            "pointwise criteria failed to certify decay");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* label;
        std::function<void()> body;
    };
    const std::vector<Criterion> criteria{
        {1, "running average of the growth rate settles at the dominant decay rate",
         criterion_growth_rate_average},
        {2, "exp(integral of p) matches the singular value ratio on every preset",
         criterion_norm_identity},
        {3, "no ellipsoid sample breaks the nonlinear bound on the spring presets",
         criterion_no_violations},
        {4, "reduced, nonlinear and measured curves keep their dominance order",
         criterion_dominance_order},
        {5, "general scalar solver reproduces the closed-form power-law curves",
         criterion_power_law_closed_form},
        {6, "fixed points of the reduced equation land on the closed-form thresholds",
         criterion_fixed_point_thresholds},
        {7, "comparison curves from nested start levels never cross",
         criterion_nested_levels},
        {8, "position-cubed and velocity-cubed springs share one norm envelope",
         criterion_shared_envelope},
        {9, "certified basin samples decay and the traced boundary settles",
         criterion_certified_basin},
        {10, "pointwise margin certifies decay where the aggregate test fails",
         criterion_margin_beats_classical},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t_begin = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            c.body();
        } catch (const Failure& f) {
            ok = false;
            detail = f.detail;
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("unexpected error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t_begin)
                                .count();
        std::printf("criterion %2d %s (%6.1f s)  %s\n", c.id,
                    ok ? "PASS" : "FAIL", secs, c.label);
        if (!ok) {
            std::printf("              %s\n", detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    std::printf("%d/10 criteria passed\n",
                static_cast<int>(criteria.size()) - failures);
    return failures == 0 ? 0 : 1;
}
