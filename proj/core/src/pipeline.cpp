#include "odebound/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "odebound/csv.hpp"
#include "odebound/errors.hpp"
#include "odebound/presets.hpp"
#include "odebound/regions.hpp"
#include "odebound/validate.hpp"

namespace odebound::pipeline {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError(dir, "cannot create output directory: " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path, "cannot open for writing");
    out << text;
    if (!out) throw ConfigError(path, "write failed");
}

std::string hex_hash(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

ode::IntegrateOptions integrate_options(const config::RunConfig& cfg) {
    ode::IntegrateOptions o;
    o.rel_tol = cfg.tolerances.rel;
    o.abs_tol = cfg.tolerances.abs;
    o.output_step = cfg.tolerances.output_step;
    return o;
}

json reduction_to_json(const regions::AutonomousReduction& red) {
    json j;
    j["mode"] = config::mode_name(red.mode);
    j["p_hat"] = red.p_hat;
    j["k_hat"] = red.k_hat;
    j["f_hat"] = red.f_hat;
    json coeffs = json::array();
    for (const auto& [deg, c] : red.coefficients)
        coeffs.push_back({{"degree", deg}, {"c_hat", c}});
    j["coefficients"] = coeffs;
    if (red.mode == regions::ReductionMode::Averaged) {
        j["convergence_diagnostic"] = red.convergence_diagnostic;
        j["averaging_warning"] = red.averaging_warning;
    }
    return j;
}

const char* stability_name(regions::Stability s) {
    switch (s) {
        case regions::Stability::Stable: return "Stable";
        case regions::Stability::Unstable: return "Unstable";
        case regions::Stability::SemiStable: return "SemiStable";
    }
    return "Unknown";
}

json fixed_points_to_json(const regions::FixedPointSet& fps) {
    json arr = json::array();
    for (const auto& r : fps.roots)
        arr.push_back({{"d", r.d},
                       {"slope", r.slope},
                       {"stability", stability_name(r.stability)}});
    return arr;
}

struct RegionRun {
    regions::AutonomousReduction reduction;
    regions::FixedPointSet fixed_points;
    std::vector<double> mu;
    std::vector<regions::RegionEstimate> estimates;
    bool mu_fallback = false;
    std::vector<std::string> warnings;
};

RegionRun compute_regions(const PreparedRun& run) {
    RegionRun rr;
    const auto mu_window = run.cfg.regions.mu_window.value_or(run.window);
    const double omega2 = run.cfg.system.omega2_radius.value_or(
        std::numeric_limits<double>::infinity());

    rr.reduction = run.cfg.regions.mode == regions::ReductionMode::Sup
                       ? regions::reduce_sup(run.coeffs, run.window)
                       : regions::reduce_average(run.coeffs, run.window);
    if (rr.reduction.averaging_warning)
        rr.warnings.push_back("averaging diagnostic above 0.1: window averages "
                              "have not converged");
    rr.fixed_points = regions::find_fixed_points(rr.reduction);
    rr.mu.assign(rr.fixed_points.roots.size(), 0.0);

    if (rr.reduction.mode == regions::ReductionMode::Averaged) {
        std::string why;
        if (rr.fixed_points.roots.empty())
            why = "averaged reduction has no fixed points";
        for (std::size_t i = 0; why.empty() && i < rr.fixed_points.roots.size();
             ++i) {
            const auto& root = rr.fixed_points.roots[i];
            const auto mu = regions::estimate_mu(run.coeffs, rr.reduction, root.d,
                                                 root.stability, 0.0, mu_window,
                                                 integrate_options(run.cfg));
            if (mu)
                rr.mu[i] = *mu;
            else
                why = "margin estimation failed";
        }
        if (!why.empty()) {
            rr.mu_fallback = true;
            rr.warnings.push_back(why +
                                  "; certificates fall back to the Sup "
                                  "reduction with mu = 0");
            rr.reduction = regions::reduce_sup(run.coeffs, run.window);
            rr.fixed_points = regions::find_fixed_points(rr.reduction);
            rr.mu.assign(rr.fixed_points.roots.size(), 0.0);
        }
    }

    rr.estimates = regions::classify_regions(rr.fixed_points, rr.reduction, run.path,
                                             run.path.t0(), rr.mu, omega2);
    for (const auto& e : rr.estimates)
        if (!e.validity_radius_checked)
            rr.warnings.push_back("region level truncated to the validity radius");
    return rr;
}

json region_run_to_json(const RegionRun& rr) {
    json j;
    j["reduction"] = reduction_to_json(rr.reduction);
    j["fixed_points"] = fixed_points_to_json(rr.fixed_points);
    j["monotone_growth"] = rr.fixed_points.monotone_growth;
    j["mu"] = rr.mu;
    j["mu_fallback"] = rr.mu_fallback;
    j["regions"] = json::parse(regions::regions_to_json(rr.estimates));
    j["warnings"] = rr.warnings;
    return j;
}

std::vector<double> measured_norms(const ode::Trajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.states.size());
    for (const auto& s : traj.states) out.push_back(lin::norm2(s));
    return out;
}

}  // namespace

PreparedRun prepare(const config::RunConfig& cfg) {
    PreparedRun run;
    run.cfg = cfg;
    run.cfg.system.check();

    run.path = transition::compute_fundamental(cfg.system.A, cfg.system.t0,
                                               cfg.system.horizon, cfg.normalization,
                                               integrate_options(cfg));
    run.coeffs = bounds::make_aux_coefficients(run.path, cfg.system);

    if (cfg.initial_state) {
        run.x0 = *cfg.initial_state;
    } else {
        run.x0.assign(static_cast<std::size_t>(cfg.system.n), 0.1);
        run.cfg.applied_defaults.push_back("initial_state = (0.1, ...) (default)");
    }
    run.X0 = lin::norm2(lin::matvec(run.path.Winv.front(), run.x0));

    if (cfg.analysis.lipschitz_radius) {
        run.radius = *cfg.analysis.lipschitz_radius;
    } else {
        const double factor = transition::default_radius_factor(cfg.system.A);
        run.radius = factor * (run.X0 > 0.0 ? run.X0 : 1.0);
        run.radius_defaulted = true;
        char buf[96];
        std::snprintf(buf, sizeof buf,
                      "analysis.lipschitz_radius = %.6g (default: %.4g * X0)",
                      run.radius, factor);
        run.cfg.applied_defaults.push_back(buf);
    }
    bounds::attach_lipschitz(run.coeffs, run.radius, run.radius_defaulted);

    run.window = cfg.analysis.window.value_or(
        std::make_pair(cfg.system.t0, cfg.system.t0 + cfg.system.horizon));
    run.t_star = cfg.system.t0 + cfg.analysis.t_star_fraction * cfg.system.horizon;
    return run;
}

void write_manifest(const PreparedRun& run, const std::string& outdir,
                    const std::string& command) {
    ensure_dir(outdir);
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["config_hash"] = hex_hash(config::config_hash(run.cfg));
    j["seed"] = run.cfg.validation.seed;
    j["normalization"] = config::normalization_name(run.cfg.normalization);
    j["applied_defaults"] = run.cfg.applied_defaults;
    write_text(outdir + "/manifest.json", j.dump(2) + "\n");
    write_text(outdir + "/config.json", config::config_to_json(run.cfg) + "\n");
}

void run_analyze(const PreparedRun& run, const std::string& outdir) {
    ensure_dir(outdir);
    {
        std::ofstream out(outdir + "/path.csv", std::ios::binary);
        if (!out) throw ConfigError(outdir + "/path.csv", "cannot open for writing");
        transition::write_path_csv(run.path, out);
    }
    csv::write_plot_script(outdir + "/path.gp", "path.csv",
                           {"sigma_max", "sigma_min", "p", "k", "p_running_avg",
                            "k_running_avg"},
                           "fundamental path");

    const auto est = transition::estimate_exponents(run.path, run.cfg.analysis.restarts);
    json j;
    j["mu_max"] = est.mu_max;
    j["N"] = est.N;
    j["lambda"] = est.lambda;
    j["norm_identity_max_rel_error"] = transition::verify_norm_identity(run.path);
    j["fd_fallback_count"] = run.path.fd_fallback_count;
    j["X0"] = run.X0;
    write_text(outdir + "/exponents.json", j.dump(2) + "\n");
}

void run_bound(const PreparedRun& run, const std::string& outdir) {
    ensure_dir(outdir);
    const auto opts = integrate_options(run.cfg);

    const bounds::BoundCurve linear = bounds::solve_linear(run.coeffs, run.X0);
    const bounds::BoundCurve nonlinear = bounds::solve_nonlinear(run.coeffs, run.X0, opts);
    const ode::Trajectory traj =
        ode::integrate(model::make_rhs(run.cfg.system), run.path.t0(),
                       run.path.t_end(), run.x0, opts);

    csv::emit_series({{"X_linear", linear.grid, linear.values},
                      {"X_nonlinear", nonlinear.grid, nonlinear.values},
                      {"norm_measured", traj.grid, measured_norms(traj)}},
                     outdir + "/bounds.csv");
    csv::write_plot_script(outdir + "/bounds.gp", "bounds.csv",
                           {"X_linear", "X_nonlinear", "norm_measured"},
                           "norm bounds vs measured norm");
}

void run_criteria(const PreparedRun& run, const std::string& outdir) {
    ensure_dir(outdir);
    const auto rep = bounds::evaluate_criteria(run.coeffs, run.path, run.t_star,
                                               run.cfg.analysis.restarts, {});
    write_text(outdir + "/criteria.json", bounds::criteria_to_json(rep) + "\n");
}

void run_regions(const PreparedRun& run, const std::string& outdir) {
    ensure_dir(outdir);
    const RegionRun rr = compute_regions(run);
    write_text(outdir + "/regions.json", region_run_to_json(rr).dump(2) + "\n");
}

int run_validate(const PreparedRun& run, const std::string& outdir) {
    ensure_dir(outdir);
    const auto opts = integrate_options(run.cfg);
    const bounds::BoundCurve curve = bounds::solve_nonlinear(run.coeffs, run.X0, opts);
    const auto samples = validate::sample_ellipsoid(
        run.path, run.path.t0(), run.X0, run.cfg.validation.samples,
        validate::SampleMode::Surface, run.cfg.validation.seed);
    const auto rep =
        validate::check_bound(run.cfg.system, curve, samples,
                              run.cfg.validation.rel_slack,
                              run.cfg.validation.seed, opts);

    json j;
    j["samples"] = rep.samples;
    j["violation_count"] = rep.violations.size();
    j["max_ratio"] = rep.max_ratio;
    j["decayed_fraction"] = rep.decayed_fraction;
    j["seed"] = rep.seed;
    j["rel_slack"] = rep.rel_slack;
    j["X0"] = run.X0;
    j["bound_kind"] = "nonlinear";
    write_text(outdir + "/validation.json", j.dump(2) + "\n");

    std::string lines = "sample,time,measured,bound\n";
    for (const auto& v : rep.violations) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", v.sample, v.time,
                      v.measured, v.bound);
        lines += buf;
    }
    write_text(outdir + "/violations.csv", lines);
    return static_cast<int>(rep.violations.size());
}

void run_trace(const PreparedRun& run, const std::string& outdir) {
    ensure_dir(outdir);

    double level_hint = run.X0 > 0.0 ? run.X0 : 1.0;
    {
        PreparedRun sup_run = run;
        sup_run.cfg.regions.mode = regions::ReductionMode::Sup;
        const RegionRun rr = compute_regions(sup_run);
        double best = 0.0;
        for (const auto& e : rr.estimates)
            if (std::isfinite(e.level)) best = std::max(best, e.level);
        if (best > 0.0) level_hint = best;
    }

    const double reverse_span = std::min(run.cfg.system.horizon, 50.0);
    const auto trace = validate::trace_boundary(
        run.cfg.system, run.path, level_hint, run.path.t0(), reverse_span, 16,
        run.cfg.validation.seed, integrate_options(run.cfg));

    json j;
    j["level_hint"] = level_hint;
    j["n_seeds"] = trace.trajectories.size();
    j["seed"] = trace.seed;
    j["escaped_count"] = trace.escaped_count;
    j["no_finite_boundary"] = trace.no_finite_boundary;
    j["loop_drift"] = trace.loop_drift;
    j["tail_points"] = trace.tail_cloud.size();

    // cross-check, reported but never fatal: interior samples of the certified
    // set should fall inside the hull of the traced cloud
    j["containment_fraction"] = nullptr;
    if (!trace.no_finite_boundary && trace.tail_cloud.size() >= 3) {
        const auto hull = validate::convex_hull(trace.tail_cloud);
        if (hull.size() >= 3) {
            const auto inner = validate::sample_ellipsoid(
                run.path, run.path.t0(), 0.95 * level_hint, 100,
                validate::SampleMode::Volume, run.cfg.validation.seed + 1);
            j["containment_fraction"] =
                validate::containment_fraction(hull, inner, trace.plane);
        }
    }
    write_text(outdir + "/trace.json", j.dump(2) + "\n");

    std::string lines = "x1,x2\n";
    for (const auto& pt : trace.tail_cloud) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", pt[0], pt[1]);
        lines += buf;
    }
    write_text(outdir + "/tail_cloud.csv", lines);
}

namespace {

void preset_fig1(const std::string& outdir) {
    config::RunConfig cfg = presets::make_preset("fig1");
    for (const auto mode : {transition::NormalizationMode::Identity,
                            transition::NormalizationMode::SpectralW0}) {
        config::RunConfig c = cfg;
        c.normalization = mode;
        PreparedRun run = prepare(c);
        const auto pavg = transition::running_average(run.path.grid, run.path.p);
        const bool identity = mode == transition::NormalizationMode::Identity;
        const std::string stem = identity ? "p_identity" : "p_spectral";
        csv::emit_series({{"p", run.path.grid, run.path.p},
                          {"p_running_avg", run.path.grid, pavg}},
                         outdir + "/" + stem + ".csv");
        csv::write_plot_script(outdir + "/" + stem + ".gp", stem + ".csv",
                               {"p", "p_running_avg"},
                               identity ? "growth rate, identity start"
                                        : "growth rate, spectral start");
        if (!identity) write_manifest(run, outdir, "reproduce fig1");
    }
}

void preset_fig6(const std::string& outdir) {
    const config::RunConfig duffing_cfg = presets::make_preset("fig6");
    config::RunConfig vdp_cfg = presets::make_preset("fig2_1");
    vdp_cfg.system.horizon = duffing_cfg.system.horizon;
    vdp_cfg.initial_state = duffing_cfg.initial_state;

    PreparedRun run = prepare(duffing_cfg);
    const PreparedRun vdp = prepare(vdp_cfg);

    // both cubic fields admit the same norm envelope, so one auxiliary
    // curve bounds both systems
    const bool same_envelope = run.coeffs.envelope == vdp.coeffs.envelope;
    const auto opts = integrate_options(run.cfg);
    const bounds::BoundCurve shared = bounds::solve_nonlinear(run.coeffs, run.X0, opts);

    const ode::Trajectory traj_d =
        ode::integrate(model::make_rhs(run.cfg.system), run.path.t0(),
                       run.path.t_end(), run.x0, opts);
    const ode::Trajectory traj_v =
        ode::integrate(model::make_rhs(vdp.cfg.system), vdp.path.t0(),
                       vdp.path.t_end(), vdp.x0, opts);

    csv::emit_series({{"norm_duffing", traj_d.grid, measured_norms(traj_d)},
                      {"norm_vanderpol", traj_v.grid, measured_norms(traj_v)},
                      {"X_nonlinear", shared.grid, shared.values}},
                     outdir + "/comparison.csv");
    csv::write_plot_script(outdir + "/comparison.gp", "comparison.csv",
                           {"norm_duffing", "norm_vanderpol", "X_nonlinear"},
                           "cubic spring vs cubic damping under one bound");

    json j;
    j["envelope_identity"] = same_envelope;
    write_text(outdir + "/envelope_check.json", j.dump(2) + "\n");
    write_manifest(run, outdir, "reproduce fig6");
}

}  // namespace

void run_preset(const std::string& name, const std::string& out_base) {
    const config::RunConfig cfg = presets::make_preset(name);
    const std::string outdir =
        out_base.empty() ? cfg.output_dir : out_base + "/" + cfg.output_dir;
    ensure_dir(outdir);

    if (name == "fig1") {
        preset_fig1(outdir);
        return;
    }
    if (name == "fig6") {
        preset_fig6(outdir);
        return;
    }

    PreparedRun run = prepare(cfg);
    if (name == "fig5") {
        run_analyze(run, outdir);
        write_manifest(run, outdir, "reproduce fig5");
        return;
    }
    if (name == "fig2_1" || name == "fig2_2") {
        run_analyze(run, outdir);
        run_bound(run, outdir);
        run_criteria(run, outdir);
        run_validate(run, outdir);
        write_manifest(run, outdir, "reproduce " + name);
        return;
    }
    // fig4 family: certificates plus reverse-time trace
    run_analyze(run, outdir);
    run_bound(run, outdir);
    run_regions(run, outdir);
    run_trace(run, outdir);
    write_manifest(run, outdir, "reproduce " + name);
}

}  // namespace odebound::pipeline
