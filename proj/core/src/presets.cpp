#include "odebound/presets.hpp"

#include <cmath>

#include "odebound/errors.hpp"

namespace odebound::presets {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct OscillatorParams {
    double omega0_sq = 4.0;
    double alpha1 = 0.2;
    double alpha2 = 0.1;
    double a1 = 0.0, r1 = 0.0;
    double a2 = 0.0, r2 = 0.0;
    double a = 0.0, omega2 = 2.0 * kPi;
    bool duffing = false;  // spring nonlinearity instead of damping
};

config::RunConfig oscillator(const OscillatorParams& p) {
    config::RunConfig cfg;
    model::SystemSpec sys;
    sys.n = 2;
    sys.t0 = 0.0;

    sys.A.n = 2;
    sys.A.entries.resize(4);
    sys.A.entries[1] = model::TrigAffineScalar(1.0);
    std::vector<model::Harmonic> spring;
    if (p.a1 != 0.0) spring.push_back({-p.a1, p.r1, 0.0});
    if (p.a2 != 0.0) spring.push_back({-p.a2, p.r2, 0.0});
    sys.A.entries[2] = model::TrigAffineScalar(-p.omega0_sq, spring);
    sys.A.entries[3] = model::TrigAffineScalar(-p.alpha1);

    sys.f.n = 2;
    sys.f.components.resize(2);
    const std::vector<int> exps = p.duffing ? std::vector<int>{3, 0}
                                            : std::vector<int>{0, 3};
    sys.f.components[1].emplace_back(model::TrigAffineScalar(-p.alpha2), exps);

    if (p.a != 0.0) {
        sys.F.components.resize(2);
        sys.F.components[1] =
            model::TrigAffineScalar(0.0, {model::Harmonic{p.a, p.omega2, 0.0}});
    }

    cfg.system = sys;
    cfg.normalization = transition::NormalizationMode::SpectralW0;
    cfg.tolerances.output_step = 0.002;
    return cfg;
}

OscillatorParams fig2_params() {
    OscillatorParams p;
    p.a1 = 0.5;
    p.r1 = kPi;
    p.a2 = 0.5;
    p.r2 = 7.0;
    return p;
}

OscillatorParams fig4_params() {
    OscillatorParams p;
    p.alpha2 = -0.05;
    p.r1 = 3.2 * kPi;
    p.r2 = 13.0;
    return p;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "fig1", "fig2_1", "fig2_2", "fig4_1", "fig4_2", "fig4_3", "fig5", "fig6"};
    return names;
}

config::RunConfig make_preset(const std::string& name) {
    config::RunConfig cfg;
    if (name == "fig1") {
        cfg = oscillator(fig2_params());
        cfg.system.horizon = 200.0;
        cfg.initial_state = lin::Vec{0.1, 0.1};
        cfg.validation.seed = 101;
    } else if (name == "fig2_1" || name == "fig2_2") {
        OscillatorParams p = fig2_params();
        if (name == "fig2_2") p.a = 0.01;
        cfg = oscillator(p);
        cfg.system.horizon = 50.0;
        cfg.initial_state = lin::Vec{0.1, 0.1};
        cfg.validation.seed = name == "fig2_1" ? 102 : 103;
    } else if (name == "fig4_1") {
        OscillatorParams p = fig4_params();
        p.a1 = p.a2 = 0.1;
        cfg = oscillator(p);
        cfg.system.horizon = 200.0;
        cfg.initial_state = lin::Vec{0.2, 0.0};
        cfg.validation.seed = 104;
    } else if (name == "fig4_2" || name == "fig4_3") {
        OscillatorParams p = fig4_params();
        p.a1 = p.a2 = 5.0;
        if (name == "fig4_3") p.a = 0.3;
        cfg = oscillator(p);
        cfg.system.horizon = 50.0;
        cfg.tolerances.output_step = 0.001;
        cfg.regions.mode = regions::ReductionMode::Averaged;
        cfg.initial_state = lin::Vec{0.2, 0.0};
        cfg.validation.seed = name == "fig4_2" ? 105 : 106;
    } else if (name == "fig5") {
        cfg = oscillator(fig2_params());
        cfg.system.horizon = 50.0;
        cfg.initial_state = lin::Vec{0.1, 0.1};
        cfg.validation.seed = 107;
    } else if (name == "fig6") {
        OscillatorParams p = fig2_params();
        p.duffing = true;
        cfg = oscillator(p);
        cfg.system.horizon = 50.0;
        cfg.initial_state = lin::Vec{0.1, 0.1};
        cfg.validation.seed = 108;
    } else {
        std::string names;
        for (const auto& n : preset_names()) {
            if (!names.empty()) names += ", ";
            names += n;
        }
        throw ConfigError("preset", "unknown preset '" + name +
                                        "'; valid names: " + names);
    }
    cfg.output_dir = name;
    return cfg;
}

}  // namespace odebound::presets
