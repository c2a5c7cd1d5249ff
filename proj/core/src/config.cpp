#include "odebound/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "odebound/errors.hpp"

namespace odebound::config {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path, what);
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> known) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) fail(path, "unknown key '" + key + "'");
    }
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double get_positive(const json& j, const std::string& path) {
    const double v = get_number(j, path);
    if (!(v > 0.0)) fail(path, "must be > 0");
    return v;
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

model::TrigAffineScalar parse_entry(const json& j, const std::string& path) {
    model::TrigAffineScalar s;
    if (j.is_number()) {
        s.constant = j.get<double>();
        return s;
    }
    if (!j.is_object()) fail(path, "expected a number or {constant, harmonics}");
    reject_unknown(j, path, {"constant", "harmonics"});
    if (j.contains("constant")) s.constant = get_number(j["constant"], path + ".constant");
    if (j.contains("harmonics")) {
        const json& hs = j["harmonics"];
        if (!hs.is_array()) fail(path + ".harmonics", "expected an array");
        for (std::size_t i = 0; i < hs.size(); ++i) {
            const std::string hp = path + ".harmonics[" + std::to_string(i) + "]";
            const json& h = hs[i];
            if (!h.is_object()) fail(hp, "expected {amplitude, omega, phase}");
            reject_unknown(h, hp, {"amplitude", "omega", "phase"});
            model::Harmonic harm;
            if (!h.contains("amplitude")) fail(hp, "missing 'amplitude'");
            harm.amplitude = get_number(h["amplitude"], hp + ".amplitude");
            if (!h.contains("omega")) fail(hp, "missing 'omega'");
            harm.omega = get_number(h["omega"], hp + ".omega");
            if (harm.omega < 0.0) fail(hp + ".omega", "must be >= 0");
            if (h.contains("phase")) harm.phase = get_number(h["phase"], hp + ".phase");
            s.harmonics.push_back(harm);
        }
    }
    return s;
}

model::SystemSpec parse_system(const json& j, const std::string& path,
                               std::vector<std::string>& defaults) {
    if (!j.is_object()) fail(path, "expected an object");
    reject_unknown(j, path, {"n", "t0", "horizon", "omega2_radius", "A", "f", "F"});

    model::SystemSpec sys;
    if (!j.contains("n")) fail(path, "missing 'n'");
    sys.n = get_int(j["n"], path + ".n");
    if (sys.n < 1) fail(path + ".n", "must be >= 1");

    if (j.contains("t0"))
        sys.t0 = get_number(j["t0"], path + ".t0");
    else
        defaults.push_back("system.t0 = 0 (default)");
    if (j.contains("horizon"))
        sys.horizon = get_positive(j["horizon"], path + ".horizon");
    else
        defaults.push_back("system.horizon = 50 (default)");
    if (j.contains("omega2_radius"))
        sys.omega2_radius = get_positive(j["omega2_radius"], path + ".omega2_radius");

    if (!j.contains("A")) fail(path, "missing 'A'");
    const json& A = j["A"];
    if (!A.is_array() || static_cast<int>(A.size()) != sys.n)
        fail(path + ".A", "expected " + std::to_string(sys.n) + " rows");
    sys.A.n = sys.n;
    for (int r = 0; r < sys.n; ++r) {
        const json& row = A[static_cast<std::size_t>(r)];
        const std::string rp = path + ".A[" + std::to_string(r) + "]";
        if (!row.is_array() || static_cast<int>(row.size()) != sys.n)
            fail(rp, "expected " + std::to_string(sys.n) + " entries");
        for (int c = 0; c < sys.n; ++c)
            sys.A.entries.push_back(parse_entry(row[static_cast<std::size_t>(c)],
                                                rp + "[" + std::to_string(c) + "]"));
    }

    sys.f.n = sys.n;
    sys.f.components.resize(static_cast<std::size_t>(sys.n));
    if (j.contains("f")) {
        const json& f = j["f"];
        const std::string fp = path + ".f";
        if (!f.is_array() || static_cast<int>(f.size()) != sys.n)
            fail(fp, "expected " + std::to_string(sys.n) + " component lists");
        for (int c = 0; c < sys.n; ++c) {
            const json& comp = f[static_cast<std::size_t>(c)];
            const std::string cp = fp + "[" + std::to_string(c) + "]";
            if (!comp.is_array()) fail(cp, "expected an array of monomials");
            for (std::size_t m = 0; m < comp.size(); ++m) {
                const std::string mp = cp + "[" + std::to_string(m) + "]";
                const json& mono = comp[m];
                if (!mono.is_object()) fail(mp, "expected {coefficient, exponents}");
                reject_unknown(mono, mp, {"coefficient", "exponents"});
                if (!mono.contains("coefficient")) fail(mp, "missing 'coefficient'");
                if (!mono.contains("exponents")) fail(mp, "missing 'exponents'");
                const model::TrigAffineScalar coef =
                    parse_entry(mono["coefficient"], mp + ".coefficient");
                const json& ex = mono["exponents"];
                if (!ex.is_array() || static_cast<int>(ex.size()) != sys.n)
                    fail(mp + ".exponents",
                         "expected " + std::to_string(sys.n) + " exponents");
                std::vector<int> exps;
                int degree = 0;
                for (std::size_t e = 0; e < ex.size(); ++e) {
                    const int v = get_int(ex[e], mp + ".exponents[" + std::to_string(e) + "]");
                    if (v < 0) fail(mp + ".exponents", "must be >= 0");
                    exps.push_back(v);
                    degree += v;
                }
                if (degree < 1)
                    fail(path + ".f", "degree-0 monomial in component " +
                                          std::to_string(c) +
                                          ": the nonlinearity must vanish at x = 0");
                sys.f.components[static_cast<std::size_t>(c)].emplace_back(coef, exps);
            }
        }
    }

    if (j.contains("F")) {
        const json& F = j["F"];
        const std::string Fp = path + ".F";
        if (!F.is_array() || static_cast<int>(F.size()) != sys.n)
            fail(Fp, "expected " + std::to_string(sys.n) + " components");
        bool any = false;
        std::vector<model::TrigAffineScalar> comps;
        for (int c = 0; c < sys.n; ++c) {
            comps.push_back(parse_entry(F[static_cast<std::size_t>(c)],
                                        Fp + "[" + std::to_string(c) + "]"));
            if (comps.back().constant != 0.0 || !comps.back().harmonics.empty())
                any = true;
        }
        if (any) sys.F.components = std::move(comps);
    }

    try {
        sys.check();
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return sys;
}

std::pair<double, double> parse_window(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [t_a, t_b]");
    const double a = get_number(j[0], path + "[0]");
    const double b = get_number(j[1], path + "[1]");
    if (!(b > a)) fail(path, "window end must exceed its start");
    return {a, b};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json entry_to_json(const model::TrigAffineScalar& s) {
    if (s.harmonics.empty()) return s.constant;
    json j;
    j["constant"] = s.constant;
    json hs = json::array();
    for (const auto& h : s.harmonics)
        hs.push_back({{"amplitude", h.amplitude}, {"omega", h.omega}, {"phase", h.phase}});
    j["harmonics"] = hs;
    return j;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("config", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("config", "expected a JSON object");
    reject_unknown(j, "config",
                   {"system", "normalization", "tolerances", "analysis", "regions",
                    "validation", "output_dir", "initial_state"});

    RunConfig cfg;
    if (!j.contains("system")) fail("config", "missing 'system'");
    cfg.system = parse_system(j["system"], "config.system", cfg.applied_defaults);

    if (j.contains("normalization")) {
        const std::string s = get_string(j["normalization"], "config.normalization");
        if (s == "identity")
            cfg.normalization = transition::NormalizationMode::Identity;
        else if (s == "spectral")
            cfg.normalization = transition::NormalizationMode::SpectralW0;
        else
            fail("config.normalization", "expected 'identity' or 'spectral'");
    } else {
        cfg.applied_defaults.push_back("normalization = identity (default)");
    }

    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        const std::string tp = "config.tolerances";
        if (!t.is_object()) fail(tp, "expected an object");
        reject_unknown(t, tp, {"rel", "abs", "output_step"});
        if (t.contains("rel"))
            cfg.tolerances.rel = get_positive(t["rel"], tp + ".rel");
        else
            cfg.applied_defaults.push_back("tolerances.rel = 1e-08 (default)");
        if (t.contains("abs"))
            cfg.tolerances.abs = get_positive(t["abs"], tp + ".abs");
        else
            cfg.applied_defaults.push_back("tolerances.abs = 1e-10 (default)");
        if (t.contains("output_step"))
            cfg.tolerances.output_step = get_positive(t["output_step"], tp + ".output_step");
        else
            cfg.applied_defaults.push_back("tolerances.output_step = 0.01 (default)");
    } else {
        cfg.applied_defaults.push_back(
            "tolerances = {rel 1e-08, abs 1e-10, output_step 0.01} (default)");
    }

    if (j.contains("analysis")) {
        const json& a = j["analysis"];
        const std::string ap = "config.analysis";
        if (!a.is_object()) fail(ap, "expected an object");
        reject_unknown(a, ap, {"t_star_fraction", "restarts", "window", "lipschitz_radius"});
        if (a.contains("t_star_fraction")) {
            cfg.analysis.t_star_fraction =
                get_number(a["t_star_fraction"], ap + ".t_star_fraction");
            if (cfg.analysis.t_star_fraction < 0.0 || cfg.analysis.t_star_fraction >= 1.0)
                fail(ap + ".t_star_fraction", "must lie in [0, 1)");
        } else {
            cfg.applied_defaults.push_back("analysis.t_star_fraction = 0.1 (default)");
        }
        if (a.contains("restarts")) {
            cfg.analysis.restarts = get_int(a["restarts"], ap + ".restarts");
            if (cfg.analysis.restarts < 1) fail(ap + ".restarts", "must be >= 1");
        } else {
            cfg.applied_defaults.push_back("analysis.restarts = 8 (default)");
        }
        if (a.contains("window"))
            cfg.analysis.window = parse_window(a["window"], ap + ".window");
        if (a.contains("lipschitz_radius"))
            cfg.analysis.lipschitz_radius =
                get_positive(a["lipschitz_radius"], ap + ".lipschitz_radius");
    } else {
        cfg.applied_defaults.push_back(
            "analysis = {t_star_fraction 0.1, restarts 8} (default)");
    }

    if (j.contains("regions")) {
        const json& r = j["regions"];
        const std::string rp = "config.regions";
        if (!r.is_object()) fail(rp, "expected an object");
        reject_unknown(r, rp, {"mode", "mu_window"});
        if (r.contains("mode")) {
            const std::string s = get_string(r["mode"], rp + ".mode");
            if (s == "sup")
                cfg.regions.mode = regions::ReductionMode::Sup;
            else if (s == "avg")
                cfg.regions.mode = regions::ReductionMode::Averaged;
            else
                fail(rp + ".mode", "expected 'sup' or 'avg'");
        } else {
            cfg.applied_defaults.push_back("regions.mode = sup (default)");
        }
        if (r.contains("mu_window"))
            cfg.regions.mu_window = parse_window(r["mu_window"], rp + ".mu_window");
    } else {
        cfg.applied_defaults.push_back("regions = {mode sup} (default)");
    }

    if (j.contains("validation")) {
        const json& v = j["validation"];
        const std::string vp = "config.validation";
        if (!v.is_object()) fail(vp, "expected an object");
        reject_unknown(v, vp, {"samples", "seed", "rel_slack"});
        if (v.contains("samples")) {
            cfg.validation.samples = get_int(v["samples"], vp + ".samples");
            if (cfg.validation.samples < 1) fail(vp + ".samples", "must be >= 1");
        } else {
            cfg.applied_defaults.push_back("validation.samples = 100 (default)");
        }
        if (v.contains("seed")) {
            if (!v["seed"].is_number_integer()) fail(vp + ".seed", "expected an integer");
            cfg.validation.seed = v["seed"].get<std::uint64_t>();
        } else {
            cfg.applied_defaults.push_back("validation.seed = 20240817 (default)");
        }
        if (v.contains("rel_slack"))
            cfg.validation.rel_slack = get_positive(v["rel_slack"], vp + ".rel_slack");
        else
            cfg.applied_defaults.push_back("validation.rel_slack = 0.001 (default)");
    } else {
        cfg.applied_defaults.push_back(
            "validation = {samples 100, seed 20240817, rel_slack 0.001} (default)");
    }

    if (j.contains("output_dir"))
        cfg.output_dir = get_string(j["output_dir"], "config.output_dir");
    else
        cfg.applied_defaults.push_back("output_dir = out (default)");

    if (j.contains("initial_state")) {
        const json& x = j["initial_state"];
        if (!x.is_array() || static_cast<int>(x.size()) != cfg.system.n)
            fail("config.initial_state",
                 "expected " + std::to_string(cfg.system.n) + " numbers");
        lin::Vec x0;
        for (std::size_t i = 0; i < x.size(); ++i)
            x0.push_back(get_number(x[i], "config.initial_state[" + std::to_string(i) + "]"));
        cfg.initial_state = std::move(x0);
    }

    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    json sys;
    sys["n"] = cfg.system.n;
    sys["t0"] = cfg.system.t0;
    sys["horizon"] = cfg.system.horizon;
    if (cfg.system.omega2_radius) sys["omega2_radius"] = *cfg.system.omega2_radius;
    json A = json::array();
    for (int r = 0; r < cfg.system.n; ++r) {
        json row = json::array();
        for (int c = 0; c < cfg.system.n; ++c)
            row.push_back(entry_to_json(
                cfg.system.A.entries[static_cast<std::size_t>(r * cfg.system.n + c)]));
        A.push_back(row);
    }
    sys["A"] = A;
    json f = json::array();
    for (const auto& comp : cfg.system.f.components) {
        json list = json::array();
        for (const auto& mono : comp)
            list.push_back({{"coefficient", entry_to_json(mono.coefficient)},
                            {"exponents", mono.exponents}});
        f.push_back(list);
    }
    sys["f"] = f;
    if (!cfg.system.F.components.empty()) {
        json F = json::array();
        for (const auto& comp : cfg.system.F.components) F.push_back(entry_to_json(comp));
        sys["F"] = F;
    }
    j["system"] = sys;

    j["normalization"] = normalization_name(cfg.normalization);
    j["tolerances"] = {{"rel", cfg.tolerances.rel},
                       {"abs", cfg.tolerances.abs},
                       {"output_step", cfg.tolerances.output_step}};
    json a;
    a["t_star_fraction"] = cfg.analysis.t_star_fraction;
    a["restarts"] = cfg.analysis.restarts;
    if (cfg.analysis.window)
        a["window"] = {cfg.analysis.window->first, cfg.analysis.window->second};
    if (cfg.analysis.lipschitz_radius) a["lipschitz_radius"] = *cfg.analysis.lipschitz_radius;
    j["analysis"] = a;
    json r;
    r["mode"] = mode_name(cfg.regions.mode);
    if (cfg.regions.mu_window)
        r["mu_window"] = {cfg.regions.mu_window->first, cfg.regions.mu_window->second};
    j["regions"] = r;
    j["validation"] = {{"samples", cfg.validation.samples},
                       {"seed", cfg.validation.seed},
                       {"rel_slack", cfg.validation.rel_slack}};
    j["output_dir"] = cfg.output_dir;
    if (cfg.initial_state) j["initial_state"] = *cfg.initial_state;
    return j.dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string canon = config_to_json(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

const char* normalization_name(transition::NormalizationMode mode) {
    return mode == transition::NormalizationMode::Identity ? "identity" : "spectral";
}

const char* mode_name(regions::ReductionMode mode) {
    return mode == regions::ReductionMode::Sup ? "sup" : "avg";
}

}  // namespace odebound::config
