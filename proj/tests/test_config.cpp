#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "odebound/config.hpp"
#include "odebound/csv.hpp"
#include "odebound/errors.hpp"
#include "odebound/presets.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

using namespace odebound;

namespace {

const char* kMinimal = R"({"system": {"n": 2, "A": [[0, 0], [0, 0]]}})";

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal config fills and records defaults") {
    const auto cfg = config::parse_config(kMinimal);
    CHECK(cfg.system.n == 2);
    CHECK(cfg.system.t0 == 0.0);
    CHECK(cfg.system.horizon == 50.0);
    CHECK(cfg.normalization == transition::NormalizationMode::Identity);
    CHECK(cfg.tolerances.rel == 1e-8);
    CHECK(cfg.tolerances.abs == 1e-10);
    CHECK(cfg.tolerances.output_step == 0.01);
    CHECK(cfg.validation.samples == 100);
    CHECK(cfg.validation.seed == 20240817);
    CHECK(cfg.regions.mode == regions::ReductionMode::Sup);
    CHECK_FALSE(cfg.applied_defaults.empty());

    bool horizon_noted = false;
    for (const auto& line : cfg.applied_defaults)
        if (line.find("horizon") != std::string::npos) horizon_noted = true;
    CHECK(horizon_noted);
}

TEST_CASE("unknown keys are rejected with their path") {
    const char* text = R"({"system": {"n": 1, "A": [[0]]}, "bogus": 1})";
    try {
        (void)config::parse_config(text);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }

    const char* nested = R"({"system": {"n": 1, "A": [[0]], "extra": 2}})";
    try {
        (void)config::parse_config(nested);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("system") != std::string::npos);
        CHECK(std::string(e.what()).find("extra") != std::string::npos);
    }
}

TEST_CASE("degree-zero monomials are rejected") {
    const char* text = R"({"system": {"n": 1, "A": [[0]],
        "f": [[{"coefficient": 1.0, "exponents": [0]}]]}})";
    try {
        (void)config::parse_config(text);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("system.f") != std::string::npos);
        CHECK(what.find("degree") != std::string::npos);
    }
}

TEST_CASE("matrix entries accept numbers or harmonic objects") {
    const char* text = R"({"system": {"n": 2, "A": [
        [0, 1],
        [{"constant": -4, "harmonics": [{"amplitude": -0.5, "omega": 3.14}]}, -0.2]
    ]}})";
    const auto cfg = config::parse_config(text);
    CHECK(cfg.system.A(0, 1).constant == 1.0);
    CHECK(cfg.system.A(1, 0).constant == -4.0);
    REQUIRE(cfg.system.A(1, 0).harmonics.size() == 1);
    CHECK(cfg.system.A(1, 0).harmonics[0].amplitude == -0.5);
    CHECK(cfg.system.A(1, 1).constant == -0.2);
}

TEST_CASE("invalid tolerance values are rejected") {
    const char* text =
        R"({"system": {"n": 1, "A": [[0]]}, "tolerances": {"rel": -1e-8}})";
    CHECK_THROWS_AS((void)config::parse_config(text), ConfigError);
}

TEST_CASE("canonical json round-trips to the same hash") {
    const auto cfg = presets::make_preset("fig2_1");
    const std::string canon = config::config_to_json(cfg);
    const auto reparsed = config::parse_config(canon);
    CHECK(config::config_hash(cfg) == config::config_hash(reparsed));
    CHECK(reparsed.applied_defaults.empty());  // everything explicit

    auto tweaked = cfg;
    tweaked.validation.seed += 1;
    CHECK(config::config_hash(tweaked) != config::config_hash(cfg));
}

TEST_CASE("load_config_file reads what parse_config accepts") {
    const std::string path = "config_round_trip.json";
    {
        std::ofstream out(path);
        out << kMinimal;
    }
    const auto cfg = config::load_config_file(path);
    CHECK(cfg.system.n == 2);
    std::remove(path.c_str());

    CHECK_THROWS_AS((void)config::load_config_file("missing_config.json"), ConfigError);
}

TEST_CASE("name helpers") {
    CHECK(std::string(config::normalization_name(
              transition::NormalizationMode::Identity)) == "identity");
    CHECK(std::string(config::normalization_name(
              transition::NormalizationMode::SpectralW0)) == "spectral");
    CHECK(std::string(config::mode_name(regions::ReductionMode::Sup)) == "sup");
    CHECK(std::string(config::mode_name(regions::ReductionMode::Averaged)) == "avg");
}

TEST_CASE("preset catalog") {
    const auto names = presets::preset_names();
    REQUIRE(names.size() == 8);
    for (const char* expect : {"fig1", "fig2_1", "fig2_2", "fig4_1", "fig4_2",
                               "fig4_3", "fig5", "fig6"}) {
        bool found = false;
        for (const auto& n : names)
            if (n == expect) found = true;
        CHECK_MESSAGE(found, expect);
    }

    try {
        (void)presets::make_preset("fig99");
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("fig2_1") != std::string::npos);
    }
}

TEST_CASE("damped spring preset wiring") {
    const auto cfg = presets::make_preset("fig2_1");
    const auto& sys = cfg.system;
    CHECK(sys.n == 2);
    CHECK(sys.horizon == 50.0);
    CHECK(sys.A(0, 1).constant == 1.0);
    CHECK(sys.A(1, 0).constant == -4.0);
    REQUIRE(sys.A(1, 0).harmonics.size() == 2);
    CHECK(sys.A(1, 0).harmonics[0].amplitude == doctest::Approx(-0.5));
    CHECK(sys.A(1, 0).harmonics[0].omega == doctest::Approx(M_PI));
    CHECK(sys.A(1, 0).harmonics[1].amplitude == doctest::Approx(-0.5));
    CHECK(sys.A(1, 0).harmonics[1].omega == doctest::Approx(7.0));
    CHECK(sys.A(1, 1).constant == doctest::Approx(-0.2));

    REQUIRE(sys.f.components.size() == 2);
    CHECK(sys.f.components[0].empty());
    REQUIRE(sys.f.components[1].size() == 1);
    CHECK(sys.f.components[1][0].coefficient.constant == doctest::Approx(-0.1));
    CHECK(sys.f.components[1][0].exponents == std::vector<int>{0, 3});

    CHECK(sys.F.empty());
    CHECK(cfg.normalization == transition::NormalizationMode::SpectralW0);
    REQUIRE(cfg.initial_state.has_value());
    CHECK((*cfg.initial_state)[0] == doctest::Approx(0.1));
    CHECK((*cfg.initial_state)[1] == doctest::Approx(0.1));
    CHECK(cfg.output_dir == "fig2_1");
}

TEST_CASE("forced and strongly driven preset variants") {
    const auto forced = presets::make_preset("fig2_2");
    REQUIRE(forced.system.F.components.size() == 2);
    REQUIRE(forced.system.F.components[1].harmonics.size() == 1);
    CHECK(forced.system.F.components[1].harmonics[0].amplitude ==
          doctest::Approx(0.01));
    CHECK(forced.system.F.components[1].harmonics[0].omega ==
          doctest::Approx(2.0 * M_PI));

    const auto strong = presets::make_preset("fig4_2");
    CHECK(strong.regions.mode == regions::ReductionMode::Averaged);
    CHECK(strong.system.A(1, 0).harmonics[0].amplitude == doctest::Approx(-5.0));
    CHECK(strong.tolerances.output_step == doctest::Approx(0.001));

    const auto duffing = presets::make_preset("fig6");
    CHECK(duffing.system.f.components[1][0].exponents == std::vector<int>{3, 0});

    // seeds are distinct so runs do not share random streams
    CHECK(presets::make_preset("fig2_1").validation.seed !=
          presets::make_preset("fig2_2").validation.seed);
}

TEST_CASE("csv emission") {
    const std::string path = "emit_test.csv";

    SUBCASE("empty list gives a header-only file") {
        const auto res = csv::emit_series({}, path);
        CHECK(res.rows == 0);
        CHECK_FALSE(res.resampled);
        CHECK(read_file(path) == "t\n");
    }

    SUBCASE("aligned series share the grid column") {
        const std::vector<double> g{0.0, 0.5, 1.0};
        const auto res = csv::emit_series(
            {{"a", g, {1.0, 2.0, 3.0}}, {"b", g, {-1.0, 0.5, 0.25}}}, path);
        CHECK(res.rows == 3);
        CHECK_FALSE(res.resampled);
        const std::string text = read_file(path);
        CHECK(text.substr(0, text.find('\n')) == "t,a,b");
        CHECK(text.find("\r") == std::string::npos);
    }

    SUBCASE("misaligned series are resampled onto the coarsest grid") {
        const std::vector<double> fine{0.0, 0.25, 0.5, 0.75, 1.0};
        const std::vector<double> coarse{0.0, 0.5, 1.0};
        const auto res = csv::emit_series(
            {{"fine", fine, {0.0, 0.25, 0.5, 0.75, 1.0}},
             {"coarse", coarse, {0.0, 1.0, 2.0}}},
            path);
        CHECK(res.resampled);
        CHECK(res.rows == 3);
    }

    SUBCASE("values survive a text round trip exactly") {
        const std::vector<double> g{0.0};
        const double v = M_PI;
        (void)csv::emit_series({{"v", g, {v}}}, path);
        const std::string text = read_file(path);
        const auto line = text.substr(text.find('\n') + 1);
        const auto comma = line.find(',');
        CHECK(std::stod(line.substr(comma + 1)) == v);
    }

    std::remove(path.c_str());
}

TEST_CASE("plot script references the csv") {
    const std::string csv_path = "plot_test.csv";
    const std::string gp_path = "plot_test.gp";
    (void)csv::emit_series({{"a", {0.0, 1.0}, {1.0, 2.0}}}, csv_path);
    csv::write_plot_script(gp_path, "plot_test.csv", {"a"}, "smoke");
    const std::string text = read_file(gp_path);
    CHECK(text.find("plot") != std::string::npos);
    CHECK(text.find("plot_test.csv") != std::string::npos);
    std::remove(csv_path.c_str());
    std::remove(gp_path.c_str());
}
