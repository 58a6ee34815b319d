#include "coldsap/config.hpp"
#include "coldsap/errors.hpp"
#include "coldsap/units.hpp"

#include <doctest.h>

#include <cmath>

using namespace coldsap;

TEST_CASE("rf unit scales follow from the defining relations")
{
    PhysicalConstants c;
    const UnitSystem u = build_rf_units(c);
    const double f = std::abs(c.bohr_magneton * c.g_factor * c.field_gradient);
    const double m = c.atomic_mass, hb = si::hbar;
    CHECK(u.length_scale == doctest::Approx(std::cbrt(4 * hb * hb / (f * m))).epsilon(1e-12));
    CHECK(u.time_scale == doctest::Approx(std::cbrt(16 * hb * m / (f * f))).epsilon(1e-12));
    CHECK(u.energy_scale ==
          doctest::Approx(m * u.length_scale * u.length_scale / (u.time_scale * u.time_scale)).epsilon(1e-12));
    // hbar = 1 inside the unit system
    CHECK(hb / (u.energy_scale * u.time_scale) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rf_force_in_units(c, u) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("rf units reject degenerate constants")
{
    PhysicalConstants c;
    c.field_gradient = 0.0;
    CHECK_THROWS_AS(build_rf_units(c), ConfigError);
}

TEST_CASE("config parsing, canonical form and hash")
{
    const ExperimentConfig a = parse_config("units = natural\nparticles = 2\ninteraction = 0.3 natural\n");
    CHECK(a.interaction == 0.3);
    const ExperimentConfig b = parse_config(canonical_text(a));
    CHECK(canonical_text(b) == canonical_text(a));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 64);

    ExperimentConfig c = a;
    c.interaction = 0.30000000000000004;
    CHECK(config_hash(c) != config_hash(a));
}

TEST_CASE("config errors name the offending key")
{
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("frobnicate = 3\n").find("frobnicate") != std::string::npos);
    CHECK(message("interaction = 0.4\n").find("interaction") != std::string::npos);
    CHECK(message("units = natural\ninteraction = 0.4 rf\n").find("interaction") != std::string::npos);
    CHECK(message("particles = two\n").find("particles") != std::string::npos);
}

TEST_CASE("validation reports M = N")
{
    const ExperimentConfig cfg = parse_config("particles = 2\ntarget_split = 2\n");
    const ValidationReport r = validate_config(cfg);
    REQUIRE_FALSE(r.ok());
    CHECK(r.describe().find("target_split") != std::string::npos);
    CHECK(validate_config(parse_config("particles = 3\ntarget_split = 2\n")).ok());
}

TEST_CASE("environment overrides file values")
{
    const ExperimentConfig cfg = parse_config("particles = 2\n", {{"COLDSAP_PARTICLES", "3"}});
    CHECK(cfg.particles == 3);
}

TEST_CASE("si conversions in rf configs")
{
    const ExperimentConfig cfg = parse_config("units = rf\nduration = 0.134 s\n");
    const UnitSystem u = cfg.unit_system();
    CHECK(cfg.duration == doctest::Approx(u.time_from_si(0.134)).epsilon(1e-12));
}
