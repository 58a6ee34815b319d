#include "coldsap/units.hpp"

#include "coldsap/errors.hpp"

#include <cmath>

namespace coldsap {

std::string to_string(UnitMode mode)
{
    return mode == UnitMode::natural ? "natural" : "rf";
}

UnitMode unit_mode_from_string(std::string_view text)
{
    if (text == "natural") return UnitMode::natural;
    if (text == "rf") return UnitMode::rf;
    throw ConfigError("units: expected 'natural' or 'rf', got '" + std::string(text) + "'");
}

UnitSystem natural_units()
{
    return UnitSystem{};
}

UnitSystem build_rf_units(const PhysicalConstants& c)
{
    const double values[] = {c.bohr_magneton, c.g_factor, c.field_gradient, c.atomic_mass};
    for (double v : values) {
        if (!std::isfinite(v) || v == 0.0)
            throw ConfigError("rf units: magnetic moment, g-factor, field gradient and mass must be finite and non-zero");
    }
    if (c.atomic_mass < 0.0 || c.bohr_magneton < 0.0)
        throw ConfigError("rf units: bohr_magneton and atomic_mass must be positive");

    const double force = std::abs(c.force());
    const double hbar = si::hbar;
    const double m = c.atomic_mass;

    UnitSystem u;
    u.mode = UnitMode::rf;
    u.length_scale = std::cbrt(4.0 * hbar * hbar / (force * m));
    u.time_scale = std::cbrt(16.0 * hbar * m / (force * force));
    u.energy_scale = m * u.length_scale * u.length_scale / (u.time_scale * u.time_scale);
    return u;
}

double rf_force_in_units(const PhysicalConstants& constants, const UnitSystem& units)
{
    return std::abs(constants.force()) * units.length_scale / units.energy_scale;
}

std::string energy_unit_label(UnitMode mode)
{
    return mode == UnitMode::natural ? "hbar*omega" : "u_rf";
}

std::string length_unit_label(UnitMode mode)
{
    return mode == UnitMode::natural ? "a_ho" : "x_rf";
}

std::string time_unit_label(UnitMode mode)
{
    return mode == UnitMode::natural ? "1/omega" : "t_rf";
}

} // namespace coldsap
