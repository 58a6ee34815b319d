#pragma once

#include <string>
#include <string_view>

namespace coldsap {

namespace si {
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double bohr_magneton = 9.2740100783e-24; // J/T
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
} // namespace si

enum class UnitMode { natural, rf };

std::string to_string(UnitMode mode);
UnitMode unit_mode_from_string(std::string_view text);

// Scales that convert dimensionless simulation quantities to SI. In both modes
// hbar = m = 1 inside the simulation; natural mode additionally fixes omega = 1.
struct UnitSystem {
    double length_scale = 1.0; // m
    double time_scale = 1.0;   // s
    double energy_scale = 1.0; // J
    UnitMode mode = UnitMode::natural;

    double energy_to_si(double e) const { return e * energy_scale; }
    double energy_from_si(double joules) const { return joules / energy_scale; }
    double length_to_si(double x) const { return x * length_scale; }
    double length_from_si(double meters) const { return meters / length_scale; }
    double time_to_si(double t) const { return t * time_scale; }
    double time_from_si(double seconds) const { return seconds / time_scale; }
    // Angular frequencies (rad/s) become 1/time_scale multiples.
    double rate_from_si(double rad_per_s) const { return rad_per_s * time_scale; }
    double rate_to_si(double rate) const { return rate / time_scale; }
};

struct PhysicalConstants {
    double bohr_magneton = si::bohr_magneton; // J/T
    double g_factor = -0.5;
    double field_gradient = -2.13;  // T/m  (-213 G/cm)
    double rabi_frequency = 2.0 * 3.14159265358979323846 * 500.0; // rad/s
    double atomic_mass = 1.44e-25;  // kg

    // mu * g_F * b, signed (N = J/m).
    double force() const { return bohr_magneton * g_factor * field_gradient; }
};

UnitSystem natural_units();

// x~ = (4 hbar^2 / (|mu g_F b| m))^(1/3), t~ = (16 hbar m / (mu g_F b)^2)^(1/3),
// u~ = m x~^2 / t~^2. Throws ConfigError for zero or non-finite constants.
UnitSystem build_rf_units(const PhysicalConstants& constants);

// |mu g_F b| expressed in the rf unit system. Exactly 4 for consistent input.
double rf_force_in_units(const PhysicalConstants& constants, const UnitSystem& units);

// Human readable unit labels used in table headers.
std::string energy_unit_label(UnitMode mode);
std::string length_unit_label(UnitMode mode);
std::string time_unit_label(UnitMode mode);

} // namespace coldsap
