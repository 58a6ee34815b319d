#include "coldsap/config.hpp"

#include "coldsap/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

extern char** environ;

namespace coldsap {

namespace {

constexpr double two_pi = 6.283185307179586476925;

enum class Dim { count, text, flag, ratio, length, time, energy, energy_list, rate, gradient, mass, moment };

bool needs_unit(Dim d)
{
    switch (d) {
    case Dim::length:
    case Dim::time:
    case Dim::energy:
    case Dim::energy_list:
    case Dim::rate:
    case Dim::gradient:
    case Dim::mass:
    case Dim::moment:
        return true;
    default:
        return false;
    }
}

struct RawEntry {
    std::string value;
    std::string unit;
    int line = 0;
};

struct KeySpec {
    const char* name;
    Dim dim;
};

// Every accepted key. Order here is irrelevant; canonical output is sorted.
const KeySpec key_specs[] = {
    {"units", Dim::text},
    {"potential", Dim::text},
    {"model", Dim::text},
    {"bohr_magneton", Dim::moment},
    {"g_factor", Dim::ratio},
    {"field_gradient", Dim::gradient},
    {"rabi_frequency", Dim::rate},
    {"atomic_mass", Dim::mass},
    {"particles", Dim::count},
    {"target_split", Dim::text},
    {"split_mode", Dim::text},
    {"interaction", Dim::energy},
    {"duration", Dim::time},
    {"delay", Dim::time},
    {"d_max", Dim::length},
    {"d_min", Dim::length},
    {"left_trap_position", Dim::length},
    {"grid_spacing", Dim::length},
    {"grid_padding", Dim::length},
    {"time_step", Dim::time},
    {"lift_perturbation", Dim::energy},
    {"lift_perturbations", Dim::energy_list},
    {"levels", Dim::count},
    {"kappa", Dim::ratio},
    {"u_min", Dim::energy},
    {"u_max", Dim::energy},
    {"u_count", Dim::count},
    {"snapshots", Dim::count},
    {"spectrum_levels", Dim::count},
    {"calibration_d_min", Dim::length},
    {"calibration_d_max", Dim::length},
    {"calibration_count", Dim::count},
    {"calibration_interaction", Dim::energy},
    {"calibration_file", Dim::text},
    {"scaling_max_particles", Dim::count},
    {"scaling_max_moved", Dim::count},
    {"scaling_levels", Dim::count},
    {"plot_script", Dim::flag},
    {"output_name", Dim::text},
};

const KeySpec* find_key(const std::string& name)
{
    for (const auto& k : key_specs)
        if (name == k.name) return &k;
    return nullptr;
}

std::string trim(std::string_view s)
{
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

double parse_number(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        throw ConfigError(key + ": expected a finite number, got '" + t + "'");
    return v;
}

long parse_integer(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key + ": expected an integer, got '" + t + "'");
    return v;
}

bool parse_flag(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ConfigError(key + ": expected true/false, got '" + t + "'");
}

// Splits "value unit" for dimensional keys; the unit is the last token.
RawEntry split_value(const std::string& key, const std::string& rest, Dim dim, int line)
{
    RawEntry e;
    e.line = line;
    const std::string t = trim(rest);
    if (!needs_unit(dim)) {
        e.value = t;
        return e;
    }
    const auto pos = t.find_last_of(" \t");
    if (pos == std::string::npos)
        throw ConfigError(key + ": missing unit annotation (line " + std::to_string(line) + ")");
    e.value = trim(t.substr(0, pos));
    e.unit = trim(t.substr(pos + 1));
    return e;
}

double mode_scaled(const std::string& key, double v, const std::string& unit, UnitMode mode,
                   double si_scale, std::initializer_list<std::pair<const char*, double>> si_units)
{
    if (unit == "natural" || unit == "rf") {
        if (unit != to_string(mode))
            throw ConfigError(key + ": unit '" + unit + "' does not match units = " + to_string(mode));
        return v;
    }
    for (const auto& [name, factor] : si_units) {
        if (unit == name) {
            if (mode == UnitMode::natural)
                throw ConfigError(key + ": SI unit '" + unit + "' cannot be used with natural units");
            return v * factor / si_scale;
        }
    }
    throw ConfigError(key + ": unknown unit '" + unit + "'");
}

double convert(const std::string& key, Dim dim, double v, const std::string& unit, UnitMode mode,
               const UnitSystem& us)
{
    switch (dim) {
    case Dim::length:
        return mode_scaled(key, v, unit, mode, us.length_scale, {{"m", 1.0}, {"um", 1e-6}, {"nm", 1e-9}});
    case Dim::time:
        return mode_scaled(key, v, unit, mode, us.time_scale, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}});
    case Dim::energy:
    case Dim::energy_list:
        return mode_scaled(key, v, unit, mode, us.energy_scale, {{"J", 1.0}});
    case Dim::rate:
        if (unit == "rad/s") return v;
        if (unit == "Hz") return v * two_pi;
        if (unit == "kHz") return v * two_pi * 1e3;
        throw ConfigError(key + ": unknown rate unit '" + unit + "' (rad/s, Hz, kHz)");
    case Dim::gradient:
        if (unit == "T/m") return v;
        if (unit == "G/cm") return v * 1e-2;
        throw ConfigError(key + ": unknown gradient unit '" + unit + "' (T/m, G/cm)");
    case Dim::mass:
        if (unit == "kg") return v;
        if (unit == "amu") return v * si::atomic_mass_unit;
        throw ConfigError(key + ": unknown mass unit '" + unit + "' (kg, amu)");
    case Dim::moment:
        if (unit == "J/T" || unit == "A*m^2") return v;
        throw ConfigError(key + ": unknown magnetic moment unit '" + unit + "' (J/T)");
    default:
        return v;
    }
}

void apply_mode_defaults(ExperimentConfig& c)
{
    if (c.units == UnitMode::natural) {
        c.potential = PotentialKind::harmonic;
        return; // struct defaults are the natural-unit defaults
    }
    c.potential = PotentialKind::rf;
    c.interaction = 0.8;
    c.duration = 16000.0;
    c.d_max = 9.0;
    c.d_min = 6.0;
    c.left_trap_position = 20.0;
    c.grid_spacing = 0.1;
    c.grid_padding = 6.0;
    c.time_step = 0.1;
    c.u_min = 0.2;
    c.u_max = 1.4;
    c.u_count = 7;
    c.calibration_d_min = 2.0;
    c.calibration_d_max = 7.0;
    c.calibration_count = 21;
    c.calibration_interaction = 0.8;
}

std::string fmt17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

std::string upper(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::toupper(ch); });
    return s;
}

} // namespace

std::string to_string(PotentialKind kind)
{
    return kind == PotentialKind::harmonic ? "harmonic" : "rf";
}

std::string to_string(ModelKind kind)
{
    return kind == ModelKind::continuum ? "continuum" : "bose_hubbard";
}

std::string to_string(SplitMode mode)
{
    return mode == SplitMode::keep ? "keep" : "move";
}

UnitSystem ExperimentConfig::unit_system() const
{
    return units == UnitMode::natural ? natural_units() : build_rf_units(constants);
}

std::string ValidationReport::describe() const
{
    std::string out;
    for (const auto& i : issues) {
        if (!out.empty()) out += "\n";
        out += i.field + ": " + i.message;
    }
    return out;
}

Environment process_environment()
{
    Environment env;
    for (char** p = environ; p && *p; ++p) {
        std::string_view kv(*p);
        if (kv.rfind("COLDSAP_", 0) != 0) continue;
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
    }
    return env;
}

ExperimentConfig parse_config(const std::string& text, const Environment& env)
{
    std::map<std::string, RawEntry> raw;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = lower(trim(t.substr(0, eq)));
        const KeySpec* spec = find_key(key);
        if (!spec) throw ConfigError(key + ": unknown key (line " + std::to_string(lineno) + ")");
        if (raw.count(key)) throw ConfigError(key + ": duplicate key (line " + std::to_string(lineno) + ")");
        raw[key] = split_value(key, t.substr(eq + 1), spec->dim, lineno);
    }
    for (const auto& spec : key_specs) {
        const auto it = env.find("COLDSAP_" + upper(spec.name));
        if (it != env.end()) raw[spec.name] = split_value(spec.name, it->second, spec.dim, 0);
    }

    ExperimentConfig c;
    if (auto it = raw.find("units"); it != raw.end()) c.units = unit_mode_from_string(it->second.value);
    apply_mode_defaults(c);

    auto number = [&](const char* key) -> std::optional<double> {
        auto it = raw.find(key);
        if (it == raw.end()) return std::nullopt;
        return parse_number(key, it->second.value);
    };
    auto si_constant = [&](const char* key, Dim dim, double& field) {
        if (auto v = number(key)) field = convert(key, dim, *v, raw[key].unit, c.units, UnitSystem{});
    };
    si_constant("bohr_magneton", Dim::moment, c.constants.bohr_magneton);
    si_constant("field_gradient", Dim::gradient, c.constants.field_gradient);
    si_constant("rabi_frequency", Dim::rate, c.constants.rabi_frequency);
    si_constant("atomic_mass", Dim::mass, c.constants.atomic_mass);
    if (auto v = number("g_factor")) c.constants.g_factor = *v;

    const UnitSystem us = c.unit_system();

    bool delay_given = false;
    for (const auto& [key, entry] : raw) {
        const KeySpec* spec = find_key(key);
        const Dim dim = spec->dim;
        const std::string& v = entry.value;
        if (key == "units" || key == "bohr_magneton" || key == "field_gradient" || key == "rabi_frequency" ||
            key == "atomic_mass" || key == "g_factor")
            continue;

        if (key == "potential") {
            if (v == "harmonic") c.potential = PotentialKind::harmonic;
            else if (v == "rf") c.potential = PotentialKind::rf;
            else throw ConfigError("potential: expected 'harmonic' or 'rf', got '" + v + "'");
        } else if (key == "model") {
            if (v == "continuum") c.model = ModelKind::continuum;
            else if (v == "bose_hubbard") c.model = ModelKind::bose_hubbard;
            else throw ConfigError("model: expected 'continuum' or 'bose_hubbard', got '" + v + "'");
        } else if (key == "split_mode") {
            if (v == "keep") c.split_mode = SplitMode::keep;
            else if (v == "move") c.split_mode = SplitMode::move;
            else throw ConfigError("split_mode: expected 'keep' or 'move', got '" + v + "'");
        } else if (key == "target_split") {
            if (v == "none") c.target_split.reset();
            else c.target_split = static_cast<int>(parse_integer(key, v));
        } else if (key == "calibration_file") {
            c.calibration_file = v;
        } else if (key == "output_name") {
            c.output_name = v;
        } else if (key == "plot_script") {
            c.plot_script = parse_flag(key, v);
        } else if (dim == Dim::count) {
            const long n = parse_integer(key, v);
            int* target = nullptr;
            if (key == "particles") target = &c.particles;
            else if (key == "levels") target = &c.levels;
            else if (key == "u_count") target = &c.u_count;
            else if (key == "snapshots") target = &c.snapshots;
            else if (key == "spectrum_levels") target = &c.spectrum_levels;
            else if (key == "calibration_count") target = &c.calibration_count;
            else if (key == "scaling_max_particles") target = &c.scaling_max_particles;
            else if (key == "scaling_max_moved") target = &c.scaling_max_moved;
            else if (key == "scaling_levels") target = &c.scaling_levels;
            *target = static_cast<int>(n);
        } else if (dim == Dim::energy_list) {
            c.lift_perturbations.clear();
            std::stringstream items(v);
            std::string item;
            while (std::getline(items, item, ','))
                c.lift_perturbations.push_back(convert(key, dim, parse_number(key, item), entry.unit, c.units, us));
        } else {
            const double x = convert(key, dim, parse_number(key, v), entry.unit, c.units, us);
            if (key == "interaction") c.interaction = x;
            else if (key == "duration") c.duration = x;
            else if (key == "delay") { c.delay = x; delay_given = true; }
            else if (key == "d_max") c.d_max = x;
            else if (key == "d_min") c.d_min = x;
            else if (key == "left_trap_position") c.left_trap_position = x;
            else if (key == "grid_spacing") c.grid_spacing = x;
            else if (key == "grid_padding") c.grid_padding = x;
            else if (key == "time_step") c.time_step = x;
            else if (key == "lift_perturbation") c.lift_perturbation = x;
            else if (key == "kappa") c.kappa = x;
            else if (key == "u_min") c.u_min = x;
            else if (key == "u_max") c.u_max = x;
            else if (key == "calibration_d_min") c.calibration_d_min = x;
            else if (key == "calibration_d_max") c.calibration_d_max = x;
            else if (key == "calibration_interaction") c.calibration_interaction = x;
        }
    }
    if (!delay_given) c.delay = c.duration / 8.0;
    if (c.lift_perturbations.empty()) c.lift_perturbations = {c.lift_perturbation};
    return c;
}

ValidationReport validate_config(const ExperimentConfig& c)
{
    ValidationReport r;
    auto fail = [&](const char* field, const std::string& msg) { r.issues.push_back({field, msg}); };

    if (c.units == UnitMode::rf && c.potential != PotentialKind::rf)
        fail("potential", "the truncated harmonic trap is defined in natural units only");
    if (c.units == UnitMode::natural && c.potential != PotentialKind::harmonic)
        fail("potential", "the rf potential requires units = rf");
    if (c.particles < 1) fail("particles", "must be at least 1");
    if (c.target_split) {
        const int m = *c.target_split;
        if (m == c.particles) fail("target_split", "target split must leave both traps occupied (M = N)");
        else if (m <= 0 || m > c.particles) fail("target_split", "must satisfy 0 < M < N");
    }
    if (!(c.duration > 0.0)) fail("duration", "process duration T must be positive");
    if (c.delay < 0.0) fail("delay", "movement delay must be non-negative");
    else if (c.duration > 0.0 && !(c.delay < c.duration / 2.0)) fail("delay", "movement delay must be below T/2");
    if (!(c.grid_spacing > 0.0)) fail("grid_spacing", "grid spacing must be positive");
    if (!(c.grid_padding > 0.0)) fail("grid_padding", "grid padding must be positive");
    if (!(c.time_step > 0.0)) fail("time_step", "time step must be positive");
    else if (c.duration > 0.0 && c.time_step > c.duration) fail("time_step", "time step exceeds the duration");
    if (!(c.d_min > 0.0)) fail("d_min", "minimum separation must be positive");
    if (!(c.d_max > c.d_min)) fail("d_max", "maximum separation must exceed d_min");
    if (c.levels < 1) fail("levels", "at least one level per trap is required");
    if (c.kappa < 0.0) fail("kappa", "three-body rate ratio must be non-negative");
    if (c.u_count < 1) fail("u_count", "at least one sweep point is required");
    if (c.u_min > c.u_max) fail("u_min", "sweep lower bound exceeds upper bound");
    if (c.snapshots < 2) fail("snapshots", "at least two snapshots are required");
    if (c.spectrum_levels < 1) fail("spectrum_levels", "must be at least 1");
    if (c.calibration_count < 2) fail("calibration_count", "at least two calibration distances are required");
    if (!(c.calibration_d_min > 0.0) || !(c.calibration_d_max > c.calibration_d_min))
        fail("calibration_d_min", "calibration range must satisfy 0 < d_min < d_max");
    if (c.scaling_max_particles < 2) fail("scaling_max_particles", "must be at least 2");
    if (c.scaling_max_moved < 1 || c.scaling_max_moved >= c.scaling_max_particles)
        fail("scaling_max_moved", "must satisfy 1 <= moved < max particles");
    if (c.scaling_levels < 1) fail("scaling_levels", "must be at least 1");
    if (c.units == UnitMode::rf) {
        if (c.left_trap_position <= 0.0) fail("left_trap_position", "must be positive");
        try {
            (void)build_rf_units(c.constants);
        } catch (const ConfigError& e) {
            fail("field_gradient", e.what());
        }
    }
    if (c.output_name.empty() || c.output_name.find('/') != std::string::npos)
        fail("output_name", "must be a plain file stem");
    return r;
}

ExperimentConfig load_config(const std::string& path, const Environment& env)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config(ss.str(), env);
    const ValidationReport report = validate_config(cfg);
    if (!report.ok()) throw ConfigError(report.describe());
    return cfg;
}

std::string canonical_text(const ExperimentConfig& c)
{
    const std::string u = to_string(c.units);
    std::map<std::string, std::string> kv;
    kv["units"] = u;
    kv["potential"] = to_string(c.potential);
    kv["model"] = to_string(c.model);
    if (c.units == UnitMode::rf) {
        kv["bohr_magneton"] = fmt17(c.constants.bohr_magneton) + " J/T";
        kv["g_factor"] = fmt17(c.constants.g_factor);
        kv["field_gradient"] = fmt17(c.constants.field_gradient) + " T/m";
        kv["rabi_frequency"] = fmt17(c.constants.rabi_frequency) + " rad/s";
        kv["atomic_mass"] = fmt17(c.constants.atomic_mass) + " kg";
        kv["left_trap_position"] = fmt17(c.left_trap_position) + " " + u;
    }
    kv["particles"] = std::to_string(c.particles);
    kv["target_split"] = c.target_split ? std::to_string(*c.target_split) : "none";
    kv["split_mode"] = to_string(c.split_mode);
    kv["interaction"] = fmt17(c.interaction) + " " + u;
    kv["duration"] = fmt17(c.duration) + " " + u;
    kv["delay"] = fmt17(c.delay) + " " + u;
    kv["d_max"] = fmt17(c.d_max) + " " + u;
    kv["d_min"] = fmt17(c.d_min) + " " + u;
    kv["grid_spacing"] = fmt17(c.grid_spacing) + " " + u;
    kv["grid_padding"] = fmt17(c.grid_padding) + " " + u;
    kv["time_step"] = fmt17(c.time_step) + " " + u;
    kv["lift_perturbation"] = fmt17(c.lift_perturbation) + " " + u;
    std::string list;
    for (size_t i = 0; i < c.lift_perturbations.size(); ++i)
        list += (i ? ", " : "") + fmt17(c.lift_perturbations[i]);
    kv["lift_perturbations"] = list + " " + u;
    kv["levels"] = std::to_string(c.levels);
    kv["kappa"] = fmt17(c.kappa);
    kv["u_min"] = fmt17(c.u_min) + " " + u;
    kv["u_max"] = fmt17(c.u_max) + " " + u;
    kv["u_count"] = std::to_string(c.u_count);
    kv["snapshots"] = std::to_string(c.snapshots);
    kv["spectrum_levels"] = std::to_string(c.spectrum_levels);
    kv["calibration_d_min"] = fmt17(c.calibration_d_min) + " " + u;
    kv["calibration_d_max"] = fmt17(c.calibration_d_max) + " " + u;
    kv["calibration_count"] = std::to_string(c.calibration_count);
    kv["calibration_interaction"] = fmt17(c.calibration_interaction) + " " + u;
    if (!c.calibration_file.empty()) kv["calibration_file"] = c.calibration_file;
    kv["scaling_max_particles"] = std::to_string(c.scaling_max_particles);
    kv["scaling_max_moved"] = std::to_string(c.scaling_max_moved);
    kv["scaling_levels"] = std::to_string(c.scaling_levels);
    kv["plot_script"] = c.plot_script ? "true" : "false";
    kv["output_name"] = c.output_name;

    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::string sha256_hex(const std::string& data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256: digest computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string config_hash(const ExperimentConfig& cfg)
{
    return sha256_hex(canonical_text(cfg));
}

} // namespace coldsap
