#pragma once

#include "coldsap/units.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coldsap {

enum class PotentialKind { harmonic, rf };
enum class ModelKind { continuum, bose_hubbard };
enum class SplitMode { keep, move };

// A validated run description. Dimensional fields are stored in the
// simulation unit system selected by `units` (hbar = m = 1 in both modes).
struct ExperimentConfig {
    UnitMode units = UnitMode::natural;
    PotentialKind potential = PotentialKind::harmonic;
    ModelKind model = ModelKind::continuum;
    PhysicalConstants constants;

    int particles = 2;
    std::optional<int> target_split = 1;
    SplitMode split_mode = SplitMode::keep;
    double interaction = 0.4;

    double duration = 4000.0;
    double delay = 500.0;
    double d_max = 8.0;
    double d_min = 3.2;
    double left_trap_position = 20.0; // rf only
    double grid_spacing = 0.1;
    double grid_padding = 6.0;
    double time_step = 0.1;
    double lift_perturbation = 0.0;
    std::vector<double> lift_perturbations;

    int levels = 2;
    double kappa = 1.0;

    double u_min = -0.5;
    double u_max = 1.0;
    int u_count = 31;

    int snapshots = 60;
    int spectrum_levels = 6;

    double calibration_d_min = 2.5;
    double calibration_d_max = 8.0;
    int calibration_count = 23;
    double calibration_interaction = 0.4;
    std::string calibration_file;

    int scaling_max_particles = 6;
    int scaling_max_moved = 4;
    int scaling_levels = 3;

    bool plot_script = true;
    std::string output_name = "run";

    UnitSystem unit_system() const;
};

struct FieldIssue {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<FieldIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string describe() const;
};

using Environment = std::map<std::string, std::string>;

// Snapshot of every COLDSAP_* variable in the process environment.
Environment process_environment();

// Parses `key = value [unit]` lines. Unknown keys, malformed numbers and
// missing or foreign unit annotations raise ConfigError naming the key.
// Variables COLDSAP_<KEY> in `env` override file values.
ExperimentConfig parse_config(const std::string& text, const Environment& env = {});

ValidationReport validate_config(const ExperimentConfig& cfg);

// Reads, parses and validates; throws ConfigError listing every violated field.
ExperimentConfig load_config(const std::string& path, const Environment& env);

// Deterministic text form: one line per key, sorted, 17 significant digits,
// dimensional values annotated with the run's unit token.
std::string canonical_text(const ExperimentConfig& cfg);

// Lower-case hex SHA-256 of canonical_text.
std::string config_hash(const ExperimentConfig& cfg);

std::string sha256_hex(const std::string& data);

std::string to_string(PotentialKind kind);
std::string to_string(ModelKind kind);
std::string to_string(SplitMode mode);

} // namespace coldsap
