#include "coldsap/drivers.hpp"

#include "coldsap/analysis.hpp"
#include "coldsap/continuum.hpp"
#include "coldsap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

namespace coldsap {

namespace fs = std::filesystem;

namespace {

constexpr const char* version_text = "0.1.0";

struct Context {
    const ExperimentConfig& cfg;
    const RunOptions& opts;
    RunSummary& summary;

    void table(const std::string& stem, const Table& t, const std::string& x = {}, const std::vector<std::string>& ys = {})
    {
        const std::string file = stem + ".tsv";
        write_table((fs::path(opts.out_dir) / file).string(), t, cfg.units);
        summary.manifest.artifacts.push_back(file);
        if (cfg.plot_script && !x.empty()) {
            const std::string script = "plot_" + stem + ".py";
            write_text((fs::path(opts.out_dir) / script).string(), plot_script(file, x, ys, stem));
            summary.manifest.artifacts.push_back(script);
        }
    }

    void note(const std::string& key, const std::string& value)
    {
        summary.manifest.notes[key] = value;
        summary.messages.push_back(key + ": " + value);
    }
};

std::vector<double> sweep_values(const ExperimentConfig& cfg) { return linspace(cfg.u_min, cfg.u_max, cfg.u_count); }

LiftMode lift_mode(const ExperimentConfig& cfg)
{
    return cfg.split_mode == SplitMode::keep ? LiftMode::keep_left : LiftMode::move_right;
}

void need_two_particle_continuum(const std::string& name, const ExperimentConfig& cfg)
{
    if (cfg.particles != 2)
        throw ConfigError(name + ": continuum runs need particles = 2 (got " + std::to_string(cfg.particles) + ")");
}

void run_spectrum(Context& c)
{
    const ContinuumSetup s = make_continuum_setup(c.cfg);
    const SpectrumResult r = spectrum_vs_time(s, c.cfg, c.cfg.interaction, c.cfg.spectrum_levels, c.cfg.snapshots);
    std::vector<std::string> ys;
    for (int j = 1; j <= c.cfg.spectrum_levels; ++j) ys.push_back("E" + std::to_string(j));
    c.table("spectrum", spectrum_table(r, c.cfg.units), "t", ys);
    c.note("bands_overlap", r.bands_overlap ? "true" : "false");
    c.note("triplet_top", format_double(r.triplet_top));
    c.note("next_bottom", format_double(r.next_bottom));
}

void run_fidelity_sweep(Context& c)
{
    const std::vector<double> u = sweep_values(c.cfg);
    if (c.cfg.model == ModelKind::continuum) {
        c.table("fidelity", sweep_table({fidelity_sweep(ModelKind::continuum, u, c.cfg, c.opts.jobs)}, c.cfg.units),
                "u", {"fidelity"});
        return;
    }
    const ContinuumSetup s = make_continuum_setup(c.cfg);
    const Calibration cal = obtain_calibration(s, c.cfg, c.opts.jobs);
    if (c.cfg.calibration_file.empty()) c.table("calibration", calibration_table(cal, c.cfg.units), "d", {"rate1", "rate2"});
    else c.note("calibration_file", c.cfg.calibration_file);
    c.table("fidelity", sweep_table({fidelity_sweep(ModelKind::bose_hubbard, u, c.cfg, c.opts.jobs, &cal)}, c.cfg.units),
            "u", {"fidelity"});
}

void run_separation_once(Context& c)
{
    Table t;
    const std::string e = energy_unit_label(c.cfg.units);
    if (c.cfg.model == ModelKind::bose_hubbard) {
        const ContinuumSetup s = make_continuum_setup(c.cfg);
        const Calibration cal = obtain_calibration(s, c.cfg, c.opts.jobs);
        const SweepPoint p = bh_point(make_bh_context(s, c.cfg, cal), c.cfg.interaction, c.cfg.lift_perturbation);
        t.columns = {{"u", e}, {"fidelity", "1"}, {"lift", e}, {"norm_error", "1"}};
        t.add_row({p.u, p.fidelity, p.lift, p.norm_error});
        c.note("fidelity", format_double(p.fidelity));
    } else {
        const ContinuumSetup s = make_continuum_setup(c.cfg);
        const SeparationResult r = run_separation(s, c.cfg, c.cfg.interaction, c.cfg.lift_perturbation);
        t.columns = {{"u", e},
                     {"u_measured", e},
                     {"coupling", e + "*" + length_unit_label(c.cfg.units)},
                     {"lift", e},
                     {"fidelity", "1"},
                     {"norm_error", "1"},
                     {"symmetry_defect", "1"},
                     {"min_separation", length_unit_label(c.cfg.units)},
                     {"steps", "1"}};
        t.add_row({r.interaction.u_target, r.interaction.u_measured, r.interaction.coupling, r.lift, r.fidelity,
                   r.norm_error, r.symmetry_defect, r.min_separation, double(r.steps)},
                  r.interaction.hard_core ? "hard-core" : "");
        c.note("fidelity", format_double(r.fidelity));
    }
    c.table("separation", t);
}

void run_rf_design(Context& c)
{
    const RfDesign d = rf_design(c.cfg);
    const std::string x = length_unit_label(c.cfg.units), e = energy_unit_label(c.cfg.units);
    Table m;
    m.columns = {{"trap", "1"}, {"position", x}, {"energy", e}};
    for (int i = 0; i < 3; ++i) m.add_row({double(i + 1), d.minima.position[i], d.minima.energy[i]});
    m.comments = {"spacing_12 = " + format_double(d.minima.position[1] - d.minima.position[0]),
                  "spacing_23 = " + format_double(d.minima.position[2] - d.minima.position[1])};
    c.table("rf_minima", m);
    Table j;
    j.columns = {{"position", x}, {"lower_branch", "1"}, {"jump", e}};
    for (const auto& r : d.jumps) j.add_row({r.position, double(r.lower_index), r.jump});
    c.table("rf_jumps", j);
    c.table("rf_profile_start", rf_profile_table(c.cfg, 0.0, 2001), "x", {"V"});
    c.table("rf_profile_middle", rf_profile_table(c.cfg, 0.5 * c.cfg.duration, 2001), "x", {"V"});
    c.note("left_minimum", format_double(d.minima.position[0]));
    c.note("max_jump", format_double(d.max_jump));
    c.note("max_jump_schedule", format_double(d.max_jump_schedule));
    c.note("min_separation", format_double(d.min_separation));
}

void run_robustness(Context& c)
{
    std::vector<double> dv = c.cfg.lift_perturbations;
    if (dv.empty()) dv = {0.0};
    c.table("robustness", sweep_table(robustness_sweep(dv, sweep_values(c.cfg), c.cfg, c.opts.jobs), c.cfg.units), "u",
            {"fidelity"});
}

void run_scaling(Context& c)
{
    std::vector<double> levels;
    double u_tonks = 1.0;
    if (c.cfg.units == UnitMode::rf) {
        levels = left_trap_levels(make_continuum_setup(c.cfg), std::max(2, c.cfg.scaling_levels));
        u_tonks = levels[1] - levels[0];
        levels.resize(c.cfg.scaling_levels);
    }
    const auto rows = scaling_study(c.cfg.scaling_max_particles, c.cfg.scaling_max_moved, lift_mode(c.cfg),
                                    c.cfg.scaling_levels, u_tonks, levels);
    Table t = scaling_table(rows, c.cfg.units);
    t.comments.push_back("repulsive window 0 < U <= " + format_double(u_tonks) + " (Tonks value)");
    bool decreasing = true;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= c.cfg.scaling_max_moved; ++k) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const ScalingRow& r) { return r.moved == k; });
        if (it == rows.end()) continue;
        if (k > 1 && !(it->metrics.width < last)) decreasing = false;
        last = it->metrics.width;
    }
    t.comments.push_back(std::string("delta_U decreasing with N - M: ") + (decreasing ? "yes" : "no"));
    std::vector<std::pair<int, double>> finite;
    for (const auto& r : rows)
        if (r.particles == c.cfg.scaling_max_particles && std::isfinite(r.metrics.width) && r.metrics.width > 0.0)
            finite.emplace_back(r.moved, r.metrics.width);
    if (finite.size() >= 2) {
        const auto [k0, w0] = finite.front();
        const auto [k1, w1] = finite.back();
        const double ratio = std::pow(w1 / w0, 1.0 / (k1 - k0));
        t.comments.push_back("delta_U shrinks by a factor " + format_double(ratio) +
                             " per moved particle; extrapolated delta_U at N - M = 10: " +
                             format_double(w1 * std::pow(ratio, 10 - k1)));
    }
    c.table("scaling", t);
    c.note("delta_u_decreasing", decreasing ? "true" : "false");
}

void run_calibrate(Context& c)
{
    const ContinuumSetup s = make_continuum_setup(c.cfg);
    const Calibration cal = calibrate(s, c.cfg, c.opts.jobs);
    for (const auto& p : cal.points)
        if (!p.note.empty()) c.summary.messages.push_back("warning: skipped at d = " + format_double(p.d) + ": " + p.note);
    c.table("calibration", calibration_table(cal, c.cfg.units), "d", {"rate1", "rate2"});
    c.note("rate1_fit", format_double(cal.single.amplitude) + " exp(-" + format_double(cal.single.decay) + " d)");
    c.note("rate2_fit", format_double(cal.pair.amplitude) + " exp(-" + format_double(cal.pair.decay) + " d)");
}

const std::vector<std::pair<std::string, std::function<void(Context&)>>>& table_of_drivers()
{
    static const std::vector<std::pair<std::string, std::function<void(Context&)>>> drivers = {
        {"spectrum", run_spectrum},       {"fidelity-sweep", run_fidelity_sweep}, {"separation", run_separation_once},
        {"rf-design", run_rf_design},     {"robustness", run_robustness},         {"scaling", run_scaling},
        {"calibrate", run_calibrate},
    };
    return drivers;
}

} // namespace

const std::vector<std::string>& subcommand_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& d : table_of_drivers()) out.push_back(d.first);
        return out;
    }();
    return names;
}

void check_subcommand(const std::string& name, const ExperimentConfig& cfg)
{
    const auto& names = subcommand_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ContractError("unknown subcommand '" + name + "'");
    const ValidationReport report = validate_config(cfg);
    if (!report.ok()) throw ConfigError(report.describe());
    const bool continuum = cfg.model == ModelKind::continuum;
    if (name == "spectrum" || name == "robustness" || ((name == "separation" || name == "fidelity-sweep") && continuum))
        need_two_particle_continuum(name, cfg);
    if (name == "rf-design" && cfg.potential != PotentialKind::rf)
        throw ConfigError("rf-design: potential must be rf");
    if (name == "fidelity-sweep" && cfg.u_count < 1) throw ConfigError("u_count: must be positive");
}

RunSummary run_subcommand(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opts)
{
    check_subcommand(name, cfg);
    if (opts.jobs < 1) throw ContractError("jobs must be at least 1");
    RunSummary summary;
    RunManifest& m = summary.manifest;
    m.subcommand = name;
    m.config_hash = config_hash(cfg);
    m.canonical_config = canonical_text(cfg);
    m.units = to_string(cfg.units);
    m.version = version_text;
    if (opts.dry_run) {
        summary.messages.push_back("configuration valid for " + name + " (hash " + m.config_hash + ")");
        return summary;
    }
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + opts.out_dir + "': " + ec.message());
    m.started = utc_timestamp();
    Context c{cfg, opts, summary};
    for (const auto& d : table_of_drivers())
        if (d.first == name) d.second(c);
    write_text((fs::path(opts.out_dir) / "config.cfg").string(), m.canonical_config);
    m.artifacts.push_back("config.cfg");
    m.finished = utc_timestamp();
    write_manifest((fs::path(opts.out_dir) / "manifest.json").string(), m);
    return summary;
}

std::pair<ExperimentConfig, std::string> config_from_manifest(const std::string& path)
{
    const RunManifest m = read_manifest(path);
    ExperimentConfig cfg = parse_config(m.canonical_config);
    const ValidationReport report = validate_config(cfg);
    if (!report.ok()) throw ConfigError(report.describe());
    if (config_hash(cfg) != m.config_hash)
        throw ConfigError("manifest '" + path + "': stored hash does not match the stored configuration");
    return {cfg, m.subcommand};
}

} // namespace coldsap
