#include "coldsap/analysis.hpp"

#include "coldsap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace coldsap {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string energy_unit(UnitMode u) { return energy_unit_label(u); }

std::string coupling_unit(UnitMode u) { return energy_unit_label(u) + "*" + length_unit_label(u); }

} // namespace

std::vector<double> linspace(double lo, double hi, int count)
{
    if (count < 1) throw ContractError("linspace: need at least one point");
    if (count == 1) return {lo};
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k) out[k] = lo + (hi - lo) * k / (count - 1);
    out.back() = hi;
    return out;
}

ExpFit fit_exponential(const std::vector<double>& d, const std::vector<std::optional<double>>& rate)
{
    if (d.size() != rate.size()) throw ContractError("exponential fit: length mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    // Past some separation the splitting is set by the residual well asymmetry
    // instead of tunnelling; the fit stops once the rates no longer fall.
    double last = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < d.size(); ++k) {
        if (!rate[k] || !(*rate[k] >= 1e-8) || !std::isfinite(*rate[k])) continue;
        if (*rate[k] > 0.8 * last) break;
        last = *rate[k];
        const double y = std::log(*rate[k]);
        sx += d[k];
        sy += y;
        sxx += d[k] * d[k];
        sxy += d[k] * y;
        ++n;
    }
    if (n < 2) throw NumericalError("exponential fit: fewer than two usable rates (>= 1e-8)");
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) throw NumericalError("exponential fit: separations are degenerate");
    const double slope = (n * sxy - sx * sy) / den;
    const double icpt = (sy - slope * sx) / n;
    return ExpFit{std::exp(icpt), -slope, n};
}

Calibration calibrate(const ContinuumSetup& s, const ExperimentConfig& cfg, int jobs)
{
    Calibration c;
    const double u = cfg.calibration_interaction;
    if (s.mode == UnitMode::natural) c.coupling = u >= 1.0 ? 1e3 : busch_g_from_energy(1.0 + u);
    else {
        const InteractionPoint ip = interaction_for(s, u);
        c.coupling = ip.hard_core ? 1e3 : ip.coupling;
    }
    const std::vector<double> ds = linspace(cfg.calibration_d_min, cfg.calibration_d_max, cfg.calibration_count);
    c.points = parallel_map(ds.size(), jobs, [&](size_t k) {
        TunnelingPoint p;
        p.d = ds[k];
        const PairWells w = calibration_wells(s, cfg, p.d);
        try {
            p.rate1 = calibrate_tunneling(w, 1, 0.0);
        } catch (const NumericalError& e) {
            p.note += std::string("p=1: ") + e.what() + "; ";
        }
        try {
            p.rate2 = calibrate_tunneling(w, 2, c.coupling);
        } catch (const NumericalError& e) {
            p.note += std::string("p=2: ") + e.what() + "; ";
        }
        return p;
    });
    std::vector<double> d;
    std::vector<std::optional<double>> r1, r2;
    for (const auto& p : c.points) {
        d.push_back(p.d);
        r1.push_back(p.rate1);
        r2.push_back(p.rate2);
    }
    c.single = fit_exponential(d, r1);
    c.pair = fit_exponential(d, r2);
    return c;
}

Table calibration_table(const Calibration& c, UnitMode units)
{
    Table t;
    t.columns = {{"d", length_unit_label(units)}, {"rate1", energy_unit(units)}, {"rate2", energy_unit(units)}};
    std::ostringstream f1, f2;
    f1 << "fit rate1: A = " << format_double(c.single.amplitude) << " beta = " << format_double(c.single.decay)
       << " points = " << c.single.points;
    f2 << "fit rate2: A = " << format_double(c.pair.amplitude) << " beta = " << format_double(c.pair.decay)
       << " points = " << c.pair.points;
    t.comments = {f1.str(), f2.str(), "pair coupling g = " + format_double(c.coupling)};
    for (const auto& p : c.points) {
        t.add_row({p.d, p.rate1.value_or(nan_v), p.rate2.value_or(nan_v)}, p.note);
        if (!p.note.empty()) t.comments.push_back("skipped at d = " + format_double(p.d) + ": " + p.note);
    }
    return t;
}

Calibration calibration_from_table(const Table& t)
{
    Calibration c;
    const auto d = t.column("d");
    const auto a = t.column("rate1");
    const auto b = t.column("rate2");
    std::vector<std::optional<double>> r1, r2;
    for (size_t k = 0; k < d.size(); ++k) {
        TunnelingPoint p;
        p.d = d[k];
        if (std::isfinite(a[k])) p.rate1 = a[k];
        if (std::isfinite(b[k])) p.rate2 = b[k];
        r1.push_back(p.rate1);
        r2.push_back(p.rate2);
        c.points.push_back(p);
    }
    for (const auto& line : t.comments)
        if (line.rfind("pair coupling g = ", 0) == 0) c.coupling = std::strtod(line.c_str() + 18, nullptr);
    c.single = fit_exponential(d, r1);
    c.pair = fit_exponential(d, r2);
    return c;
}

Calibration obtain_calibration(const ContinuumSetup& s, const ExperimentConfig& cfg, int jobs)
{
    if (!cfg.calibration_file.empty()) return calibration_from_table(read_table(cfg.calibration_file));
    return calibrate(s, cfg, jobs);
}

RateSchedule rate_schedule(const Calibration& c, const PotentialModel& m, double kappa)
{
    const ExpFit f1 = c.single, f2 = c.pair;
    return [f1, f2, m, kappa](double t) {
        const auto [d12, d23] = m.separations(t);
        TunnelingRates r;
        r.single = {f1(d12), f1(d23)};
        r.pair = {f2(d12), f2(d23)};
        r.kappa = kappa;
        return r;
    };
}

std::vector<double> FidelitySweep::u() const
{
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.u);
    return out;
}

std::vector<double> FidelitySweep::fidelity() const
{
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.fidelity);
    return out;
}

namespace {

int target_m(const ExperimentConfig& cfg)
{
    if (!cfg.target_split) throw ContractError("sweep: a target split M is required");
    return *cfg.target_split;
}

LiftMode lift_mode(const ExperimentConfig& cfg)
{
    return cfg.split_mode == SplitMode::keep ? LiftMode::keep_left : LiftMode::move_right;
}

} // namespace

std::vector<double> left_trap_levels(const ContinuumSetup& s, int levels)
{
    std::vector<double> v;
    s.model.sample(s.grid.points(), 0.0, v);
    const SpatialGrid sub = s.grid.sub(s.left.first, s.left.second);
    const Eigenpairs lv = single_particle_levels(
        sub, std::vector<double>(v.begin() + s.left.first, v.begin() + s.left.second + 1), levels);
    return std::vector<double>(lv.values.data(), lv.values.data() + levels);
}

BHContext make_bh_context(const ContinuumSetup& s, const ExperimentConfig& cfg, const Calibration& c)
{
    BHContext ctx{enumerate_fock_basis(cfg.particles, cfg.levels),
                  sap_triplet(cfg.particles, target_m(cfg), lift_mode(cfg), cfg.levels),
                  BHParameters{},
                  rate_schedule(c, s.model, cfg.kappa),
                  cfg.duration,
                  cfg.time_step};
    ctx.base.levels = cfg.levels;
    if (s.mode == UnitMode::rf) ctx.base.level_energies = left_trap_levels(s, cfg.levels);
    return ctx;
}

SweepPoint bh_point(const BHContext& ctx, double u, double lift_perturbation)
{
    SweepPoint pt;
    pt.u = u;
    BHParameters p = ctx.base;
    p.interaction = u;
    for (int i = 0; i < 3; ++i)
        p.lifts[i] = ctx.triplet.lift_multiples[i] * u + (ctx.triplet.lift_multiples[i] != 0.0 ? lift_perturbation : 0.0);
    pt.lift = p.lifts[1];
    pt.coupling = nan_v;
    const BHEvolution e =
        bh_propagate(ctx.basis, p, ctx.triplet.initial, ctx.triplet.target, ctx.rates, ctx.duration, ctx.dt);
    pt.fidelity = e.fidelity;
    pt.norm_error = e.norm_error;
    return pt;
}

FidelitySweep fidelity_sweep(ModelKind model, const std::vector<double>& u_values, const ExperimentConfig& cfg,
                             int jobs, const Calibration* calibration)
{
    for (size_t k = 1; k < u_values.size(); ++k)
        if (!(u_values[k] > u_values[k - 1])) throw ContractError("sweep: U values must increase strictly");
    const ContinuumSetup s = make_continuum_setup(cfg);
    FidelitySweep out;
    out.model = model;
    out.lift_perturbation = cfg.lift_perturbation;
    if (model == ModelKind::continuum) {
        if (cfg.particles != 2) throw ContractError("continuum sweeps are limited to N = 2");
        out.points = parallel_map(u_values.size(), jobs, [&](size_t k) {
            SweepPoint pt;
            pt.u = u_values[k];
            try {
                const SeparationResult r = run_separation(s, cfg, pt.u, cfg.lift_perturbation);
                pt.fidelity = r.fidelity;
                pt.lift = r.lift;
                pt.coupling = r.interaction.coupling;
                pt.norm_error = r.norm_error;
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::config || e.kind() == ErrorKind::io) throw;
                pt.note = e.what();
            }
            return pt;
        });
        return out;
    }
    const Calibration c = calibration ? *calibration : obtain_calibration(s, cfg, jobs);
    const BHContext ctx = make_bh_context(s, cfg, c);
    out.points = parallel_map(u_values.size(), jobs, [&](size_t k) {
        try {
            return bh_point(ctx, u_values[k], cfg.lift_perturbation);
        } catch (const NumericalError& e) {
            SweepPoint pt;
            pt.u = u_values[k];
            pt.note = e.what();
            return pt;
        }
    });
    return out;
}

Table sweep_table(const std::vector<FidelitySweep>& sweeps, UnitMode units)
{
    Table t;
    const std::string e = energy_unit(units);
    t.columns = {{"lift_perturbation", e}, {"u", e},         {"fidelity", "1"},
                 {"lift", e},              {"coupling", coupling_unit(units)}, {"norm_error", "1"}};
    for (const auto& s : sweeps) {
        t.comments.push_back(std::string("model: ") + to_string(s.model) +
                             ", lift_perturbation = " + format_double(s.lift_perturbation));
        for (const auto& p : s.points)
            t.add_row({s.lift_perturbation, p.u, p.fidelity, p.lift, p.coupling, p.norm_error}, p.note);
    }
    return t;
}

std::vector<FidelitySweep> robustness_sweep(const std::vector<double>& perturbations,
                                            const std::vector<double>& u_values, const ExperimentConfig& cfg,
                                            int jobs)
{
    if (cfg.particles != 2) throw ContractError("robustness sweeps need N = 2");
    std::vector<FidelitySweep> out;
    for (double dv : perturbations) {
        ExperimentConfig c = cfg;
        c.lift_perturbation = dv;
        out.push_back(fidelity_sweep(ModelKind::continuum, u_values, c, jobs));
    }
    return out;
}

Table spectrum_table(const SpectrumResult& r, UnitMode units)
{
    Table t;
    const std::string e = energy_unit(units);
    t.columns.push_back({"t", time_unit_label(units)});
    const size_t k = r.snapshots.empty() ? 0 : static_cast<size_t>(r.snapshots.front().energies.size());
    for (size_t j = 0; j < k; ++j) t.columns.push_back({"E" + std::to_string(j + 1), e});
    t.columns.push_back({"dark_level", "1"});
    t.columns.push_back({"dark_overlap", "1"});
    t.comments.push_back("u = " + format_double(r.interaction.u_target) + ", u_measured = " +
                         format_double(r.interaction.u_measured));
    t.comments.push_back(std::string("bands_overlap = ") + (r.bands_overlap ? "true" : "false") +
                         ", triplet_top = " + format_double(r.triplet_top) +
                         ", next_bottom = " + format_double(r.next_bottom));
    for (const auto& s : r.snapshots) {
        std::vector<double> row{s.t};
        for (Eigen::Index j = 0; j < s.energies.size(); ++j) row.push_back(s.energies[j]);
        row.push_back(s.dark_index + 1);
        row.push_back(s.dark_overlap);
        t.add_row(std::move(row));
    }
    return t;
}

std::vector<double> detect_crossings(const std::vector<double>& u, const std::vector<std::vector<double>>& bands,
                                     const std::vector<double>& triplet)
{
    if (triplet.size() != u.size()) throw ContractError("crossings: triplet length mismatch");
    std::vector<double> roots;
    for (const auto& b : bands) {
        if (b.size() != u.size()) throw ContractError("crossings: band length mismatch");
        std::vector<double> d(u.size());
        double scale = 0.0;
        for (size_t k = 0; k < u.size(); ++k) {
            d[k] = b[k] - triplet[k];
            scale = std::max({scale, std::abs(b[k]), std::abs(triplet[k])});
        }
        const double zero = 1e-12 * std::max(1.0, scale);
        auto is_zero = [&](size_t k) { return std::abs(d[k]) <= zero; };
        for (size_t k = 0; k < u.size(); ++k) {
            if (is_zero(k)) {
                const bool flat_left = k > 0 && is_zero(k - 1);
                const bool flat_right = k + 1 < u.size() && is_zero(k + 1);
                if (!flat_left && !flat_right) roots.push_back(u[k]);
                continue;
            }
            if (k + 1 < u.size() && !is_zero(k + 1) && (d[k] < 0) != (d[k + 1] < 0))
                roots.push_back(u[k] - d[k] * (u[k + 1] - u[k]) / (d[k + 1] - d[k]));
        }
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> out;
    for (double r : roots)
        if (out.empty() || r - out.back() > 1e-6) out.push_back(r);
    return out;
}

namespace {

struct Line {
    double a = 0.0; // value at U = 0
    double b = 0.0; // slope
    double at(double u) const { return a + b * u; }
};

// Distinct lines E_s(U) - E_T(U) for all non-triplet Fock states.
std::vector<Line> gap_lines(int particles, int m, LiftMode mode, int levels, const std::vector<double>& level_energies)
{
    const FockBasis basis = enumerate_fock_basis(particles, levels);
    const SapTriplet tri = sap_triplet(particles, m, mode, levels);
    auto energy_at = [&](const FockState& s, double u) {
        BHParameters p;
        p.levels = levels;
        p.level_energies = level_energies;
        p.interaction = u;
        for (int i = 0; i < 3; ++i) p.lifts[i] = tri.lift_multiples[i] * u;
        return fock_energy(s, p);
    };
    const double t0 = energy_at(tri.initial, 0.0), t1 = energy_at(tri.initial, 1.0);
    std::set<std::pair<long long, long long>> seen;
    std::vector<Line> lines;
    for (const FockState& s : basis.states()) {
        if (s == tri.initial || s == tri.intermediate || s == tri.target) continue;
        Line l;
        l.a = energy_at(s, 0.0) - t0;
        l.b = (energy_at(s, 1.0) - t1) - l.a;
        if (std::abs(l.a) < 1e-12 && std::abs(l.b) < 1e-12) continue; // resonant with the triplet at every U
        const auto key = std::make_pair(std::llround(l.a * 1e9), std::llround(l.b * 1e9));
        if (seen.insert(key).second) lines.push_back(l);
    }
    return lines;
}

} // namespace

std::vector<double> bh_crossings(int particles, int m, LiftMode mode, int levels, const std::vector<double>& u,
                                 const std::vector<double>& level_energies)
{
    const FockBasis basis = enumerate_fock_basis(particles, levels);
    const SapTriplet tri = sap_triplet(particles, m, mode, levels);
    BHParameters base;
    base.levels = levels;
    base.level_energies = level_energies;
    const auto rows = bh_spectrum_scan(basis, base, tri, u);
    std::vector<std::vector<double>> bands;
    std::vector<double> triplet;
    for (const auto& r : rows) triplet.push_back(r.triplet);
    for (size_t s = 0; s < basis.size(); ++s) {
        if (basis[s] == tri.initial || basis[s] == tri.intermediate || basis[s] == tri.target) continue;
        std::vector<double> b;
        for (const auto& r : rows) b.push_back(r.energies[s]);
        bands.push_back(std::move(b));
    }
    return detect_crossings(u, bands, triplet);
}

GapMetrics gap_metrics(int particles, int m, LiftMode mode, int levels, double u_max,
                       const std::vector<double>& level_energies)
{
    if (!(u_max > 0.0)) throw ContractError("gap metrics: the repulsive window needs u_max > 0");
    const std::vector<Line> lines = gap_lines(particles, m, mode, levels, level_energies);
    if (lines.empty()) throw ContractError("gap metrics: no bands besides the triplet");
    auto gap = [&](double u) {
        double g = std::numeric_limits<double>::infinity();
        for (const Line& l : lines) g = std::min(g, std::abs(l.at(u)));
        return g;
    };
    std::vector<double> cand{0.0, u_max};
    std::vector<double> crossings;
    for (size_t i = 0; i < lines.size(); ++i) {
        const Line& li = lines[i];
        if (li.b != 0.0) {
            const double z = -li.a / li.b + 0.0;
            if (z >= 0.0 && z <= u_max) {
                cand.push_back(z);
                crossings.push_back(z);
            }
        }
        for (size_t j = i + 1; j < lines.size(); ++j) {
            const Line& lj = lines[j];
            for (double sgn : {1.0, -1.0}) {
                const double db = li.b - sgn * lj.b;
                if (db == 0.0) continue;
                const double z = -(li.a - sgn * lj.a) / db;
                if (z > 0.0 && z < u_max) cand.push_back(z);
            }
        }
    }
    GapMetrics g;
    g.gap = -1.0;
    std::sort(cand.begin(), cand.end());
    for (double u : cand) {
        const double v = gap(u);
        if (v > g.gap + 1e-14) {
            g.gap = v;
            g.u_opt = u;
        }
    }
    for (double z : crossings) {
        if (z <= g.u_opt) g.left = std::max(g.left, z);
        if (z >= g.u_opt) g.right = std::min(g.right, z);
    }
    g.open = !std::isfinite(g.left) || !std::isfinite(g.right);
    g.width = g.open ? std::numeric_limits<double>::infinity() : g.right - g.left;
    return g;
}

std::vector<ScalingRow> scaling_study(int max_particles, int max_moved, LiftMode mode, int levels, double u_max,
                                      const std::vector<double>& level_energies)
{
    if (max_moved < 1) throw ContractError("scaling: N - M = 0 defines no separation");
    std::vector<ScalingRow> rows;
    for (int moved = 1; moved <= max_moved; ++moved)
        for (int n = moved + 1; n <= max_particles; ++n) {
            ScalingRow r;
            r.particles = n;
            r.m = n - moved;
            r.moved = moved;
            const int m_arg = mode == LiftMode::keep_left ? r.m : moved;
            r.metrics = gap_metrics(n, m_arg, mode, levels, u_max, level_energies);
            rows.push_back(r);
        }
    return rows;
}

Table scaling_table(const std::vector<ScalingRow>& rows, UnitMode units)
{
    Table t;
    const std::string e = energy_unit(units);
    t.columns = {{"N", "1"}, {"M", "1"}, {"moved", "1"}, {"delta_E", e}, {"delta_U", e},
                 {"u_opt", e}, {"left_crossing", e}, {"right_crossing", e}};
    for (const auto& r : rows)
        t.add_row({double(r.particles), double(r.m), double(r.moved), r.metrics.gap, r.metrics.width, r.metrics.u_opt,
                   r.metrics.left, r.metrics.right},
                  r.metrics.open ? "open bracket" : "");
    return t;
}

std::vector<double> find_dips(const std::vector<double>& u, const std::vector<double>& f, double depth)
{
    if (u.size() != f.size()) throw ContractError("dips: length mismatch");
    std::vector<double> x, y;
    for (size_t k = 0; k < u.size(); ++k)
        if (std::isfinite(f[k])) {
            x.push_back(u[k]);
            y.push_back(f[k]);
        }
    std::vector<double> dips;
    const size_t n = y.size();
    for (size_t k = 0; k < n; ++k) {
        const bool left_ok = k == 0 || y[k] < y[k - 1];
        const bool right_ok = k + 1 == n || y[k] <= y[k + 1];
        if (!left_ok || !right_ok || n < 2) continue;
        double lmax = -1.0, rmax = -1.0;
        for (size_t j = k; j-- > 0;) {
            if (y[j] < y[k]) break;
            lmax = std::max(lmax, y[j]);
        }
        for (size_t j = k + 1; j < n; ++j) {
            if (y[j] < y[k]) break;
            rmax = std::max(rmax, y[j]);
        }
        double prominence;
        if (k == 0) prominence = rmax - y[k];
        else if (k + 1 == n) prominence = lmax - y[k];
        else prominence = std::min(lmax, rmax) - y[k];
        if (prominence >= depth) dips.push_back(x[k]);
    }
    return dips;
}

double dip_mismatch(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto one_way = [](const std::vector<double>& p, const std::vector<double>& q) {
        double worst = 0.0;
        for (double x : p) {
            double best = std::numeric_limits<double>::infinity();
            for (double y : q) best = std::min(best, std::abs(x - y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_way(a, b), one_way(b, a));
}

RfDesign rf_design(const ExperimentConfig& cfg, int samples)
{
    if (cfg.potential != PotentialKind::rf) throw ContractError("rf design: the configuration selects no rf potential");
    const PotentialModel m = make_potential_model(cfg);
    RfDesign d;
    const RfParams p0 = m.rf_at(0.0);
    d.minima = locate_trap_minima(p0);
    d.jumps = rf_region_jumps(p0);
    for (const auto& j : d.jumps) d.max_jump = std::max(d.max_jump, std::abs(j.jump));
    d.min_separation = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= samples; ++k) {
        const double t = cfg.duration * k / samples;
        const auto [a, b] = m.separations(t);
        d.min_separation = std::min({d.min_separation, a, b});
        for (const auto& j : rf_region_jumps(m.rf_at(t)))
            d.max_jump_schedule = std::max(d.max_jump_schedule, std::abs(j.jump));
    }
    return d;
}

Table rf_profile_table(const ExperimentConfig& cfg, double t, int points)
{
    const PotentialModel m = make_potential_model(cfg);
    const auto [lo, hi] = m.box(cfg.grid_padding);
    Table tab;
    tab.columns = {{"x", length_unit_label(cfg.units)}, {"V", energy_unit_label(cfg.units)}};
    for (double x : linspace(lo, hi, points)) tab.add_row({x, m(x, t)});
    return tab;
}

} // namespace coldsap
