#pragma once

#include "coldsap/bose_hubbard.hpp"
#include "coldsap/config.hpp"
#include "coldsap/continuum.hpp"
#include "coldsap/table_io.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace coldsap {

// Runs f(0) ... f(n-1) on up to `jobs` threads; results keep index order.
// The first exception (by index) is rethrown after all workers finish.
template <class F>
auto parallel_map(std::size_t n, int jobs, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>>
{
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                slots[k].emplace(f(k));
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::vector<double> linspace(double lo, double hi, int count);

// ---- tunnelling calibration -------------------------------------------------

struct ExpFit {
    double amplitude = 0.0; // A
    double decay = 0.0;     // beta
    int points = 0;
    double operator()(double d) const { return amplitude * std::exp(-decay * d); }
};

// Least squares on log(rate) = log A - beta d over rates >= 1e-8.
ExpFit fit_exponential(const std::vector<double>& d, const std::vector<std::optional<double>>& rate);

struct Calibration {
    std::vector<TunnelingPoint> points;
    ExpFit single, pair;
    double coupling = 0.0; // contact strength used for the pair rate
};

Calibration calibrate(const ContinuumSetup& s, const ExperimentConfig& cfg, int jobs = 1);
Table calibration_table(const Calibration& c, UnitMode units);
// Reads a table written by calibration_table and refits it.
Calibration calibration_from_table(const Table& t);
// Uses cfg.calibration_file when set, otherwise calibrates.
Calibration obtain_calibration(const ContinuumSetup& s, const ExperimentConfig& cfg, int jobs = 1);

// Rates along the configured trap trajectory.
RateSchedule rate_schedule(const Calibration& c, const PotentialModel& m, double kappa);

// ---- fidelity sweeps --------------------------------------------------------

struct SweepPoint {
    double u = 0.0;
    double fidelity = std::numeric_limits<double>::quiet_NaN();
    double lift = std::numeric_limits<double>::quiet_NaN();
    double coupling = std::numeric_limits<double>::quiet_NaN();
    double norm_error = std::numeric_limits<double>::quiet_NaN();
    std::string note; // failure message for a missing point
};

struct FidelitySweep {
    ModelKind model = ModelKind::continuum;
    double lift_perturbation = 0.0;
    std::vector<SweepPoint> points;
    std::vector<double> u() const;
    std::vector<double> fidelity() const;
};

// Everything the Bose-Hubbard sweeps need besides U.
struct BHContext {
    FockBasis basis;
    SapTriplet triplet;
    BHParameters base;
    RateSchedule rates;
    double duration = 0.0;
    double dt = 0.1;
};

// Single-particle levels of the left trap at t = 0.
std::vector<double> left_trap_levels(const ContinuumSetup& s, int levels);

BHContext make_bh_context(const ContinuumSetup& s, const ExperimentConfig& cfg, const Calibration& c);
SweepPoint bh_point(const BHContext& ctx, double u, double lift_perturbation);

// Per-point failures are recorded as NaN with a note; the sweep continues.
FidelitySweep fidelity_sweep(ModelKind model, const std::vector<double>& u_values, const ExperimentConfig& cfg,
                             int jobs = 1, const Calibration* calibration = nullptr);

Table sweep_table(const std::vector<FidelitySweep>& sweeps, UnitMode units);

// One continuum sweep per perturbation (V_eff = V_lift + dV), stacked.
std::vector<FidelitySweep> robustness_sweep(const std::vector<double>& perturbations,
                                            const std::vector<double>& u_values, const ExperimentConfig& cfg,
                                            int jobs = 1);

Table spectrum_table(const SpectrumResult& r, UnitMode units);

// ---- crossings and gaps -----------------------------------------------------

// Roots of E_band(U) - triplet(U), linearly interpolated between samples,
// exact zeros at samples included, sorted and deduplicated within 1e-6.
// bands[b][k] is band b at u[k].
std::vector<double> detect_crossings(const std::vector<double>& u, const std::vector<std::vector<double>>& bands,
                                     const std::vector<double>& triplet);

// Crossings of the Fock bands (triplet members excluded) with the triplet.
std::vector<double> bh_crossings(int particles, int m, LiftMode mode, int levels, const std::vector<double>& u,
                                 const std::vector<double>& level_energies = {});

struct GapMetrics {
    double gap = 0.0;      // Delta E
    double u_opt = 0.0;
    double width = std::numeric_limits<double>::infinity(); // Delta U_int
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    bool open = true; // a bracketing crossing is missing
};

// Exact for piecewise-linear bands: the gap min_s |E_s - E_T| is evaluated at
// every kink and endpoint in (0, u_max]; crossings in [0, u_max] bracket U_opt.
GapMetrics gap_metrics(int particles, int m, LiftMode mode, int levels, double u_max,
                       const std::vector<double>& level_energies = {});

struct ScalingRow {
    int particles = 0;
    int m = 0;
    int moved = 0;
    GapMetrics metrics;
};

// All (N, M) with 2 <= N <= max_particles and 1 <= N - M <= max_moved.
std::vector<ScalingRow> scaling_study(int max_particles, int max_moved, LiftMode mode, int levels, double u_max,
                                      const std::vector<double>& level_energies = {});
Table scaling_table(const std::vector<ScalingRow>& rows, UnitMode units);

// Local minima lying at least `depth` below the highest value on each side
// up to the next deeper point. Endpoints qualify when lower than their neighbour.
std::vector<double> find_dips(const std::vector<double>& u, const std::vector<double>& f, double depth);

// Largest distance from a dip in one list to the nearest dip in the other.
double dip_mismatch(const std::vector<double>& a, const std::vector<double>& b);

// ---- rf design --------------------------------------------------------------

struct RfDesign {
    TrapMinima minima;
    std::vector<RegionJump> jumps;
    double max_jump = 0.0;
    double min_separation = 0.0; // over the schedule
    double max_jump_schedule = 0.0;
};

RfDesign rf_design(const ExperimentConfig& cfg, int samples = 400);
Table rf_profile_table(const ExperimentConfig& cfg, double t, int points);

} // namespace coldsap
