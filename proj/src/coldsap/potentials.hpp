#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

namespace coldsap {

struct TripleHarmonicParams {
    double d12 = 8.0;
    double d23 = 8.0;
    double omega = 1.0;
    double mass = 1.0;
    std::array<double, 3> lifts{0.0, 0.0, 0.0};
};

// 0-based index of the parabola attaining the minimum (ties go left).
int harmonic_trap_index(double x, const TripleHarmonicParams& p);
double eval_triple_harmonic(double x, const TripleHarmonicParams& p);

// Six-frequency RF dressing in simulation units (hbar = 1): `force` is the
// signed product mu*g_F*b, `rabi` is hbar*Omega.
struct RfParams {
    std::array<double, 6> omega{};
    double force = 4.0;
    double rabi = 0.0;
};

// 1-based label n(x) of the frequency with the smallest |force*x - omega_n|.
int dominant_frequency_index(double x, const RfParams& p);
double eval_rf_potential(double x, const RfParams& p);
// Same expression with n forced, used for one-sided limits at region edges.
double eval_rf_branch(double x, int n, const RfParams& p);

struct RegionJump {
    double position = 0.0;
    int lower_index = 0;
    double jump = 0.0;
};
std::vector<RegionJump> rf_region_jumps(const RfParams& p);

struct ScheduleParams {
    double duration = 4000.0;
    double delay = 500.0;
    double d_max = 8.0;
    double d_min = 3.2;
    double v_lift = 0.0;
};

void check_schedule(const ScheduleParams& s);

// sin^2(2 pi (t - delay) / T) on 0 <= t - delay < T/2, zero elsewhere.
double bump(double t, double delay, double duration);

// Paper layout: left trap at x1, trap spacing d, resonance x = omega / force.
std::array<double, 6> rf_base_frequencies(double x1, double d, double force);

// Frequencies at time t. The undelayed bump drives the middle-right pair and
// the delayed bump the left-middle pair, so the empty pair approaches first.
std::array<double, 6> rf_schedule(double t, const ScheduleParams& s, const std::array<double, 6>& base,
                                  double force);

// (d12, d23) with the right pair approaching before the left pair.
std::pair<double, double> harmonic_schedule(double t, const ScheduleParams& s);

struct TrapMinima {
    std::array<double, 3> position{};
    std::array<double, 3> energy{};
};

// Grid scan over [lo, hi] with `samples` points, then golden-section refinement.
TrapMinima locate_minima(const std::function<double(double)>& v, double lo, double hi, int samples = 20001);

TrapMinima locate_trap_minima(const RfParams& p);
TrapMinima locate_trap_minima(const TripleHarmonicParams& p);

enum class PotentialShape { harmonic, rf };

// Time-dependent three-trap potential used by the solvers: schedule + lifts.
class PotentialModel {
public:
    static PotentialModel harmonic(const ScheduleParams& s, std::array<double, 3> lifts);
    static PotentialModel rf(const ScheduleParams& s, double left_trap, double rf_force, double rabi);

    PotentialShape shape() const { return shape_; }
    const ScheduleParams& schedule() const { return sched_; }

    double operator()(double x, double t) const;
    void sample(const std::vector<double>& xs, double t, std::vector<double>& out) const;

    // Separation points between left|middle and middle|right basins.
    std::array<double, 2> basin_edges(double t) const;
    std::array<double, 3> trap_centers(double t) const;
    // Adjacent trap distances (left-middle, middle-right).
    std::pair<double, double> separations(double t) const;
    // Recommended grid box, padded by `padding` beyond the outer traps.
    std::pair<double, double> box(double padding) const;

    TripleHarmonicParams harmonic_at(double t) const;
    RfParams rf_at(double t) const;

    // Same protocol with an additional lift offset (robustness runs).
    PotentialModel with_lift(double v_lift, std::array<double, 3> lifts) const;

private:
    PotentialShape shape_ = PotentialShape::harmonic;
    ScheduleParams sched_;
    std::array<double, 3> lifts_{};
    std::array<double, 6> base_{};
    double force_ = 4.0;
    double rabi_ = 0.0;
};

} // namespace coldsap
