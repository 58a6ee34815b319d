#include "coldsap/potentials.hpp"

#include "coldsap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace coldsap {

namespace {

constexpr double pi = 3.14159265358979323846;

} // namespace

int harmonic_trap_index(double x, const TripleHarmonicParams& p)
{
    const double a = (x + p.d12) * (x + p.d12);
    const double b = x * x;
    const double c = (x - p.d23) * (x - p.d23);
    if (a <= b && a <= c) return 0;
    if (b <= c) return 1;
    return 2;
}

double eval_triple_harmonic(double x, const TripleHarmonicParams& p)
{
    const double centers[3] = {-p.d12, 0.0, p.d23};
    const int i = harmonic_trap_index(x, p);
    const double dx = x - centers[i];
    return 0.5 * p.mass * p.omega * p.omega * dx * dx + p.lifts[i];
}

int dominant_frequency_index(double x, const RfParams& p)
{
    const double e = p.force * x;
    int best = 0;
    double best_d = std::abs(e - p.omega[0]);
    for (int n = 1; n < 6; ++n) {
        const double d = std::abs(e - p.omega[n]);
        if (d < best_d) {
            best = n;
            best_d = d;
        }
    }
    return best + 1;
}

double eval_rf_branch(double x, int n, const RfParams& p)
{
    const double e = p.force * x;
    const double r2 = p.rabi * p.rabi;
    double l = 0.0;
    for (int j = 1; j <= 6; ++j) {
        if (j == n) continue;
        const double den = e - p.omega[j - 1];
        if (den == 0.0)
            throw DomainError("rf potential: evaluation at a resonance pole of frequency " + std::to_string(j));
        l += r2 / (4.0 * den);
    }
    const double detuning = e - p.omega[n - 1] + 2.0 * l;
    const double e_plus = 0.5 * std::sqrt(r2 + detuning * detuning);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    double offset = 0.0;
    for (int k = 1; k < n; ++k) offset -= ((k % 2 == 0) ? 1.0 : -1.0) * p.omega[k - 1];
    return sign * (e_plus - 0.5 * p.omega[n - 1]) + offset;
}

double eval_rf_potential(double x, const RfParams& p)
{
    return eval_rf_branch(x, dominant_frequency_index(x, p), p);
}

std::vector<RegionJump> rf_region_jumps(const RfParams& p)
{
    std::vector<RegionJump> out;
    for (int n = 1; n < 6; ++n) {
        const double xb = 0.5 * (p.omega[n - 1] + p.omega[n]) / p.force;
        RegionJump j;
        j.position = xb;
        j.lower_index = n;
        j.jump = std::abs(eval_rf_branch(xb, n + 1, p) - eval_rf_branch(xb, n, p));
        out.push_back(j);
    }
    return out;
}

void check_schedule(const ScheduleParams& s)
{
    if (!(s.duration > 0.0)) throw ContractError("schedule: duration must be positive");
    if (!(s.d_min > 0.0) || !(s.d_max > s.d_min)) throw ContractError("schedule: need 0 < d_min < d_max");
    if (s.delay < 0.0 || !(s.delay < 0.5 * s.duration)) throw ContractError("schedule: need 0 <= delay < T/2");
}

double bump(double t, double delay, double duration)
{
    const double u = t - delay;
    if (u < 0.0 || u >= 0.5 * duration) return 0.0;
    const double s = std::sin(2.0 * pi * u / duration);
    return s * s;
}

std::array<double, 6> rf_base_frequencies(double x1, double d, double force)
{
    const double w2 = force * x1;
    const double dw = force * d / 2.0;
    std::array<double, 6> w{};
    w[0] = w2 - 2.0 * dw;
    for (int i = 2; i <= 6; ++i) w[i - 1] = w2 + (i - 2) * dw;
    return w;
}

std::array<double, 6> rf_schedule(double t, const ScheduleParams& s, const std::array<double, 6>& base,
                                  double force)
{
    if (t < 0.0 || t > s.duration) throw ContractError("rf schedule: time outside [0, T]");
    const double amp = -force * s.d_min;
    const double early = bump(t, 0.0, s.duration);
    const double late = bump(t, s.delay, s.duration);
    const double f1 = amp * late;
    const double f2 = amp * (late + early);

    std::array<double, 6> w = base;
    w[0] -= s.v_lift;
    w[2] += 0.5 * f1 + s.v_lift;
    w[3] += f1;
    w[4] += 0.5 * (f1 + f2);
    w[5] += f2;
    for (int i = 0; i < 5; ++i) {
        if (!(w[i] < w[i + 1]))
            throw NumericalError("rf schedule: frequency ordering violated between omega_" + std::to_string(i + 1) +
                                 " and omega_" + std::to_string(i + 2) + " at t = " + std::to_string(t));
    }
    return w;
}

std::pair<double, double> harmonic_schedule(double t, const ScheduleParams& s)
{
    const double span = s.d_max - s.d_min;
    const double d23 = s.d_max - span * bump(t, 0.0, s.duration);
    const double d12 = s.d_max - span * bump(t, s.delay, s.duration);
    return {d12, d23};
}

TrapMinima locate_minima(const std::function<double(double)>& v, double lo, double hi, int samples)
{
    if (samples < 5 || !(hi > lo)) throw ContractError("locate_minima: bad scan window");
    const double h = (hi - lo) / (samples - 1);
    std::vector<double> vals(samples);
    for (int i = 0; i < samples; ++i) vals[i] = v(lo + i * h);

    std::vector<int> idx;
    for (int i = 1; i + 1 < samples; ++i)
        if (vals[i] < vals[i - 1] && vals[i] <= vals[i + 1]) idx.push_back(i);
    if (idx.size() != 3)
        throw NumericalError("geometry: expected 3 trap minima, found " + std::to_string(idx.size()));

    TrapMinima out;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int k = 0; k < 3; ++k) {
        double a = lo + (idx[k] - 1) * h;
        double b = lo + (idx[k] + 1) * h;
        double c = b - g * (b - a);
        double d = a + g * (b - a);
        double fc = v(c), fd = v(d);
        while (b - a > 1e-8) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = v(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = v(d);
            }
        }
        out.position[k] = 0.5 * (a + b);
        out.energy[k] = v(out.position[k]);
    }
    return out;
}

TrapMinima locate_trap_minima(const RfParams& p)
{
    double lo = p.omega[0] / p.force;
    double hi = (2.0 * p.omega[5] - p.omega[4]) / p.force;
    if (lo > hi) std::swap(lo, hi);
    return locate_minima([&](double x) { return eval_rf_potential(x, p); }, lo, hi);
}

TrapMinima locate_trap_minima(const TripleHarmonicParams& p)
{
    const double pad = 0.5 * std::max(p.d12, p.d23);
    return locate_minima([&](double x) { return eval_triple_harmonic(x, p); }, -p.d12 - pad, p.d23 + pad);
}

PotentialModel PotentialModel::harmonic(const ScheduleParams& s, std::array<double, 3> lifts)
{
    check_schedule(s);
    PotentialModel m;
    m.shape_ = PotentialShape::harmonic;
    m.sched_ = s;
    m.lifts_ = lifts;
    return m;
}

PotentialModel PotentialModel::rf(const ScheduleParams& s, double left_trap, double rf_force, double rabi)
{
    check_schedule(s);
    if (rf_force == 0.0 || !std::isfinite(rf_force)) throw ContractError("rf potential: zero force");
    PotentialModel m;
    m.shape_ = PotentialShape::rf;
    m.sched_ = s;
    m.force_ = rf_force;
    m.rabi_ = rabi;
    m.base_ = rf_base_frequencies(left_trap, s.d_max, rf_force);
    return m;
}

TripleHarmonicParams PotentialModel::harmonic_at(double t) const
{
    TripleHarmonicParams p;
    std::tie(p.d12, p.d23) = harmonic_schedule(t, sched_);
    p.lifts = lifts_;
    return p;
}

RfParams PotentialModel::rf_at(double t) const
{
    RfParams p;
    p.omega = rf_schedule(t, sched_, base_, force_);
    p.force = force_;
    p.rabi = rabi_;
    return p;
}

double PotentialModel::operator()(double x, double t) const
{
    if (shape_ == PotentialShape::harmonic) return eval_triple_harmonic(x, harmonic_at(t));
    return eval_rf_potential(x, rf_at(t));
}

void PotentialModel::sample(const std::vector<double>& xs, double t, std::vector<double>& out) const
{
    out.resize(xs.size());
    if (shape_ == PotentialShape::harmonic) {
        const TripleHarmonicParams p = harmonic_at(t);
        for (size_t i = 0; i < xs.size(); ++i) out[i] = eval_triple_harmonic(xs[i], p);
    } else {
        const RfParams p = rf_at(t);
        for (size_t i = 0; i < xs.size(); ++i) out[i] = eval_rf_potential(xs[i], p);
    }
}

std::array<double, 3> PotentialModel::trap_centers(double t) const
{
    if (shape_ == PotentialShape::harmonic) {
        const auto [d12, d23] = harmonic_schedule(t, sched_);
        return {-d12, 0.0, d23};
    }
    const auto w = rf_schedule(t, sched_, base_, force_);
    return {w[1] / force_, w[3] / force_, w[5] / force_};
}

std::array<double, 2> PotentialModel::basin_edges(double t) const
{
    if (shape_ == PotentialShape::harmonic) {
        const auto [d12, d23] = harmonic_schedule(t, sched_);
        return {-0.5 * d12, 0.5 * d23};
    }
    const auto w = rf_schedule(t, sched_, base_, force_);
    return {w[2] / force_, w[4] / force_};
}

std::pair<double, double> PotentialModel::separations(double t) const
{
    const auto c = trap_centers(t);
    return {std::abs(c[1] - c[0]), std::abs(c[2] - c[1])};
}

std::pair<double, double> PotentialModel::box(double padding) const
{
    if (shape_ == PotentialShape::harmonic) return {-sched_.d_max - padding, sched_.d_max + padding};
    double a = base_[1] / force_;
    double b = base_[5] / force_;
    if (a > b) std::swap(a, b);
    return {a - padding, b + padding};
}

PotentialModel PotentialModel::with_lift(double v_lift, std::array<double, 3> lifts) const
{
    PotentialModel m = *this;
    m.sched_.v_lift = v_lift;
    m.lifts_ = lifts;
    return m;
}

} // namespace coldsap
