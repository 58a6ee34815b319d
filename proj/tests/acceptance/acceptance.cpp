#include "coldsap/analysis.hpp"
#include "coldsap/bose_hubbard.hpp"
#include "coldsap/continuum.hpp"
#include "coldsap/errors.hpp"
#include "coldsap/reduced_models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>

using namespace coldsap;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int jobs()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt(double v, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

bool within(double value, double ref, double rel) { return std::abs(value - ref) <= rel * std::abs(ref); }

Outcome unit_system()
{
    const UnitSystem u = build_rf_units(PhysicalConstants{});
    const bool x = within(u.length_scale, 3.18e-7, 0.01);
    const bool t = within(u.time_scale, 1.34e-4, 0.01);
    const bool e = within(u.energy_scale, 7.85e-31, 0.01);
    return {x && t && e, "x~=" + fmt(u.length_scale, 4) + " m" + (x ? "" : " (off)") + ", t~=" + fmt(u.time_scale, 4) +
                             " s" + (t ? "" : " (off)") + ", u~=" + fmt(u.energy_scale, 4) + " J" + (e ? "" : " (off)")};
}

Outcome busch_tonks()
{
    const bool zero = busch_g_from_energy(1.0) == 0.0;
    const ContinuumSetup s = make_continuum_setup(parse_config("units = rf\n"));
    const double u = measured_interaction(s, 1e4);
    return {zero && within(u, 1.64, 0.05),
            "g(E=1)=" + fmt(busch_g_from_energy(1.0)) + ", U(g=1e4)=" + fmt(u, 5) + " u~ (e1-e0=" + fmt(s.e1 - s.e0, 5) +
                ")"};
}

bool roots_match(const std::vector<double>& got, const std::vector<double>& want)
{
    if (got.size() != want.size()) return false;
    for (size_t k = 0; k < got.size(); ++k)
        if (std::abs(got[k] - want[k]) > 1e-6) return false;
    return true;
}

std::string list(const std::vector<double>& v)
{
    std::string s = "{";
    for (size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k], 8);
    return s + "}";
}

Outcome bh_crossing_points()
{
    const std::vector<double> u = linspace(-0.5, 1.0, 301);
    const auto two = bh_crossings(2, 1, LiftMode::keep_left, 2, u);
    const auto three = bh_crossings(3, 1, LiftMode::keep_left, 2, u);
    return {roots_match(two, {-0.5, 0.0}) && roots_match(three, {-1.0 / 3.0, 0.0, 1.0}),
            "N=2: " + list(two) + ", N=3 |1 0 2>: " + list(three)};
}

Outcome triplet_isolation()
{
    const FockBasis b = enumerate_fock_basis(3, 2);
    const SapTriplet tri = sap_triplet(3, 1, LiftMode::move_right, 2);
    double worst = std::numeric_limits<double>::infinity();
    double worst_u = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double u = 2.0 * k / 200.0;
        BHParameters p;
        p.levels = 2;
        p.interaction = u;
        for (int i = 0; i < 3; ++i) p.lifts[i] = tri.lift_multiples[i] * u;
        const double et = fock_energy(tri.initial, p);
        for (const FockState& s : b.states()) {
            if (s == tri.initial || s == tri.intermediate || s == tri.target) continue;
            if (fock_energy(s, p) - et < worst) {
                worst = fock_energy(s, p) - et;
                worst_u = u;
            }
        }
    }
    return {worst > 0.0, "lift " + fmt(tri.lift_multiples[1]) + " U, min gap to other states " + fmt(worst) +
                             " at U=" + fmt(worst_u)};
}

std::vector<double> sweep_grid()
{
    std::vector<double> u;
    for (int k = -5; k <= 10; ++k) u.push_back(k / 10.0);
    u.push_back(0.05);
    std::sort(u.begin(), u.end());
    return u;
}

double value_at(const FidelitySweep& s, double u)
{
    for (const auto& p : s.points)
        if (std::abs(p.u - u) < 1e-12) return p.fidelity;
    return std::numeric_limits<double>::quiet_NaN();
}

std::string curve(const FidelitySweep& s)
{
    std::string out;
    for (const auto& p : s.points) out += " " + fmt(p.u, 3) + ":" + fmt(p.fidelity, 3);
    return out;
}

Outcome continuum_sweep(const FidelitySweep& s)
{
    double best = -1.0;
    for (const auto& p : s.points)
        if (std::isfinite(p.fidelity)) best = std::max(best, p.fidelity);
    const double f04 = value_at(s, 0.4), f005 = value_at(s, 0.05);
    return {f04 > 0.9 && f005 <= best - 0.2,
            "F(0.4)=" + fmt(f04, 4) + ", F(0.05)=" + fmt(f005, 4) + ", max F=" + fmt(best, 4) + ";" + curve(s)};
}

Outcome dip_agreement(const FidelitySweep& cont, const FidelitySweep& bh)
{
    const auto a = find_dips(cont.u(), cont.fidelity(), 0.1);
    const auto b = find_dips(bh.u(), bh.fidelity(), 0.1);
    const double mismatch = dip_mismatch(a, b);
    return {!a.empty() && mismatch <= 0.1,
            "continuum dips " + list(a) + ", bose-hubbard dips " + list(b) + ", mismatch " + fmt(mismatch) + ";" +
                curve(bh)};
}

Outcome spectrum_overlap()
{
    const ExperimentConfig cfg = parse_config("units = natural\n");
    const ContinuumSetup s = make_continuum_setup(cfg);
    const SpectrumResult weak = spectrum_vs_time(s, cfg, 0.1, 6, 60);
    const SpectrumResult mid = spectrum_vs_time(s, cfg, 0.4, 6, 60);
    return {weak.bands_overlap && !mid.bands_overlap && weak.snapshots.size() >= 50 && mid.snapshots.size() >= 50,
            "U=0.1 overlap=" + std::string(weak.bands_overlap ? "yes" : "no") + " (triplet top " +
                fmt(weak.triplet_top) + ", next bottom " + fmt(weak.next_bottom) + "), U=0.4 overlap=" +
                (mid.bands_overlap ? "yes" : "no") + " (triplet top " + fmt(mid.triplet_top) + ", next bottom " +
                fmt(mid.next_bottom) + ")"};
}

Outcome rf_geometry()
{
    const RfDesign d = rf_design(parse_config("units = rf\n"));
    const auto& x = d.minima.position;
    const bool left = std::abs(x[0] - 20.0) <= 0.2;
    const bool spacing = std::abs(x[1] - x[0] - 9.0) <= 0.2 && std::abs(x[2] - x[1] - 9.0) <= 0.2;
    return {left && spacing && d.max_jump < 0.01,
            "minima " + fmt(x[0]) + ", " + fmt(x[1]) + ", " + fmt(x[2]) + "; max jump " + fmt(d.max_jump) +
                " u~ (over the schedule " + fmt(d.max_jump_schedule) + ")"};
}

Outcome rf_robustness()
{
    const ExperimentConfig cfg = parse_config("units = rf\n");
    const double centre = cfg.interaction;
    const double dv = 0.02 * centre;
    const FidelitySweep plain = fidelity_sweep(ModelKind::continuum, {centre}, cfg, jobs());
    const auto family = robustness_sweep({-dv, 0.0, dv}, {centre}, cfg, jobs());
    bool high = true;
    std::string detail = "U=" + fmt(centre) + ":";
    for (const auto& s : family) {
        high = high && s.points[0].fidelity > 0.9;
        detail += " dV=" + fmt(s.lift_perturbation, 3) + " F=" + fmt(s.points[0].fidelity, 5);
    }
    const SweepPoint& a = plain.points[0];
    const SweepPoint& b = family[1].points[0];
    const bool identical = a.fidelity == b.fidelity && a.lift == b.lift && a.norm_error == b.norm_error;
    detail += identical ? "; dV=0 bit-identical to the unperturbed run" : "; dV=0 differs from the unperturbed run";
    return {high && identical, detail};
}

Outcome scaling_structure()
{
    const auto rows = scaling_study(6, 4, LiftMode::keep_left, 3, 1.0);
    double ref = std::numeric_limits<double>::quiet_NaN();
    bool same = true;
    for (const auto& r : rows)
        if (r.moved == 1) {
            if (std::isnan(ref)) ref = r.metrics.gap;
            same = same && std::abs(r.metrics.gap - ref) <= 1e-10;
        }
    bool decreasing = true;
    std::string widths;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 4; ++k) {
        const auto it = std::find_if(rows.begin(), rows.end(),
                                     [&](const ScalingRow& r) { return r.particles == 6 && r.moved == k; });
        if (k > 1) decreasing = decreasing && it->metrics.width < last;
        last = it->metrics.width;
        widths += " " + fmt(last);
    }
    return {same && decreasing, "dE(N-M=1)=" + fmt(ref) + " for N=2..6, dU(N-M=1..4):" + widths};
}

Outcome property_suites()
{
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) failed.push_back(what);
    };

    // hermiticity
    for (int n = 1; n <= 4; ++n) {
        const FockBasis b = enumerate_fock_basis(n, 3);
        BHParameters p;
        p.levels = 3;
        p.interaction = 0.4;
        p.lifts = {0.0, 0.4, 0.4};
        p.rates.single = {0.01, 0.02};
        p.rates.pair = {0.002, 0.003};
        p.rates.kappa = 0.7;
        const Eigen::MatrixXd h = assemble_bh_hamiltonian(b, p);
        expect((h - h.transpose()).norm() == 0.0, "bose-hubbard hermiticity");
    }
    const SpatialGrid g = SpatialGrid::with_spacing(-6.0, 6.0, 0.1);
    std::vector<double> v;
    for (double x : g.points()) v.push_back(0.5 * x * x);
    const SparseMatrix h2 = build_hamiltonian_2p(g, v, 0.8);
    expect((h2 - SparseMatrix(h2.transpose())).norm() == 0.0, "two-particle hermiticity");

    // norm conservation and bosonic symmetry under time-dependent driving
    const PairLattice lat(g);
    Eigen::VectorXcd orb(g.n_points);
    for (int i = 0; i < g.n_points; ++i) orb[i] = std::exp(-0.5 * std::pow(g.x(i) - 1.0, 2));
    Eigen::VectorXcd amp = lat.symmetric_product(orb, orb);
    const PotentialFn shaking = [&](double t, std::vector<double>& out) {
        out.resize(v.size());
        for (int i = 0; i < g.n_points; ++i) out[i] = 0.5 * std::pow(g.x(i) - 0.5 * std::sin(t), 2);
    };
    const PropagationReport r = propagate(lat, amp, shaking, 0.8, 0.0, 20.0, 0.05);
    expect(r.norm_error < 1e-10, "norm conservation");
    expect(lat.symmetry_defect(amp) < 1e-10, "bosonic symmetry");

    // basis counting against direct enumeration
    for (int n = 1; n <= 6; ++n)
        for (int l = 1; l <= 3; ++l) {
            std::set<std::vector<int>> distinct;
            std::function<void(std::vector<int>&, int, int)> fill = [&](std::vector<int>& occ, int site, int left) {
                if (site + 1 == int(occ.size())) {
                    occ[site] = left;
                    distinct.insert(occ);
                    return;
                }
                for (int k = 0; k <= left; ++k) {
                    occ[site] = k;
                    fill(occ, site + 1, left - k);
                }
            };
            std::vector<int> occ(3 * l);
            fill(occ, 0, n);
            expect(fock_basis_size(n, l) == distinct.size() && enumerate_fock_basis(n, l).size() == distinct.size(),
                   "basis count");
        }

    // one particle in the lowest band equals the three-level model
    {
        const FockBasis b = enumerate_fock_basis(1, 1);
        BHParameters p;
        p.rates.single = {0.013, 0.021};
        const Eigen::MatrixXd h = assemble_bh_hamiltonian(b, p);
        const Eigen::Matrix3d ref = three_level_hamiltonian({0.013, 0.021}) + 0.5 * Eigen::Matrix3d::Identity();
        expect((h - ref).norm() < 1e-15, "three-level equivalence");
    }

    // dark state has no middle component
    for (double theta = 0.0; theta <= M_PI / 2; theta += M_PI / 40) {
        const Eigen::Vector3d d = dark_state(theta);
        const ThreeLevelCouplings c{std::sin(theta), std::cos(theta)};
        expect(d[1] == 0.0 && (three_level_hamiltonian(c) * d).norm() < 1e-14, "dark state");
    }

    std::string detail = failed.empty() ? "hermiticity, norm, symmetry, counting, three-level, dark state" : "failed:";
    for (const auto& f : failed) detail += " " + f;
    return {failed.empty(), detail};
}

} // namespace

int main(int argc, char** argv)
{
    std::set<int> only;
    for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
    auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d (%s): %s [%.0f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };

    if (wanted(1)) report(1, "unit system", unit_system);
    if (wanted(2)) report(2, "busch and tonks closure", busch_tonks);
    if (wanted(3)) report(3, "bose-hubbard crossings", bh_crossing_points);
    if (wanted(4)) report(4, "triplet isolation", triplet_isolation);

    std::optional<FidelitySweep> cont;
    auto continuum = [&]() -> const FidelitySweep& {
        if (!cont) cont = fidelity_sweep(ModelKind::continuum, sweep_grid(), parse_config("units = natural\n"), jobs());
        return *cont;
    };
    if (wanted(5)) report(5, "two-particle separation", [&] { return continuum_sweep(continuum()); });
    if (wanted(6))
        report(6, "bose-hubbard vs continuum dips", [&] {
            ExperimentConfig cfg = parse_config("units = natural\nmodel = bose_hubbard\n");
            const FidelitySweep bh = fidelity_sweep(ModelKind::bose_hubbard, sweep_grid(), cfg, jobs());
            return dip_agreement(continuum(), bh);
        });
    if (wanted(7)) report(7, "spectrum overlap", spectrum_overlap);
    if (wanted(8)) report(8, "rf geometry", rf_geometry);
    if (wanted(9)) report(9, "rf robustness", rf_robustness);
    if (wanted(10)) report(10, "scaling structure", scaling_structure);
    if (wanted(11)) report(11, "property suites", property_suites);

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
