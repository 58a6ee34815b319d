#include "coldsap/continuum.hpp"
#include "coldsap/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace coldsap;

namespace {

std::vector<double> harmonic(const SpatialGrid& g, double centre = 0.0)
{
    std::vector<double> v;
    for (double x : g.points()) v.push_back(0.5 * (x - centre) * (x - centre));
    return v;
}

} // namespace

TEST_CASE("busch relation")
{
    CHECK(busch_g_from_energy(1.0) == 0.0);
    CHECK_THROWS_AS(busch_g_from_energy(2.0), DomainError);
    CHECK_THROWS_AS(busch_g_from_energy(4.0), DomainError);
    CHECK(busch_g_from_energy(1.5) > 0.0);
    CHECK(busch_g_from_energy(0.8) < 0.0);
    double last = -1e300;
    for (double e = 0.55; e < 1.99; e += 0.01) {
        const double g = busch_g_from_energy(e);
        CHECK(g > last);
        last = g;
    }
    CHECK(busch_g_from_energy(1.999) > 100.0);
}

TEST_CASE("single-particle harmonic levels")
{
    const SpatialGrid g = SpatialGrid::with_spacing(-8.0, 8.0, 0.05);
    const Eigenpairs e = single_particle_levels(g, harmonic(g), 4);
    for (int n = 0; n < 4; ++n) CHECK(e.values[n] == doctest::Approx(n + 0.5).epsilon(1e-3));
    // unit norm on the grid
    CHECK(e.vectors.col(0).squaredNorm() * g.spacing() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-particle hamiltonian is symmetric and exchange invariant")
{
    const SpatialGrid g = SpatialGrid::with_spacing(-4.0, 4.0, 0.25);
    const SparseMatrix h = build_hamiltonian_2p(g, harmonic(g), 0.7);
    const SparseMatrix ht = h.transpose();
    CHECK((h - ht).norm() == 0.0);
    const auto ex = grid_exchange(g.n_points);
    for (int k = 0; k < h.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(h, k); it; ++it)
            CHECK(h.coeff(ex[it.row()], ex[it.col()]) == it.value());
}

TEST_CASE("grid ground state reproduces the busch energy")
{
    const SpatialGrid g = SpatialGrid::with_spacing(-6.0, 6.0, 0.05);
    for (double target : {0.8, 1.3, 1.6}) {
        const GroundState gs = ground_state_2p(g, harmonic(g), busch_g_from_energy(target));
        CHECK(gs.energy == doctest::Approx(target).epsilon(5e-3));
        CHECK(gs.residual < 1e-8);
        CHECK(gs.psi.symmetry_defect() < 1e-10);
    }
}

TEST_CASE("pair lattice ground state agrees with the square grid")
{
    const SpatialGrid g = SpatialGrid::with_spacing(-6.0, 6.0, 0.1);
    const std::vector<double> v = harmonic(g);
    const double coupling = busch_g_from_energy(1.3);
    const PairLattice lat(g);
    const LatticeState ls = lattice_ground_state(lat, v, coupling);
    CHECK(ls.energy == doctest::Approx(1.3).epsilon(2e-2));
    CHECK(lat.norm(ls.amp) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lat.symmetry_defect(ls.amp) < 1e-10);
    const SparseMatrix h = lat.hamiltonian(v, coupling);
    CHECK((h - SparseMatrix(h.transpose())).norm() == 0.0);
}

TEST_CASE("pair propagation conserves norm and exchange symmetry")
{
    const SpatialGrid g = SpatialGrid::with_spacing(-6.0, 6.0, 0.1);
    const std::vector<double> v = harmonic(g);
    const double coupling = busch_g_from_energy(1.3);
    const PairLattice lat(g);
    const LatticeState ls = lattice_ground_state(lat, v, coupling);

    // stationary state stays put
    Eigen::VectorXcd amp = ls.amp;
    const PotentialFn fixed = [&](double, std::vector<double>& out) { out = v; };
    const PropagationReport r = propagate(lat, amp, fixed, coupling, 0.0, 20.0, 0.05, ls.energy);
    CHECK(r.norm_error < 1e-10);
    CHECK(std::norm(lat.inner(ls.amp, amp)) > 1.0 - 1e-6);

    // displaced start in a shaking trap: still unitary and bosonic
    Eigen::VectorXcd orb(g.n_points);
    for (int i = 0; i < g.n_points; ++i) orb[i] = std::exp(-0.5 * std::pow(g.x(i) - 1.0, 2));
    Eigen::VectorXcd amp2 = lat.symmetric_product(orb, orb);
    const PotentialFn shaking = [&](double t, std::vector<double>& out) {
        out.resize(v.size());
        for (int i = 0; i < g.n_points; ++i) out[i] = 0.5 * std::pow(g.x(i) - 0.5 * std::sin(t), 2);
    };
    const PropagationReport r2 = propagate(lat, amp2, shaking, coupling, 0.0, 10.0, 0.05);
    CHECK(r2.norm_error < 1e-10);
    CHECK(lat.symmetry_defect(amp2) < 1e-10);
}

TEST_CASE("one-particle propagation is unitary")
{
    const SpatialGrid g = SpatialGrid::with_spacing(-8.0, 8.0, 0.05);
    const std::vector<double> v = harmonic(g);
    const Eigenpairs e = single_particle_levels(g, v, 1);
    Wavefunction psi = Wavefunction::from_real(g, 1, e.vectors.col(0));
    const Wavefunction start = psi;
    const PotentialFn fixed = [&](double, std::vector<double>& out) { out = v; };
    const PropagationReport r = propagate(psi, fixed, 0.0, 30.0, 0.05, e.values[0]);
    CHECK(r.norm_error < 1e-10);
    CHECK(fidelity(start, psi) > 1.0 - 1e-8);

    Wavefunction two = Wavefunction::zeros(g, 2);
    CHECK_THROWS_AS(propagate(two, fixed, 0.0, 1.0, 0.05), ContractError);
}

TEST_CASE("interaction calibration in natural units")
{
    const ExperimentConfig cfg = parse_config("units = natural\n");
    const ContinuumSetup s = make_continuum_setup(cfg);
    CHECK(s.e0 == doctest::Approx(0.5).epsilon(1e-3));
    const InteractionPoint ip = interaction_for(s, 0.4);
    CHECK(ip.u_measured == doctest::Approx(0.4).epsilon(0.05));
    CHECK(ip.coupling == doctest::Approx(busch_g_from_energy(1.4)).epsilon(1e-12));
}
