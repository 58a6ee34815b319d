#include "coldsap/bose_hubbard.hpp"
#include "coldsap/errors.hpp"
#include "coldsap/reduced_models.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>

using namespace coldsap;

namespace {

// Counts occupation vectors of `sites` sites holding `n` bosons by recursion.
std::size_t count_compositions(int n, int sites)
{
    if (sites == 1) return 1;
    std::size_t total = 0;
    for (int k = 0; k <= n; ++k) total += count_compositions(n - k, sites - 1);
    return total;
}

BHParameters params(int levels, double u, std::array<double, 3> lifts)
{
    BHParameters p;
    p.levels = levels;
    p.interaction = u;
    p.lifts = lifts;
    return p;
}

} // namespace

TEST_CASE("basis size and enumeration")
{
    for (int n = 1; n <= 6; ++n)
        for (int l = 1; l <= 3; ++l) {
            CHECK(fock_basis_size(n, l) == count_compositions(n, 3 * l));
            const FockBasis b = enumerate_fock_basis(n, l);
            REQUIRE(b.size() == fock_basis_size(n, l));
            std::set<std::vector<int>> seen;
            for (std::size_t k = 0; k < b.size(); ++k) {
                CHECK(b[k].total() == n);
                CHECK(seen.insert(b[k].n).second);
                CHECK(b.find(b[k]) == k);
                if (k > 0) CHECK(b[k - 1].n > b[k].n);
            }
        }
    CHECK(enumerate_fock_basis(2, 1)[0] == fock(1, 2, 0, 0));
    CHECK_THROWS_AS(enumerate_fock_basis(40, 3, 1000), ContractError);
}

TEST_CASE("fock energies")
{
    const double u = 0.37;
    CHECK(fock_energy(fock(1, 2, 0, 0), params(1, u, {0, 0, 0})) == doctest::Approx(1 + u));
    CHECK(fock_energy(fock(1, 1, 0, 1), params(1, u, {0, u, u})) == doctest::Approx(1 + u));
    const BHParameters p3 = params(1, u, {0, u, u});
    for (const FockState& s : {fock(1, 3, 0, 0), fock(1, 1, 2, 0), fock(1, 1, 0, 2)})
        CHECK(fock_energy(s, p3) == doctest::Approx(1.5 + 3 * u));
}

TEST_CASE("resonance lifts")
{
    using A = std::array<double, 3>;
    CHECK(resonance_lifts(2, 1, LiftMode::keep_left) == A{0, 1, 1});
    CHECK(resonance_lifts(2, 1, LiftMode::move_right) == A{0, 1, 1});
    CHECK(resonance_lifts(3, 1, LiftMode::keep_left) == A{0, 1, 1});
    CHECK(resonance_lifts(3, 1, LiftMode::move_right) == A{0, 2, 2});
    CHECK_THROWS_AS(resonance_lifts(2, 2, LiftMode::keep_left), ContractError);
    CHECK_THROWS_AS(resonance_lifts(2, 0, LiftMode::keep_left), ContractError);
}

TEST_CASE("sap triplets are resonant and adjacent")
{
    const SapTriplet t = sap_triplet(3, 1, LiftMode::keep_left, 2);
    CHECK(t.target == fock(2, 1, 0, 2));
    CHECK(t.intermediate == fock(2, 1, 2, 0));
    const SapTriplet m = sap_triplet(3, 1, LiftMode::move_right, 2);
    CHECK(m.target == fock(2, 2, 0, 1));
    for (double u : {0.1, 0.9}) {
        BHParameters p = params(2, u, {0, 0, 0});
        for (int i = 0; i < 3; ++i) p.lifts[i] = m.lift_multiples[i] * u;
        CHECK(fock_energy(m.intermediate, p) == doctest::Approx(fock_energy(m.initial, p)));
        CHECK(fock_energy(m.target, p) == doctest::Approx(fock_energy(m.initial, p)));
    }
}

TEST_CASE("coupling coefficients")
{
    // a single particle hopping into an empty trap
    CHECK(tunneling_coupling({1}, {1}, {0}, {0}, 0.3) == doctest::Approx(0.3));
    // pair hop into an empty trap: ladder element 2, approximate element 1
    CHECK(ladder_coupling({2}, {2}, {0}, {0}, 0.3) == doctest::Approx(0.6));
    CHECK(tunneling_coupling({2}, {2}, {0}, {0}, 0.3) == doctest::Approx(0.3));
    // single hop out of a doubly occupied trap: sqrt(2)
    CHECK(tunneling_coupling({1}, {1}, {1}, {0}, 1.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(ladder_coupling({1}, {1}, {1}, {0}, 1.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(tunneling_coupling({1}, {2}, {0}, {0}, 1.0), ContractError);
}

TEST_CASE("hamiltonian is hermitian")
{
    for (int n = 1; n <= 4; ++n) {
        const FockBasis b = enumerate_fock_basis(n, 2);
        BHParameters p = params(2, 0.4, {0.0, 0.4, 0.4});
        p.rates.single = {0.01, 0.02};
        p.rates.pair = {0.003, 0.004};
        p.rates.kappa = 0.5;
        const Eigen::MatrixXd h = assemble_bh_hamiltonian(b, p);
        CHECK((h - h.transpose()).norm() == 0.0);
        for (std::size_t k = 0; k < b.size(); ++k) CHECK(h(k, k) == doctest::Approx(fock_energy(b[k], p)));
    }
}

TEST_CASE("one particle in the lowest band is the three-level model")
{
    const FockBasis b = enumerate_fock_basis(1, 1);
    BHParameters p = params(1, 0.0, {0, 0, 0});
    p.rates.single = {0.013, 0.021};
    const Eigen::MatrixXd h = assemble_bh_hamiltonian(b, p);
    const Eigen::Matrix3d ref =
        three_level_hamiltonian({p.rates.single[0], p.rates.single[1]}) + 0.5 * Eigen::Matrix3d::Identity();
    CHECK((h - ref).norm() < 1e-15);
}

TEST_CASE("two particles: lambda structure restricted to the triplet")
{
    const FockBasis b = enumerate_fock_basis(2, 1);
    BHParameters p = params(1, 0.4, {0, 0.4, 0.4});
    p.rates.single = {0.01, 0.02};
    p.rates.pair = {0.001, 0.002};
    const Eigen::MatrixXd h = assemble_bh_hamiltonian(b, p);
    const std::size_t i = *b.find(fock(1, 2, 0, 0)), m = *b.find(fock(1, 1, 1, 0)), t = *b.find(fock(1, 1, 0, 1));
    CHECK(h(i, t) == 0.0);
    CHECK(h(i, m) != 0.0);
    CHECK(h(m, t) != 0.0);
}

TEST_CASE("propagation conserves norm and follows the triplet")
{
    const SapTriplet tri = sap_triplet(2, 1, LiftMode::keep_left, 2);
    const FockBasis b = enumerate_fock_basis(2, 2);
    BHParameters p = params(2, 0.4, {0, 0.4, 0.4});
    const double T = 3000.0;
    const RateSchedule rates = [T](double t) {
        TunnelingRates r;
        const double s23 = std::pow(std::sin(M_PI * std::min(t, 0.75 * T) / (0.75 * T)), 2);
        const double ts = std::max(t - 0.25 * T, 0.0);
        const double s12 = std::pow(std::sin(M_PI * std::min(ts, 0.75 * T) / (0.75 * T)), 2);
        r.single = {0.02 * s12, 0.02 * s23};
        r.pair = {0.002 * s12, 0.002 * s23};
        return r;
    };
    const BHEvolution e = bh_propagate(b, p, tri.initial, tri.target, rates, T, 1.0);
    CHECK(e.norm_error < 1e-9);
    CHECK(e.fidelity > 0.95);
}
