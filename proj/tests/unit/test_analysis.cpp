#include "coldsap/analysis.hpp"
#include "coldsap/errors.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>

using namespace coldsap;

TEST_CASE("parallel map keeps order and forwards errors")
{
    const auto out = parallel_map(50, 4, [](std::size_t k) { return int(k * k); });
    for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k] == int(k * k));
    CHECK_THROWS_AS(parallel_map(10, 3,
                                 [](std::size_t k) {
                                     if (k == 7) throw NumericalError("boom");
                                     return 0;
                                 }),
                    NumericalError);
}

TEST_CASE("linear crossings are exact")
{
    const std::vector<double> u = linspace(-1.0, 1.0, 7);
    std::vector<double> tri, band;
    for (double x : u) {
        tri.push_back(0.3 + 0.5 * x);
        band.push_back(0.1 + 1.7 * x);
    }
    const auto roots = detect_crossings(u, {band}, tri);
    REQUIRE(roots.size() == 1);
    CHECK(std::abs(roots[0] - 0.2 / 1.2) < 1e-10);
}

TEST_CASE("bose-hubbard crossings")
{
    const std::vector<double> u = linspace(-0.5, 1.0, 301);
    const auto two = bh_crossings(2, 1, LiftMode::keep_left, 2, u);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(std::abs(two[1]) < 1e-6);
    const auto three = bh_crossings(3, 1, LiftMode::keep_left, 2, u);
    REQUIRE(three.size() == 3);
    CHECK(three[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-6));
    CHECK(std::abs(three[1]) < 1e-6);
    CHECK(three[2] == doctest::Approx(1.0).epsilon(1e-6));
    for (double r : bh_crossings(3, 1, LiftMode::move_right, 2, u)) CHECK(r <= 1e-9);
}

TEST_CASE("gap metrics match a dense scan over all fock energies")
{
    for (int moved = 1; moved <= 3; ++moved) {
        const int n = moved + 2, m = n - moved;
        const GapMetrics g = gap_metrics(n, m, LiftMode::keep_left, 3, 1.0);
        CHECK(g.gap >= 0.0);

        const FockBasis b = enumerate_fock_basis(n, 3);
        const SapTriplet tri = sap_triplet(n, m, LiftMode::keep_left, 3);
        auto at = [&](double u) {
            BHParameters p;
            p.levels = 3;
            p.interaction = u;
            for (int i = 0; i < 3; ++i) p.lifts[i] = tri.lift_multiples[i] * u;
            return p;
        };
        // states resonant with the triplet at every U are part of the manifold
        std::vector<FockState> others;
        for (const FockState& s : b.states()) {
            bool resonant = true;
            for (double u : {0.37, 0.81})
                if (std::abs(fock_energy(s, at(u)) - fock_energy(tri.initial, at(u))) > 1e-12) resonant = false;
            if (!resonant) others.push_back(s);
        }
        double best = -1.0;
        for (double u : linspace(0.0, 1.0, 20001)) {
            const BHParameters p = at(u);
            const double et = fock_energy(tri.initial, p);
            double gap = 1e300;
            for (const FockState& s : others) gap = std::min(gap, std::abs(fock_energy(s, p) - et));
            best = std::max(best, gap);
        }
        CHECK(g.gap == doctest::Approx(best).epsilon(1e-4));
        if (!g.open) {
            CHECK(g.left <= g.u_opt);
            CHECK(g.u_opt <= g.right);
        }
    }
    CHECK_THROWS_AS(gap_metrics(2, 2, LiftMode::keep_left, 3, 1.0), ContractError);
}

TEST_CASE("scaling structure")
{
    const auto rows = scaling_study(6, 4, LiftMode::keep_left, 3, 1.0);
    double first = -1.0;
    for (const auto& r : rows)
        if (r.moved == 1) {
            if (first < 0.0) first = r.metrics.gap;
            CHECK(std::abs(r.metrics.gap - first) < 1e-10);
        }
    for (int k = 1; k <= 4; ++k)
        for (const auto& a : rows)
            for (const auto& b : rows)
                if (a.moved == k && b.moved == k) CHECK(std::abs(a.metrics.gap - b.metrics.gap) < 1e-10);
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 4; ++k) {
        const auto& r = *std::find_if(rows.begin(), rows.end(), [&](const ScalingRow& x) { return x.moved == k; });
        if (k > 1) CHECK(r.metrics.width < last);
        last = r.metrics.width;
    }
    CHECK_THROWS_AS(scaling_study(4, 0, LiftMode::keep_left, 3, 1.0), ContractError);
}

TEST_CASE("dips")
{
    const std::vector<double> u{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const std::vector<double> f{0.6, 0.95, 0.5, 0.97, 0.96, 0.93, 0.99};
    const auto d = find_dips(u, f, 0.1);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.2);
    CHECK(dip_mismatch({0.0, -0.5}, {0.04, -0.45}) == doctest::Approx(0.05));
    CHECK(dip_mismatch({0.0}, {}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("exponential fit")
{
    std::vector<double> d;
    std::vector<std::optional<double>> r;
    for (double x = 2.0; x <= 7.0; x += 0.5) {
        d.push_back(x);
        r.push_back(0.7 * std::exp(-1.3 * x));
    }
    r.push_back(1e-12);
    d.push_back(30.0);
    r[3].reset();
    const ExpFit f = fit_exponential(d, r);
    CHECK(f.amplitude == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(f.decay == doctest::Approx(1.3).epsilon(1e-10));
    CHECK(f.points == 10);
    CHECK_THROWS_AS(fit_exponential({1.0}, {0.1}), NumericalError);

    std::vector<std::optional<double>> floored;
    for (double x : d) floored.push_back(std::max(0.7 * std::exp(-1.3 * x), 2e-4));
    const ExpFit g = fit_exponential(d, floored);
    CHECK(g.decay == doctest::Approx(1.3).epsilon(0.05));
    CHECK(g.points == 10);
}

TEST_CASE("rf design")
{
    const ExperimentConfig cfg = parse_config("units = rf\n");
    const RfDesign d = rf_design(cfg);
    CHECK(d.minima.position[0] == doctest::Approx(20.0).epsilon(0.01));
    CHECK(d.max_jump < 0.01);
    CHECK(d.min_separation > 2.0);
    CHECK_THROWS_AS(rf_design(parse_config("units = natural\n")), ContractError);
}
