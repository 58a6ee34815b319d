#include "coldsap/config.hpp"
#include "coldsap/continuum.hpp"
#include "coldsap/errors.hpp"
#include "coldsap/potentials.hpp"

#include <doctest.h>

#include <cmath>

using namespace coldsap;

TEST_CASE("triple harmonic potential")
{
    TripleHarmonicParams p;
    p.d12 = 6.0;
    p.d23 = 7.0;
    p.lifts = {0.0, 0.3, 0.3};
    // traps at -d12, 0 and d23
    CHECK(eval_triple_harmonic(-6.0, p) == 0.0);
    CHECK(eval_triple_harmonic(0.0, p) == doctest::Approx(0.3));
    CHECK(eval_triple_harmonic(7.0, p) == doctest::Approx(0.3));
    CHECK(eval_triple_harmonic(-5.0, p) == doctest::Approx(0.5));
    CHECK(harmonic_trap_index(-5.0, p) == 0);
    CHECK(harmonic_trap_index(6.0, p) == 2);
    // continuous across the crossing of neighbouring parabolas
    for (double x = -9.0; x < 10.0; x += 0.001)
        CHECK(std::abs(eval_triple_harmonic(x + 1e-7, p) - eval_triple_harmonic(x, p)) < 1e-5);
}

TEST_CASE("pulse bump")
{
    CHECK(bump(0.0, 0.0, 100.0) == 0.0);
    CHECK(bump(25.0, 0.0, 100.0) == doctest::Approx(1.0));
    CHECK(bump(60.0, 0.0, 100.0) == 0.0);
    CHECK(bump(35.0, 10.0, 100.0) == doctest::Approx(1.0));
    CHECK(bump(5.0, 10.0, 100.0) == 0.0);
}

TEST_CASE("harmonic schedule brings the empty pair together first")
{
    ScheduleParams s;
    const auto [d12a, d23a] = harmonic_schedule(0.0, s);
    CHECK(d12a == s.d_max);
    CHECK(d23a == s.d_max);
    const auto [d12, d23] = harmonic_schedule(0.25 * s.duration, s);
    CHECK(d23 == doctest::Approx(s.d_min));
    CHECK(d12 > d23);
    const auto [d12e, d23e] = harmonic_schedule(s.duration, s);
    CHECK(d12e == doctest::Approx(s.d_max));
    CHECK(d23e == doctest::Approx(s.d_max));
}

TEST_CASE("rf design geometry")
{
    const ExperimentConfig cfg = parse_config("units = rf\n");
    const PotentialModel m = make_potential_model(cfg);
    const RfParams p = m.rf_at(0.0);
    const TrapMinima mins = locate_trap_minima(p);
    CHECK(mins.position[0] == doctest::Approx(20.0).epsilon(0.01));
    CHECK(mins.position[1] - mins.position[0] == doctest::Approx(9.0).epsilon(0.02));
    CHECK(mins.position[2] - mins.position[1] == doctest::Approx(9.0).epsilon(0.02));
    for (const auto& j : rf_region_jumps(p)) CHECK(std::abs(j.jump) < 0.01);
    for (int k = 0; k < 100; ++k) {
        const double x = 16.0 + 0.27 * k;
        const int n = dominant_frequency_index(x, p);
        CHECK(eval_rf_potential(x, p) == eval_rf_branch(x, n, p));
    }
}

TEST_CASE("rf schedule keeps frequencies ordered and lifts the left trap")
{
    const ExperimentConfig cfg = parse_config("units = rf\n");
    const PotentialModel m = make_potential_model(cfg);
    const auto base = m.rf_at(0.0).omega;
    for (int i = 0; i < 5; ++i) CHECK(base[i] < base[i + 1]);
    const PotentialModel lifted = m.with_lift(0.5, {0.0, 0.0, 0.0});
    const double drop = m.rf_at(0.0).omega[0] - lifted.rf_at(0.0).omega[0];
    CHECK(drop == doctest::Approx(0.5));
}
