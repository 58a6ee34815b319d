#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>

namespace coldsap {

struct ThreeLevelCouplings {
    double omega12 = 0.0;
    double omega23 = 0.0;
};

// H = [[0, O12, 0], [O12, 0, O23], [0, O23, 0]].
Eigen::Matrix3d three_level_hamiltonian(const ThreeLevelCouplings& c);

struct ThreeLevelEigen {
    Eigen::Vector3d values;  // ascending: -O, 0, +O
    Eigen::Matrix3d vectors; // columns
};

// Throws ContractError when both couplings vanish.
ThreeLevelEigen three_level_eigensystem(const ThreeLevelCouplings& c);

// cos(theta)|1> - sin(theta)|3>, theta in [0, pi/2].
Eigen::Vector3d dark_state(double theta);

// Mixing angle with tan(theta) = O12 / O23.
double mixing_angle(const ThreeLevelCouplings& c);

using CouplingSchedule = std::function<ThreeLevelCouplings(double t)>;

// Gaussian pulses of height `peak` and width `width` centred at T/2 -+ offset.
// The counter-intuitive order drives 2-3 first.
CouplingSchedule gaussian_pulses(double duration, double peak, double width, double offset, bool counter_intuitive);

struct ThreeLevelResult {
    Eigen::Vector3cd state;
    double transfer = 0.0;         // |<3|psi(T)>|^2
    double max_middle = 0.0;       // max_t |<2|psi(t)>|^2 on the step grid
    double norm_error = 0.0;
    long steps = 0;
};

// Fourth-order Magnus integration; the step count doubles until the final
// state changes by less than `tolerance`. Throws NumericalError otherwise.
ThreeLevelResult adiabatic_three_level_evolve(const CouplingSchedule& schedule, double duration,
                                              const Eigen::Vector3cd& initial, double tolerance = 1e-9,
                                              long initial_steps = 1000);

// exp(-i Heff) for one fourth-order Magnus step with H sampled at the two
// Gauss points a1 = H(t + c1 dt), a2 = H(t + c2 dt).
Eigen::MatrixXcd magnus4_propagator(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2, double dt);

// Gauss-Legendre nodes of the Magnus step as fractions of dt.
std::array<double, 2> magnus4_nodes();

} // namespace coldsap
