#include "coldsap/reduced_models.hpp"

#include "coldsap/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace coldsap {

Eigen::Matrix3d three_level_hamiltonian(const ThreeLevelCouplings& c)
{
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    h(0, 1) = h(1, 0) = c.omega12;
    h(1, 2) = h(2, 1) = c.omega23;
    return h;
}

ThreeLevelEigen three_level_eigensystem(const ThreeLevelCouplings& c)
{
    if (!std::isfinite(c.omega12) || !std::isfinite(c.omega23))
        throw ContractError("three-level: non-finite couplings");
    const double w = std::hypot(c.omega12, c.omega23);
    if (w == 0.0) throw ContractError("three-level: both couplings are zero (degenerate input)");
    ThreeLevelEigen e;
    e.values << -w, 0.0, w;
    const double a = c.omega12 / w, b = c.omega23 / w;
    const double r = 1.0 / std::sqrt(2.0);
    e.vectors.col(0) << r * a, -r, r * b;
    e.vectors.col(1) << b, 0.0, -a;
    e.vectors.col(2) << r * a, r, r * b;
    return e;
}

Eigen::Vector3d dark_state(double theta)
{
    if (!(theta >= 0.0 && theta <= std::numbers::pi / 2)) throw ContractError("dark state: theta must lie in [0, pi/2]");
    return Eigen::Vector3d(std::cos(theta), 0.0, -std::sin(theta));
}

double mixing_angle(const ThreeLevelCouplings& c)
{
    return std::atan2(c.omega12, c.omega23);
}

CouplingSchedule gaussian_pulses(double duration, double peak, double width, double offset, bool counter_intuitive)
{
    return [=](double t) {
        const double early = peak * std::exp(-std::pow((t - 0.5 * duration + offset) / width, 2));
        const double late = peak * std::exp(-std::pow((t - 0.5 * duration - offset) / width, 2));
        return counter_intuitive ? ThreeLevelCouplings{late, early} : ThreeLevelCouplings{early, late};
    };
}

std::array<double, 2> magnus4_nodes()
{
    const double s = std::sqrt(3.0) / 6.0;
    return {0.5 - s, 0.5 + s};
}

Eigen::MatrixXcd magnus4_propagator(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2, double dt)
{
    const Eigen::MatrixXd comm = a2 * a1 - a1 * a2;
    Eigen::MatrixXcd heff = (0.5 * dt * (a1 + a2)).cast<std::complex<double>>();
    heff += std::complex<double>(0.0, -std::sqrt(3.0) / 12.0 * dt * dt) * comm.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(heff);
    const Eigen::VectorXcd phase = (es.eigenvalues().cast<std::complex<double>>() * std::complex<double>(0.0, -1.0)).array().exp();
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

Eigen::Vector3cd evolve(const CouplingSchedule& schedule, double duration, const Eigen::Vector3cd& initial, long steps,
                        double& max_middle)
{
    const double dt = duration / steps;
    const auto nodes = magnus4_nodes();
    Eigen::Vector3cd psi = initial;
    max_middle = std::norm(psi[1]);
    for (long s = 0; s < steps; ++s) {
        const double t = s * dt;
        const Eigen::MatrixXd a1 = three_level_hamiltonian(schedule(t + nodes[0] * dt));
        const Eigen::MatrixXd a2 = three_level_hamiltonian(schedule(t + nodes[1] * dt));
        psi = magnus4_propagator(a1, a2, dt) * psi;
        max_middle = std::max(max_middle, std::norm(psi[1]));
    }
    return psi;
}

} // namespace

ThreeLevelResult adiabatic_three_level_evolve(const CouplingSchedule& schedule, double duration,
                                              const Eigen::Vector3cd& initial, double tolerance, long initial_steps)
{
    if (!(duration > 0.0)) throw ContractError("three-level evolution: duration must be positive");
    if (std::abs(initial.norm() - 1.0) > 1e-12) throw ContractError("three-level evolution: initial state not normalised");
    long steps = std::max(1L, initial_steps);
    double middle = 0.0;
    Eigen::Vector3cd prev = evolve(schedule, duration, initial, steps, middle);
    for (int round = 0; round < 12; ++round) {
        steps *= 2;
        const Eigen::Vector3cd next = evolve(schedule, duration, initial, steps, middle);
        if ((next - prev).norm() < tolerance) {
            ThreeLevelResult r;
            r.state = next;
            r.transfer = std::norm(next[2]);
            r.max_middle = middle;
            r.norm_error = std::abs(next.norm() - 1.0);
            r.steps = steps;
            return r;
        }
        prev = next;
    }
    throw NumericalError("three-level evolution: no step-size convergence after " + std::to_string(steps) + " steps");
}

} // namespace coldsap
