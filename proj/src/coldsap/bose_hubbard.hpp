#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coldsap {

// Occupations n_ji of level j in trap i (i = 0, 1, 2), stored level-major.
struct FockState {
    int levels = 1;
    std::vector<int> n;

    static FockState empty(int levels);
    int at(int level, int trap) const { return n[3 * level + trap]; }
    int& at(int level, int trap) { return n[3 * level + trap]; }
    int trap_count(int trap) const;
    int level_count(int level) const;
    int total() const;
    bool lowest_band() const;
    // "|2 0 0>" for one level, "|2 0 0; 0 1 0>" with one row per level otherwise.
    std::string label() const;
    bool operator==(const FockState& o) const { return levels == o.levels && n == o.n; }
};

// Ground-level occupations (a, b, c).
FockState fock(int levels, int a, int b, int c);

class FockBasis {
public:
    FockBasis(int particles, int levels, std::vector<FockState> states);

    int particles() const { return particles_; }
    int levels() const { return levels_; }
    std::size_t size() const { return states_.size(); }
    const FockState& operator[](std::size_t k) const { return states_[k]; }
    const std::vector<FockState>& states() const { return states_; }
    std::optional<std::size_t> find(const FockState& s) const;

private:
    int particles_;
    int levels_;
    std::vector<FockState> states_;
    std::map<std::vector<int>, std::size_t> index_;
};

// C(N + 3 m_L - 1, 3 m_L - 1); throws ContractError on overflow.
std::size_t fock_basis_size(int particles, int levels);

// Descending lexicographic order on the flattened occupations.
FockBasis enumerate_fock_basis(int particles, int levels, std::size_t max_size = 2000000);

// Bare p-particle rates for the trap pairs (0,1) and (1,2); p = 1, 2, 3, ...
struct TunnelingRates {
    std::array<double, 2> single{0.0, 0.0};
    std::array<double, 2> pair{0.0, 0.0};
    double kappa = 1.0; // rate(p >= 3) = kappa^(p-2) * pair

    double rate(int link, int p) const;
};

struct BHParameters {
    double omega = 1.0;
    std::vector<double> level_energies; // optional; default omega (j + 1/2)
    double interaction = 0.0;
    std::array<double, 3> lifts{0.0, 0.0, 0.0};
    int levels = 1;
    TunnelingRates rates;

    double level_energy(int j) const;
};

double fock_energy(const FockState& s, const BHParameters& p);

enum class LiftMode { keep_left, move_right };
std::string to_string(LiftMode m);

// Lifts as multiples of U_int: keep_left targets |M 0 N-M>, move_right
// targets |N-M 0 M>.
std::array<double, 3> resonance_lifts(int particles, int moved_or_kept, LiftMode mode);

struct SapTriplet {
    FockState initial, intermediate, target;
    std::array<double, 3> lift_multiples{};
};

// Initial |N 0 0>, target per mode, intermediate chosen as the lowest-band
// state one hop away from both endpoints with equal Fock energy.
SapTriplet sap_triplet(int particles, int m, LiftMode mode, int levels);

// Approximate coupling used in assembly:
// prod_j sqrt((M_j+p_j)!/M_j! (K_j+q_j)!/K_j! / (p_j! q_j!)) * base.
double tunneling_coupling(const std::vector<int>& p, const std::vector<int>& q, const std::vector<int>& m,
                          const std::vector<int>& k, double base);
// Ladder-operator matrix element prod_j sqrt((M_j+p_j)!/M_j! (K_j+q_j)!/K_j!) * base.
double ladder_coupling(const std::vector<int>& p, const std::vector<int>& q, const std::vector<int>& m,
                       const std::vector<int>& k, double base);

// One tunnelling connection between two basis states: H(to, from) =
// H(from, to) = factor * rate(link, p).
struct Hop {
    std::size_t from = 0, to = 0;
    int link = 0;
    int p = 1;
    double factor = 0.0;
};

std::vector<Hop> enumerate_hops(const FockBasis& basis);

Eigen::MatrixXd assemble_bh_hamiltonian(const FockBasis& basis, const BHParameters& p);
Eigen::MatrixXd assemble_bh_hamiltonian(const FockBasis& basis, const BHParameters& p, const std::vector<Hop>& hops);

// Rates as functions of time (from the trap trajectory).
using RateSchedule = std::function<TunnelingRates(double t)>;

struct BHEvolution {
    Eigen::VectorXcd amplitudes;
    double fidelity = 0.0;
    double norm_error = 0.0;
    long steps = 0;
};

// Fourth-order Magnus integration with the diagonal fixed and the hopping
// part rebuilt at the two Gauss nodes of each step. Throws NumericalError
// if the norm drifts by more than 1e-8.
BHEvolution bh_propagate(const FockBasis& basis, const BHParameters& p, const FockState& initial,
                         const FockState& target, const RateSchedule& rates, double duration, double dt);

struct BandScanRow {
    double u = 0.0;
    double triplet = 0.0;
    std::vector<double> energies; // one per basis state, basis order
};

// Decoupled-limit Fock energies with lifts = multiples * U.
std::vector<BandScanRow> bh_spectrum_scan(const FockBasis& basis, const BHParameters& base,
                                          const SapTriplet& triplet, const std::vector<double>& u_values);

} // namespace coldsap
