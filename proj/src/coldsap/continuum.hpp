#pragma once

#include "coldsap/config.hpp"
#include "coldsap/eigensolver.hpp"
#include "coldsap/grid.hpp"
#include "coldsap/potentials.hpp"

#include <functional>
#include <optional>

namespace coldsap {

// g = -2 sqrt(2) Gamma(1 - E/2) / Gamma((1 - E)/2), natural units.
// Throws DomainError at E in {2, 4, 6, ...}.
double busch_g_from_energy(double e_g);

// Natural units: E_g - n E_0 with E_0 the single-particle energy.
// RF units: E_g - E_0 with E_0 the non-interacting two-particle energy.
double interaction_energy(double e_g, double e_0, int n_particles, UnitMode mode);

Eigenpairs single_particle_levels(const SpatialGrid& g, const std::vector<double>& v, int k);

struct GroundState {
    double energy = 0.0;
    double residual = 0.0;
    Wavefunction psi;
};

// Lowest bosonic two-particle state; relative residual below 1e-9.
GroundState ground_state_2p(const SpatialGrid& g, const std::vector<double>& v, double coupling);

// k lowest bosonic two-particle eigenpairs (vectors normalised on the grid).
Eigenpairs low_spectrum_2p(const SpatialGrid& g, const std::vector<double>& v, double coupling, int k,
                           const Eigen::MatrixXd* warm_start = nullptr, std::optional<double> shift = {});

using PotentialFn = std::function<void(double t, std::vector<double>& v)>;

// Factorised Crank-Nicolson (Cayley) operator for one coordinate:
// (1 + i dt/2 h)^-1 (1 - i dt/2 h) with h = -1/2 d^2/dx^2 + V - energy_reference.
struct CayleyFactors {
    Eigen::VectorXcd alpha_minus, inv_den, cprime;
    cplx beta_plus, beta_minus;

    void build(const SpatialGrid& g, const std::vector<double>& v, double energy_reference, double dt);
    // In-place on a contiguous vector; `scratch` holds n values.
    void apply(cplx* psi, cplx* scratch) const;
};

// One-particle propagation with the potential sampled at half steps.
class OrbitalPropagator {
public:
    OrbitalPropagator(SpatialGrid grid, PotentialFn potential, double energy_reference = 0.0);
    void step(Eigen::VectorXcd& psi, double t, double dt);

private:
    SpatialGrid grid_;
    PotentialFn potential_;
    double eref_;
    std::vector<double> v_;
    CayleyFactors factors_;
    Eigen::VectorXcd scratch_;
};

// Two-particle states on the centre-of-mass / relative lattice: the nodes
// (i, j) of the square grid with i + j even, indexed by m = (i + j) / 2 and
// k = (i - j) / 2. Amplitudes live in an n x (2K + 1) array (m fastest);
// nodes outside the square box carry zero amplitude.
class PairLattice {
public:
    explicit PairLattice(SpatialGrid grid);

    const SpatialGrid& grid() const { return grid_; }
    int rows() const { return n_; }
    int half() const { return half_; }
    int cols() const { return 2 * half_ + 1; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(rows()) * cols(); }
    Eigen::Index index(int m, int k) const { return m + static_cast<Eigen::Index>(n_) * (k + half_); }
    bool valid(int m, int k) const { return m + k >= 0 && m - k >= 0 && m + k < n_ && m - k < n_; }
    // Area represented by one node.
    double cell() const { return 2.0 * grid_.spacing() * grid_.spacing(); }

    // -1/4 d^2/dR^2 - d^2/dr^2 + V(x1) + V(x2) + g delta(r); nodes outside the
    // box are decoupled with a large diagonal.
    SparseMatrix hamiltonian(const std::vector<double>& v, double coupling) const;
    std::vector<Eigen::Index> exchange() const;

    double norm(const Eigen::VectorXcd& a) const { return a.squaredNorm() * cell(); }
    cplx inner(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const { return a.dot(b) * cell(); }
    double symmetry_defect(const Eigen::VectorXcd& a) const;
    void clear_outside(Eigen::VectorXcd& a) const;

    // Normalised a(x1) b(x2) + b(x1) a(x2) from orbitals on the base grid.
    Eigen::VectorXcd symmetric_product(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const;
    // Hard-core boson state sgn(x2 - x1) (a(x1) b(x2) - b(x1) a(x2)) / sqrt(2).
    Eigen::VectorXcd hard_core_pair(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const;
    // Places a state of the lattice over grid().sub(first, ...) into this one.
    Eigen::VectorXcd embed(const PairLattice& part, const Eigen::VectorXcd& a, int first) const;

private:
    SpatialGrid grid_;
    int n_ = 0;
    int half_ = 0;
};

// Lowest bosonic eigenpair of the lattice Hamiltonian, normalised on the lattice.
struct LatticeState {
    double energy = 0.0;
    double residual = 0.0;
    Eigen::VectorXcd amp;
};
LatticeState lattice_ground_state(const PairLattice& lat, const std::vector<double>& v, double coupling);

// Strang step on the lattice: half potential phase, Cayley factors for the
// centre-of-mass motion and for the relative motion including the contact
// term, half potential phase. The kinetic factors do not depend on time and
// are built once.
class PairPropagator {
public:
    PairPropagator(PairLattice lattice, PotentialFn potential, double coupling, double dt,
                   double energy_reference = 0.0);
    // The closing half phase is deferred and merged into the next step;
    // finish() applies it.
    void step(Eigen::VectorXcd& amp, double t, double dt);
    void finish(Eigen::VectorXcd& amp);

private:
    struct Factors {
        Eigen::MatrixXcd alpha_minus, inv_den, cprime;
        cplx beta_plus, beta_minus;
    };
    Factors build(bool relative, double dt) const;
    void half_phase(double t, double dt, Eigen::VectorXcd& p);
    void apply_phase(Eigen::VectorXcd& amp, const Eigen::VectorXcd& p) const;

    PairLattice lat_;
    PotentialFn potential_;
    double coupling_;
    double eref_;
    double dt_;
    Factors com_, rel_;
    std::vector<double> v_;
    Eigen::VectorXcd open_, close_;
    bool pending_ = false;
    Eigen::MatrixXcd work_;
    Eigen::VectorXcd scratch_;
};

struct PropagationReport {
    double norm_error = 0.0;
    long steps = 0;
};

// Evolves psi from t0 to t0 + duration; the last step may be shorter.
// Throws NumericalError when the norm drifts by more than 1e-6.
PropagationReport propagate(Wavefunction& psi, const PotentialFn& potential, double t0, double duration, double dt,
                            double energy_reference = 0.0);
// Two-particle version on the pair lattice.
PropagationReport propagate(const PairLattice& lat, Eigen::VectorXcd& amp, const PotentialFn& potential,
                            double coupling, double t0, double duration, double dt, double energy_reference = 0.0);

// Everything derived from a config that the continuum experiments share.
struct ContinuumSetup {
    UnitMode mode = UnitMode::natural;
    PotentialModel model;      // without lifts
    SpatialGrid grid;
    std::pair<int, int> left{}; // index range of the left basin at t = 0
    double e0 = 0.0;            // left-trap single-particle levels
    double e1 = 0.0;
    double energy_reference = 0.0;
};

ContinuumSetup make_continuum_setup(const ExperimentConfig& cfg);
PotentialModel make_potential_model(const ExperimentConfig& cfg);

struct InteractionPoint {
    double u_target = 0.0;
    double u_measured = 0.0;
    double coupling = 0.0;
    bool hard_core = false;
    double pair_energy = 0.0;
};

// Contact strength reproducing u_target in the left trap. Natural units use
// the Busch relation; rf units solve for g on the grid. Targets at or above
// the Tonks value select the hard-core limit.
// Interaction energies are measured either with the square-grid Hamiltonian
// (spectra, calibration) or with the pair lattice used for propagation.
enum class PairDiscretization { grid, lattice };

InteractionPoint interaction_for(const ContinuumSetup& s, double u_target,
                                 PairDiscretization d = PairDiscretization::grid);
// Measured left-trap interaction energy for a given contact strength.
double measured_interaction(const ContinuumSetup& s, double coupling, PairDiscretization d = PairDiscretization::grid);

// Lifted protocol for N = 2: middle and right raised (harmonic) or left
// lowered (rf) by `lift`.
PotentialModel lifted_model(const ContinuumSetup& s, double lift);

struct SeparationResult {
    InteractionPoint interaction;
    double lift = 0.0;
    double fidelity = 0.0;
    double norm_error = 0.0;
    double symmetry_defect = 0.0;
    double min_separation = 0.0;
    long steps = 0;
};

SeparationResult run_separation(const ContinuumSetup& s, const ExperimentConfig& cfg, double u_target,
                                double lift_perturbation);

struct SpectrumSnapshot {
    double t = 0.0;
    Eigen::VectorXd energies;
    int dark_index = -1;
    double dark_overlap = 0.0;
};

struct SpectrumResult {
    InteractionPoint interaction;
    std::vector<SpectrumSnapshot> snapshots;
    // Lowest band = the SAP triplet (levels 1-3); next band starts at level 4.
    bool bands_overlap = false;
    double triplet_top = 0.0;
    double next_bottom = 0.0;
};

SpectrumResult spectrum_vs_time(const ContinuumSetup& s, const ExperimentConfig& cfg, double u_target, int levels,
                                int snapshots);

struct TunnelingPoint {
    double d = 0.0;
    std::optional<double> rate1;
    std::optional<double> rate2;
    std::string note;
};

// Two adjacent traps of the configured potential at separation d.
struct PairWells {
    SpatialGrid grid;
    std::vector<double> v;
    double barrier = 0.0;
};
PairWells calibration_wells(const ContinuumSetup& s, const ExperimentConfig& cfg, double d);

// p = 1: half the single-particle doublet splitting. p = 2: half the
// splitting of the pair-localised two-particle doublet at contact g.
double calibrate_tunneling(const PairWells& w, int p, double coupling);

} // namespace coldsap
