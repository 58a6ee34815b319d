#include "coldsap/continuum.hpp"

#include "coldsap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace coldsap {

namespace {

constexpr cplx I{0.0, 1.0};

std::vector<double> slice(const std::vector<double>& v, std::pair<int, int> r)
{
    return std::vector<double>(v.begin() + r.first, v.begin() + r.second + 1);
}

} // namespace

double busch_g_from_energy(double e_g)
{
    if (!std::isfinite(e_g)) throw DomainError("busch: non-finite energy");
    const double half = e_g / 2.0;
    if (half >= 1.0 && half == std::floor(half))
        throw DomainError("busch: E_g = " + std::to_string(e_g) + " is a pole (|g| -> infinity)");
    const double b = (1.0 - e_g) / 2.0;
    if (b <= 0.0 && b == std::floor(b)) return 0.0;
    return -2.0 * std::sqrt(2.0) * std::tgamma(1.0 - half) / std::tgamma(b);
}

double interaction_energy(double e_g, double e_0, int n_particles, UnitMode mode)
{
    if (mode == UnitMode::natural) return e_g - n_particles * e_0;
    return e_g - e_0;
}

Eigenpairs single_particle_levels(const SpatialGrid& g, const std::vector<double>& v, int k)
{
    Eigenpairs e = tridiagonal_lowest(tridiagonal_1p(g, v), k);
    e.vectors /= std::sqrt(g.spacing());
    return e;
}

GroundState ground_state_2p(const SpatialGrid& g, const std::vector<double>& v, double coupling)
{
    const SparseMatrix h = build_hamiltonian_2p(g, v, coupling);
    SubspaceOptions opt;
    const std::vector<Eigen::Index> ex = grid_exchange(g.n_points);
    opt.exchange = &ex;
    opt.tolerance = 1e-10;
    const Eigenpairs e = lowest_eigenpairs(h, 1, opt);
    GroundState gs;
    gs.energy = e.values[0];
    gs.residual = e.residuals[0] / std::max(1.0, std::abs(gs.energy));
    gs.psi = Wavefunction::from_real(g, 2, e.vectors.col(0), Symmetry::bosonic);
    gs.psi.normalize();
    return gs;
}

Eigenpairs low_spectrum_2p(const SpatialGrid& g, const std::vector<double>& v, double coupling, int k,
                           const Eigen::MatrixXd* warm_start, std::optional<double> shift)
{
    const SparseMatrix h = build_hamiltonian_2p(g, v, coupling);
    SubspaceOptions opt;
    const std::vector<Eigen::Index> ex = grid_exchange(g.n_points);
    opt.exchange = &ex;
    opt.tolerance = 1e-8;
    opt.start = warm_start;
    opt.shift = shift;
    return lowest_eigenpairs(h, k, opt);
}

void CayleyFactors::build(const SpatialGrid& g, const std::vector<double>& v, double energy_reference, double dt)
{
    const Eigen::Index n = g.n_points;
    const double h = g.spacing();
    const double tau = 0.5 * dt;
    const double off = -0.5 / (h * h);
    beta_plus = I * tau * off;
    beta_minus = -beta_plus;
    alpha_minus.resize(n);
    inv_den.resize(n);
    cprime.resize(n);
    cplx prev_c = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d = 1.0 / (h * h) + v[j] - energy_reference;
        alpha_minus[j] = 1.0 - I * tau * d;
        const cplx den = 1.0 + I * tau * d - beta_plus * prev_c;
        inv_den[j] = 1.0 / den;
        cprime[j] = beta_plus * inv_den[j];
        prev_c = cprime[j];
    }
}

void CayleyFactors::apply(cplx* psi, cplx* r) const
{
    const Eigen::Index n = alpha_minus.size();
    for (Eigen::Index j = 0; j < n; ++j) {
        cplx s = alpha_minus[j] * psi[j];
        if (j > 0) s += beta_minus * psi[j - 1];
        if (j + 1 < n) s += beta_minus * psi[j + 1];
        r[j] = s;
    }
    r[0] *= inv_den[0];
    for (Eigen::Index j = 1; j < n; ++j) r[j] = (r[j] - beta_plus * r[j - 1]) * inv_den[j];
    psi[n - 1] = r[n - 1];
    for (Eigen::Index j = n - 2; j >= 0; --j) psi[j] = r[j] - cprime[j] * psi[j + 1];
}

OrbitalPropagator::OrbitalPropagator(SpatialGrid grid, PotentialFn potential, double energy_reference)
    : grid_(grid), potential_(std::move(potential)), eref_(energy_reference), scratch_(grid.n_points)
{
}

void OrbitalPropagator::step(Eigen::VectorXcd& psi, double t, double dt)
{
    potential_(t + 0.5 * dt, v_);
    factors_.build(grid_, v_, eref_, dt);
    factors_.apply(psi.data(), scratch_.data());
}

PairLattice::PairLattice(SpatialGrid grid) : grid_(grid), n_(grid.n_points), half_((grid.n_points - 1) / 2) {}

SparseMatrix PairLattice::hamiltonian(const std::vector<double>& v, double coupling) const
{
    if (static_cast<int>(v.size()) != n_) throw ContractError("lattice hamiltonian: potential size mismatch");
    if (!std::isfinite(coupling)) throw NumericalError("hamiltonian: non-finite contact strength");
    const double h = grid_.spacing();
    const double off = -0.25 / (h * h);
    const double contact = coupling / (2.0 * h);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * static_cast<size_t>(size()));
    for (int k = -half_; k <= half_; ++k)
        for (int m = 0; m < n_; ++m) {
            const Eigen::Index c = index(m, k);
            if (!valid(m, k)) {
                trip.emplace_back(c, c, 1e6);
                continue;
            }
            const double vi = v[m + k], vj = v[m - k];
            if (!std::isfinite(vi) || !std::isfinite(vj)) throw NumericalError("hamiltonian: non-finite potential");
            trip.emplace_back(c, c, 1.0 / (h * h) + vi + vj + (k == 0 ? contact : 0.0));
            if (valid(m - 1, k)) trip.emplace_back(c, index(m - 1, k), off);
            if (valid(m + 1, k)) trip.emplace_back(c, index(m + 1, k), off);
            if (k > -half_ && valid(m, k - 1)) trip.emplace_back(c, index(m, k - 1), off);
            if (k < half_ && valid(m, k + 1)) trip.emplace_back(c, index(m, k + 1), off);
        }
    SparseMatrix out(size(), size());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

std::vector<Eigen::Index> PairLattice::exchange() const
{
    std::vector<Eigen::Index> p(static_cast<size_t>(size()));
    for (int k = -half_; k <= half_; ++k)
        for (int m = 0; m < n_; ++m) p[index(m, k)] = index(m, -k);
    return p;
}

double PairLattice::symmetry_defect(const Eigen::VectorXcd& a) const
{
    double worst = 0.0;
    for (int k = 1; k <= half_; ++k)
        for (int m = 0; m < n_; ++m) worst = std::max(worst, std::abs(a[index(m, k)] - a[index(m, -k)]));
    const double scale = a.cwiseAbs().maxCoeff();
    return scale > 0.0 ? worst / scale : 0.0;
}

void PairLattice::clear_outside(Eigen::VectorXcd& a) const
{
    for (int k = -half_; k <= half_; ++k)
        for (int m = 0; m < n_; ++m)
            if (!valid(m, k)) a[index(m, k)] = 0.0;
}

Eigen::VectorXcd PairLattice::symmetric_product(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const
{
    if (a.size() != n_ || b.size() != n_) throw ContractError("product state: orbitals do not match the lattice");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(size());
    for (int k = -half_; k <= half_; ++k)
        for (int m = std::abs(k); m < n_ - std::abs(k); ++m)
            out[index(m, k)] = a[m + k] * b[m - k] + b[m + k] * a[m - k];
    const double nn = norm(out);
    if (!(nn > 0.0)) throw NumericalError("product state: zero amplitude");
    return out / std::sqrt(nn);
}

Eigen::VectorXcd PairLattice::hard_core_pair(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const
{
    if (a.size() != n_ || b.size() != n_) throw ContractError("hard-core state: orbitals do not match the lattice");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(size());
    const double r = 1.0 / std::sqrt(2.0);
    for (int k = -half_; k <= half_; ++k) {
        if (k == 0) continue;
        // x2 - x1 = -2 k h
        const double sign = k < 0 ? 1.0 : -1.0;
        for (int m = std::abs(k); m < n_ - std::abs(k); ++m)
            out[index(m, k)] = sign * r * (a[m + k] * b[m - k] - b[m + k] * a[m - k]);
    }
    return out;
}

Eigen::VectorXcd PairLattice::embed(const PairLattice& part, const Eigen::VectorXcd& a, int first) const
{
    if (first < 0 || first + part.rows() > n_ || a.size() != part.size())
        throw ContractError("embed: sub-lattice does not fit");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(size());
    for (int k = -part.half(); k <= part.half(); ++k)
        out.segment(index(first, k), part.rows()) = a.segment(part.index(0, k), part.rows());
    clear_outside(out);
    return out;
}

LatticeState lattice_ground_state(const PairLattice& lat, const std::vector<double>& v, double coupling)
{
    const SparseMatrix h = lat.hamiltonian(v, coupling);
    const std::vector<Eigen::Index> ex = lat.exchange();
    SubspaceOptions opt;
    opt.exchange = &ex;
    opt.tolerance = 1e-10;
    const Eigenpairs e = lowest_eigenpairs(h, 1, opt);
    LatticeState st;
    st.energy = e.values[0];
    st.residual = e.residuals[0] / std::max(1.0, std::abs(st.energy));
    st.amp = e.vectors.col(0).cast<cplx>();
    lat.clear_outside(st.amp);
    st.amp /= std::sqrt(lat.norm(st.amp));
    return st;
}

PairPropagator::PairPropagator(PairLattice lattice, PotentialFn potential, double coupling, double dt,
                               double energy_reference)
    : lat_(lattice), potential_(std::move(potential)), coupling_(coupling), eref_(energy_reference), dt_(dt),
      work_(Eigen::MatrixXcd::Zero(lattice.rows(), lattice.cols())), scratch_(lattice.rows())
{
    if (!std::isfinite(coupling)) throw NumericalError("propagator: non-finite contact strength");
    com_ = build(false, dt);
    rel_ = build(true, dt);
}

PairPropagator::Factors PairPropagator::build(bool relative, double dt) const
{
    constexpr double outside = 1e20;
    const int n = lat_.rows(), c = lat_.cols(), half = lat_.half();
    const double h = lat_.grid().spacing();
    const double tau = 0.5 * dt;
    const double off = -0.25 / (h * h);
    Factors f;
    f.beta_plus = I * tau * off;
    f.beta_minus = -f.beta_plus;
    f.alpha_minus.resize(n, c);
    f.inv_den.resize(n, c);
    f.cprime.resize(n, c);
    auto diag = [&](int m, int k) {
        if (!lat_.valid(m, k)) return outside;
        double d = 0.5 / (h * h);
        if (relative && k == 0) d += coupling_ / (2.0 * h);
        return d;
    };
    auto fill = [&](int m, int k, cplx prev_c) {
        const double d = diag(m, k);
        f.alpha_minus(m, k + half) = d == outside ? cplx(0.0) : 1.0 - I * tau * d;
        const cplx den = 1.0 + I * tau * d - f.beta_plus * prev_c;
        f.inv_den(m, k + half) = 1.0 / den;
        f.cprime(m, k + half) = f.beta_plus / den;
        return f.cprime(m, k + half);
    };
    if (!relative) {
        for (int k = -half; k <= half; ++k) {
            cplx prev = 0.0;
            for (int m = 0; m < n; ++m) prev = fill(m, k, prev);
        }
    } else {
        for (int m = 0; m < n; ++m) {
            cplx prev = 0.0;
            for (int k = -half; k <= half; ++k) prev = fill(m, k, prev);
        }
    }
    return f;
}

void PairPropagator::half_phase(double t, double dt, Eigen::VectorXcd& p)
{
    potential_(t, v_);
    const int n = lat_.rows();
    p.resize(n);
    for (int i = 0; i < n; ++i) p[i] = std::exp(-I * (0.5 * dt * (v_[i] - eref_)));
}

void PairPropagator::apply_phase(Eigen::VectorXcd& amp, const Eigen::VectorXcd& p) const
{
    const int n = lat_.rows(), half = lat_.half();
    for (int k = -half; k <= half; ++k) {
        cplx* col = amp.data() + lat_.index(0, k);
        const int a = std::abs(k);
        for (int m = a; m < n - a; ++m) col[m] *= p[m + k] * p[m - k];
    }
}

void PairPropagator::step(Eigen::VectorXcd& amp, double t, double dt)
{
    if (std::abs(dt - dt_) > 1e-12 * dt_) {
        dt_ = dt;
        com_ = build(false, dt);
        rel_ = build(true, dt);
    }
    const int n = lat_.rows(), c = lat_.cols(), half = lat_.half();
    half_phase(t + 0.5 * dt, dt, open_);
    if (pending_) open_ = open_.cwiseProduct(close_);
    apply_phase(amp, open_);

    Eigen::Map<Eigen::MatrixXcd> a(amp.data(), n, c);
    {
        const Factors& f = com_;
        cplx* r = scratch_.data();
        for (int k = 0; k < c; ++k) {
            const int lo = std::abs(k - half), hi = n - 1 - lo;
            if (lo > hi) continue;
            cplx* psi = a.col(k).data();
            for (int m = lo; m <= hi; ++m) {
                cplx s = f.alpha_minus(m, k) * psi[m];
                if (m > lo) s += f.beta_minus * psi[m - 1];
                if (m < hi) s += f.beta_minus * psi[m + 1];
                r[m] = s;
            }
            r[lo] *= f.inv_den(lo, k);
            for (int m = lo + 1; m <= hi; ++m) r[m] = (r[m] - f.beta_plus * r[m - 1]) * f.inv_den(m, k);
            psi[hi] = r[hi];
            for (int m = hi - 1; m >= lo; --m) psi[m] = r[m] - f.cprime(m, k) * psi[m + 1];
        }
    }
    {
        // Rows outside the box stay exactly zero in both `a` and `work_`.
        const Factors& f = rel_;
        auto rows = [&](int k) { return std::pair<int, int>{std::abs(k - half), n - 2 * std::abs(k - half)}; };
        for (int k = 0; k < c; ++k) {
            const auto [lo, len] = rows(k);
            if (len <= 0) continue;
            auto w = work_.col(k).segment(lo, len);
            w = f.alpha_minus.col(k).segment(lo, len).cwiseProduct(a.col(k).segment(lo, len));
            if (k > 0) w += f.beta_minus * a.col(k - 1).segment(lo, len);
            if (k + 1 < c) w += f.beta_minus * a.col(k + 1).segment(lo, len);
            if (k > 0) w -= f.beta_plus * work_.col(k - 1).segment(lo, len);
            w = w.cwiseProduct(f.inv_den.col(k).segment(lo, len));
        }
        for (int k = c - 1; k >= 0; --k) {
            const auto [lo, len] = rows(k);
            if (len <= 0) continue;
            auto x = a.col(k).segment(lo, len);
            x = work_.col(k).segment(lo, len);
            if (k + 1 < c) x -= f.cprime.col(k).segment(lo, len).cwiseProduct(a.col(k + 1).segment(lo, len));
        }
    }

    half_phase(t + 0.5 * dt, dt, close_);
    pending_ = true;
}

void PairPropagator::finish(Eigen::VectorXcd& amp)
{
    if (!pending_) return;
    apply_phase(amp, close_);
    pending_ = false;
}

namespace {

template <class Step>
PropagationReport run_steps(Step&& step, double t0, double duration, double dt)
{
    if (!(dt > 0.0) || !(duration >= 0.0)) throw ContractError("propagate: need dt > 0 and duration >= 0");
    const long full = static_cast<long>(std::floor(duration / dt + 1e-9));
    const double rest = duration - full * dt;
    double t = t0;
    for (long s = 0; s < full; ++s) {
        step(t, dt);
        t = t0 + (s + 1) * dt;
    }
    PropagationReport rep;
    rep.steps = full;
    if (rest > 1e-12 * dt) {
        step(t, rest);
        ++rep.steps;
    }
    return rep;
}

void check_norm(PropagationReport& rep, double norm, double dt)
{
    rep.norm_error = std::abs(norm - 1.0);
    if (rep.norm_error > 1e-6) {
        std::ostringstream msg;
        msg << "propagate: norm drift " << rep.norm_error << " exceeds 1e-6; reduce the time step (dt = " << dt << ")";
        throw NumericalError(msg.str());
    }
}

} // namespace

PropagationReport propagate(Wavefunction& psi, const PotentialFn& potential, double t0, double duration, double dt,
                            double energy_reference)
{
    if (psi.dim != 1) throw ContractError("propagate: two-particle states are propagated on the pair lattice");
    if (std::abs(psi.norm() - 1.0) > 1e-8) throw ContractError("propagate: initial state is not normalised");
    OrbitalPropagator prop(psi.grid, potential, energy_reference);
    PropagationReport rep = run_steps([&](double t, double h) { prop.step(psi.amp, t, h); }, t0, duration, dt);
    check_norm(rep, psi.norm(), dt);
    return rep;
}

PropagationReport propagate(const PairLattice& lat, Eigen::VectorXcd& amp, const PotentialFn& potential,
                            double coupling, double t0, double duration, double dt, double energy_reference)
{
    if (amp.size() != lat.size()) throw ContractError("propagate: state does not match the lattice");
    if (std::abs(lat.norm(amp) - 1.0) > 1e-8) throw ContractError("propagate: initial state is not normalised");
    PairPropagator prop(lat, potential, coupling, dt, energy_reference);
    PropagationReport rep = run_steps([&](double t, double h) { prop.step(amp, t, h); }, t0, duration, dt);
    prop.finish(amp);
    check_norm(rep, lat.norm(amp), dt);
    return rep;
}

PotentialModel make_potential_model(const ExperimentConfig& cfg)
{
    ScheduleParams s;
    s.duration = cfg.duration;
    s.delay = cfg.delay;
    s.d_max = cfg.d_max;
    s.d_min = cfg.d_min;
    if (cfg.potential == PotentialKind::harmonic) return PotentialModel::harmonic(s, {0.0, 0.0, 0.0});
    const UnitSystem us = cfg.unit_system();
    const double sign = cfg.constants.force() < 0.0 ? -1.0 : 1.0;
    const double force = sign * rf_force_in_units(cfg.constants, us);
    const double rabi = us.rate_from_si(cfg.constants.rabi_frequency);
    return PotentialModel::rf(s, cfg.left_trap_position, force, rabi);
}

ContinuumSetup make_continuum_setup(const ExperimentConfig& cfg)
{
    ContinuumSetup s;
    s.mode = cfg.units;
    s.model = make_potential_model(cfg);
    const auto [lo, hi] = s.model.box(cfg.grid_padding);
    s.grid = SpatialGrid::with_spacing(lo, hi, cfg.grid_spacing);
    s.left = s.grid.index_range(lo, s.model.basin_edges(0.0)[0]);
    std::vector<double> v;
    s.model.sample(s.grid.points(), 0.0, v);
    const Eigenpairs lv = single_particle_levels(s.grid.sub(s.left.first, s.left.second), slice(v, s.left), 2);
    s.e0 = lv.values[0];
    s.e1 = lv.values[1];
    s.energy_reference = s.e0;
    return s;
}

double measured_interaction(const ContinuumSetup& s, double coupling, PairDiscretization d)
{
    std::vector<double> v;
    s.model.sample(s.grid.points(), 0.0, v);
    const SpatialGrid sub = s.grid.sub(s.left.first, s.left.second);
    if (d == PairDiscretization::grid) {
        const GroundState gs = ground_state_2p(sub, slice(v, s.left), coupling);
        return gs.energy - 2.0 * s.e0;
    }
    const PairLattice lat(sub);
    const std::vector<double> vl = slice(v, s.left);
    return lattice_ground_state(lat, vl, coupling).energy - lattice_ground_state(lat, vl, 0.0).energy;
}

InteractionPoint interaction_for(const ContinuumSetup& s, double u_target, PairDiscretization d)
{
    InteractionPoint p;
    p.u_target = u_target;
    const double u_tonks = s.e1 - s.e0;
    const double tonks_target = s.mode == UnitMode::natural ? 1.0 : u_tonks;
    if (u_target >= tonks_target - 1e-12) {
        p.hard_core = true;
        p.coupling = std::numeric_limits<double>::infinity();
        p.u_measured = u_tonks;
        p.pair_energy = s.e0 + s.e1;
        return p;
    }
    if (u_target == 0.0) {
        p.coupling = 0.0;
    } else if (s.mode == UnitMode::natural) {
        p.coupling = busch_g_from_energy(1.0 + u_target);
    } else {
        auto f = [&](double g) { return measured_interaction(s, g, d) - u_target; };
        double a = 0.0, fa = -u_target;
        double b = u_target > 0.0 ? 1.0 : -1.0;
        double fb = f(b);
        while (fa * fb > 0.0) {
            a = b;
            fa = fb;
            b *= 4.0;
            if (std::abs(b) > 1e7) throw NumericalError("interaction: cannot bracket contact strength for U");
            fb = f(b);
        }
        // Illinois variant of regula falsi.
        int side = 0;
        double c = b, fc = fb;
        for (int it = 0; it < 80; ++it) {
            c = (a * fb - b * fa) / (fb - fa);
            fc = f(c);
            if (std::abs(fc) < 1e-9 * std::max(1.0, std::abs(u_target))) break;
            if (fc * fb > 0.0) {
                b = c;
                fb = fc;
                if (side == -1) fa *= 0.5;
                side = -1;
            } else {
                a = c;
                fa = fc;
                if (side == 1) fb *= 0.5;
                side = 1;
            }
        }
        p.coupling = c;
    }
    p.u_measured = measured_interaction(s, p.coupling, d);
    p.pair_energy = p.u_measured + 2.0 * s.e0;
    return p;
}

PotentialModel lifted_model(const ContinuumSetup& s, double lift)
{
    if (s.model.shape() == PotentialShape::harmonic) return s.model.with_lift(0.0, {0.0, lift, lift});
    return s.model.with_lift(lift, {0.0, 0.0, 0.0});
}

namespace {

struct ProtocolStates {
    PotentialModel model;
    std::vector<double> xs;
    Eigen::VectorXd initial;           // square-grid ground state (spectra)
    Eigen::VectorXcd initial_lattice;  // pair-lattice ground state (propagation)
    Wavefunction orbital_a, orbital_b; // hard-core orbitals
};

ProtocolStates initial_states(const ContinuumSetup& s, const InteractionPoint& ip, double lift, PairDiscretization d)
{
    ProtocolStates st;
    st.model = lifted_model(s, lift);
    st.xs = s.grid.points();
    std::vector<double> v;
    st.model.sample(st.xs, 0.0, v);
    const auto range = s.grid.index_range(s.grid.x_min, st.model.basin_edges(0.0)[0]);
    const SpatialGrid sub = s.grid.sub(range.first, range.second);
    if (ip.hard_core) {
        const Eigenpairs lv = single_particle_levels(sub, slice(v, range), 2);
        st.orbital_a = embed(Wavefunction::from_real(sub, 1, lv.vectors.col(0)), s.grid, range.first);
        st.orbital_b = embed(Wavefunction::from_real(sub, 1, lv.vectors.col(1)), s.grid, range.first);
    } else if (d == PairDiscretization::grid) {
        const GroundState gs = ground_state_2p(sub, slice(v, range), ip.coupling);
        st.initial = embed(gs.psi, s.grid, range.first).amp.real();
    } else {
        const PairLattice part(sub);
        const LatticeState gs = lattice_ground_state(part, slice(v, range), ip.coupling);
        st.initial_lattice = PairLattice(s.grid).embed(part, gs.amp, range.first);
    }
    return st;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> separated_orbitals(const ContinuumSetup& s, const PotentialModel& m,
                                                                 double t)
{
    std::vector<double> v;
    m.sample(s.grid.points(), t, v);
    const auto edges = m.basin_edges(t);
    const auto left = s.grid.index_range(s.grid.x_min, edges[0]);
    const auto right = s.grid.index_range(edges[1], s.grid.x_max);
    const SpatialGrid gl = s.grid.sub(left.first, left.second);
    const SpatialGrid gr = s.grid.sub(right.first, right.second);
    const Eigenpairs l = single_particle_levels(gl, slice(v, left), 1);
    const Eigenpairs r = single_particle_levels(gr, slice(v, right), 1);
    const Wavefunction a = embed(Wavefunction::from_real(gl, 1, l.vectors.col(0)), s.grid, left.first);
    const Wavefunction b = embed(Wavefunction::from_real(gr, 1, r.vectors.col(0)), s.grid, right.first);
    return {a.amp, b.amp};
}

} // namespace

SeparationResult run_separation(const ContinuumSetup& s, const ExperimentConfig& cfg, double u_target,
                                double lift_perturbation)
{
    SeparationResult res;
    res.interaction = interaction_for(s, u_target, PairDiscretization::lattice);
    res.lift = res.interaction.u_measured + lift_perturbation;
    ProtocolStates st = initial_states(s, res.interaction, res.lift, PairDiscretization::lattice);
    const PotentialModel model = st.model;
    const std::vector<double> xs = st.xs;
    const PotentialFn pot = [model, xs](double t, std::vector<double>& v) { model.sample(xs, t, v); };
    const double T = cfg.duration;
    const PairLattice lat(s.grid);

    Eigen::VectorXcd final_state;
    if (res.interaction.hard_core) {
        const PropagationReport ra = propagate(st.orbital_a, pot, 0.0, T, cfg.time_step, s.energy_reference);
        const PropagationReport rb = propagate(st.orbital_b, pot, 0.0, T, cfg.time_step, s.energy_reference);
        res.norm_error = std::max(ra.norm_error, rb.norm_error);
        res.steps = ra.steps;
        final_state = lat.hard_core_pair(st.orbital_a.amp, st.orbital_b.amp);
        // Quadrature on the lattice differs slightly from the orbital norms.
        final_state /= std::sqrt(lat.norm(final_state));
    } else {
        const PropagationReport r = propagate(lat, st.initial_lattice, pot, res.interaction.coupling, 0.0, T,
                                              cfg.time_step, s.energy_reference);
        res.norm_error = r.norm_error;
        res.steps = r.steps;
        final_state = std::move(st.initial_lattice);
    }
    res.symmetry_defect = lat.symmetry_defect(final_state);
    const auto [a, b] = separated_orbitals(s, model, T);
    res.fidelity = std::norm(lat.inner(lat.symmetric_product(a, b), final_state));

    double dmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 4000; ++k) {
        const auto [d12, d23] = model.separations(T * k / 4000.0);
        dmin = std::min({dmin, d12, d23});
    }
    res.min_separation = dmin;
    return res;
}

SpectrumResult spectrum_vs_time(const ContinuumSetup& s, const ExperimentConfig& cfg, double u_target, int levels,
                                int snapshots)
{
    if (levels < 4) throw ContractError("spectrum: at least four levels are needed to compare bands");
    if (snapshots < 2) throw ContractError("spectrum: at least two snapshots are needed");
    SpectrumResult out;
    out.interaction = interaction_for(s, u_target);
    // The hard-core limit is represented by a large finite contact strength here.
    const double g = out.interaction.hard_core ? 1e3 : out.interaction.coupling;
    const double lift = out.interaction.u_measured;
    const ProtocolStates st =
        initial_states(s, InteractionPoint{u_target, lift, g, false, 0.0}, lift, PairDiscretization::grid);
    const std::vector<double> xs = s.grid.points();

    Eigen::VectorXd reference = st.initial;
    reference.normalize();
    Eigen::MatrixXd previous;
    std::optional<double> shift;
    std::vector<double> v;
    out.triplet_top = -std::numeric_limits<double>::infinity();
    out.next_bottom = std::numeric_limits<double>::infinity();
    for (int k = 0; k < snapshots; ++k) {
        const double t = cfg.duration * k / (snapshots - 1);
        st.model.sample(xs, t, v);
        const Eigenpairs e = low_spectrum_2p(s.grid, v, g, levels, previous.size() ? &previous : nullptr, shift);
        SpectrumSnapshot snap;
        snap.t = t;
        snap.energies = e.values;
        double best = -1.0;
        for (int c = 0; c < levels; ++c) {
            const double ov = std::abs(reference.dot(e.vectors.col(c)));
            if (ov > best) {
                best = ov;
                snap.dark_index = c;
            }
        }
        snap.dark_overlap = best * best;
        reference = e.vectors.col(snap.dark_index);
        previous = e.vectors;
        shift = e.values[0] - 0.5 * (e.values[levels - 1] - e.values[0]) - 0.05;
        out.triplet_top = std::max(out.triplet_top, e.values[2]);
        out.next_bottom = std::min(out.next_bottom, e.values[3]);
        out.snapshots.push_back(std::move(snap));
    }
    out.bands_overlap = out.triplet_top >= out.next_bottom;
    return out;
}

PairWells calibration_wells(const ContinuumSetup& s, const ExperimentConfig& cfg, double d)
{
    if (!(d > 0.0)) throw ContractError("calibration: separation must be positive");
    PairWells w;
    const double pad = cfg.grid_padding;
    if (s.model.shape() == PotentialShape::harmonic) {
        TripleHarmonicParams p;
        p.d12 = d;
        p.d23 = 1e6;
        w.grid = SpatialGrid::with_spacing(-d - pad, pad, cfg.grid_spacing);
        w.v.resize(w.grid.n_points);
        for (int i = 0; i < w.grid.n_points; ++i) w.v[i] = eval_triple_harmonic(w.grid.x(i), p);
        w.barrier = -0.5 * d;
        return w;
    }
    const RfParams base = s.model.rf_at(0.0);
    const double f = base.force;
    const double x1 = base.omega[1] / f;
    const double dmax = cfg.d_max;
    RfParams p = base;
    p.omega[2] = f * (x1 + 0.5 * d);
    p.omega[3] = f * (x1 + d);
    p.omega[4] = f * (x1 + d + 0.5 * dmax);
    p.omega[5] = f * (x1 + d + dmax);
    w.grid = SpatialGrid::with_spacing(x1 - pad, x1 + d + 0.5 * dmax, cfg.grid_spacing);
    w.v.resize(w.grid.n_points);
    for (int i = 0; i < w.grid.n_points; ++i) w.v[i] = eval_rf_potential(w.grid.x(i), p);
    w.barrier = x1 + 0.5 * d;
    return w;
}

double calibrate_tunneling(const PairWells& w, int p, double coupling)
{
    if (p == 1) {
        const Tridiagonal t = tridiagonal_1p(w.grid, w.v);
        const Eigenpairs e = tridiagonal_lowest(t, 3, false);
        const double split = e.values[1] - e.values[0];
        const double scale = 2.0 / (w.grid.spacing() * w.grid.spacing()) + t.diag.cwiseAbs().maxCoeff();
        if (split < 64.0 * std::numeric_limits<double>::epsilon() * scale)
            throw NumericalError("calibration: single-particle doublet not resolved");
        return 0.5 * split;
    }
    if (p != 2) throw ContractError("calibration: p must be 1 or 2");

    const int levels = 4;
    const Eigenpairs e = low_spectrum_2p(w.grid, w.v, coupling, levels);
    const Eigen::Index n = w.grid.n_points;
    std::vector<std::pair<double, int>> weight;
    for (int c = 0; c < levels; ++c) {
        Eigen::Map<const Eigen::MatrixXd> m(e.vectors.col(c).data(), n, n);
        double same = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if ((w.grid.x(i) < w.barrier) == (w.grid.x(j) < w.barrier)) same += m(i, j) * m(i, j);
        weight.emplace_back(same, c);
    }
    std::sort(weight.begin(), weight.end(), std::greater<>());
    const int a = weight[0].second, b = weight[1].second;
    if (weight[1].first < 0.5) throw NumericalError("calibration: no pair-localised doublet in the low spectrum");
    const double split = std::abs(e.values[a] - e.values[b]);
    const double floor = 1e-13 * std::max(1.0, std::abs(e.values[a])) + std::pow(e.residuals.maxCoeff(), 2);
    if (split < floor) throw NumericalError("calibration: pair doublet not resolved");
    return 0.5 * split;
}

} // namespace coldsap
