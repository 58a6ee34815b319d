#include "coldsap/bose_hubbard.hpp"

#include "coldsap/errors.hpp"
#include "coldsap/reduced_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace coldsap {

FockState FockState::empty(int levels)
{
    if (levels < 1) throw ContractError("fock state: need at least one level");
    FockState s;
    s.levels = levels;
    s.n.assign(3 * static_cast<size_t>(levels), 0);
    return s;
}

int FockState::trap_count(int trap) const
{
    int c = 0;
    for (int j = 0; j < levels; ++j) c += at(j, trap);
    return c;
}

int FockState::level_count(int level) const
{
    return at(level, 0) + at(level, 1) + at(level, 2);
}

int FockState::total() const
{
    int c = 0;
    for (int v : n) c += v;
    return c;
}

bool FockState::lowest_band() const
{
    return level_count(0) == total();
}

std::string FockState::label() const
{
    std::ostringstream out;
    out << '|';
    for (int j = 0; j < levels; ++j) {
        if (j > 0) out << "; ";
        out << at(j, 0) << ' ' << at(j, 1) << ' ' << at(j, 2);
    }
    out << '>';
    return out.str();
}

FockState fock(int levels, int a, int b, int c)
{
    if (a < 0 || b < 0 || c < 0) throw ContractError("fock state: negative occupation");
    FockState s = FockState::empty(levels);
    s.at(0, 0) = a;
    s.at(0, 1) = b;
    s.at(0, 2) = c;
    return s;
}

FockBasis::FockBasis(int particles, int levels, std::vector<FockState> states)
    : particles_(particles), levels_(levels), states_(std::move(states))
{
    for (size_t k = 0; k < states_.size(); ++k) index_.emplace(states_[k].n, k);
}

std::optional<std::size_t> FockBasis::find(const FockState& s) const
{
    if (s.levels != levels_) return std::nullopt;
    auto it = index_.find(s.n);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t fock_basis_size(int particles, int levels)
{
    if (particles < 1 || levels < 1) throw ContractError("fock basis: need N >= 1 and m_L >= 1");
    const long long slots = 3LL * levels;
    // C(N + slots - 1, N) built incrementally; each partial product is itself a binomial.
    unsigned long long c = 1;
    for (int k = 1; k <= particles; ++k) {
        const unsigned long long num = static_cast<unsigned long long>(slots - 1 + k);
        if (c > std::numeric_limits<unsigned long long>::max() / num)
            throw ContractError("fock basis: size overflows");
        c = c * num / k;
    }
    return static_cast<std::size_t>(c);
}

FockBasis enumerate_fock_basis(int particles, int levels, std::size_t max_size)
{
    const std::size_t expected = fock_basis_size(particles, levels);
    if (expected > max_size) {
        std::ostringstream msg;
        msg << "fock basis: " << expected << " states exceed the limit of " << max_size;
        throw ContractError(msg.str());
    }
    const int slots = 3 * levels;
    std::vector<FockState> out;
    out.reserve(expected);
    FockState cur = FockState::empty(levels);
    std::function<void(int, int)> fill = [&](int pos, int left) {
        if (pos == slots - 1) {
            cur.n[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur.n[pos] = v;
            fill(pos + 1, left - v);
        }
    };
    fill(0, particles);
    return FockBasis(particles, levels, std::move(out));
}

double TunnelingRates::rate(int link, int p) const
{
    if (link < 0 || link > 1 || p < 1) throw ContractError("tunnelling rate: bad link or particle count");
    if (p == 1) return single[link];
    if (p == 2) return pair[link];
    return std::pow(kappa, p - 2) * pair[link];
}

double BHParameters::level_energy(int j) const
{
    if (j < static_cast<int>(level_energies.size())) return level_energies[j];
    return omega * (j + 0.5);
}

double fock_energy(const FockState& s, const BHParameters& p)
{
    double e = 0.0;
    for (int j = 0; j < s.levels; ++j) e += p.level_energy(j) * s.level_count(j);
    for (int i = 0; i < 3; ++i) {
        const int c = s.trap_count(i);
        e += p.lifts[i] * c + 0.5 * p.interaction * c * (c - 1);
    }
    return e;
}

std::string to_string(LiftMode m)
{
    return m == LiftMode::keep_left ? "keep" : "move";
}

std::array<double, 3> resonance_lifts(int particles, int m, LiftMode mode)
{
    if (m <= 0 || m >= particles) throw ContractError("resonance lifts: need 0 < M < N");
    const double k = mode == LiftMode::keep_left ? m : particles - m;
    return {0.0, k, k};
}

namespace {

// True when `to` follows from `from` by moving particles from trap `link` to
// trap `link + 1`; p receives the number moved.
bool hop_between(const FockState& from, const FockState& to, int link, int& p)
{
    int moved_out = 0, moved_in = 0;
    for (int j = 0; j < from.levels; ++j) {
        for (int i = 0; i < 3; ++i)
            if (i != link && i != link + 1 && from.at(j, i) != to.at(j, i)) return false;
        const int out = from.at(j, link) - to.at(j, link);
        const int in = to.at(j, link + 1) - from.at(j, link + 1);
        if (out < 0 || in < 0) return false;
        moved_out += out;
        moved_in += in;
    }
    p = moved_out;
    return moved_out == moved_in && moved_out > 0;
}

bool adjacent(const FockState& a, const FockState& b, int link)
{
    int p = 0;
    return hop_between(a, b, link, p) || hop_between(b, a, link, p);
}

double log_factorial(int n)
{
    return std::lgamma(n + 1.0);
}

void check_config(const std::vector<int>& p, const std::vector<int>& q, const std::vector<int>& m,
                  const std::vector<int>& k)
{
    const size_t n = p.size();
    if (q.size() != n || m.size() != n || k.size() != n) throw ContractError("coupling: level vectors differ in length");
    int sp = 0, sq = 0;
    for (size_t j = 0; j < n; ++j) {
        if (p[j] < 0 || q[j] < 0 || m[j] < 0 || k[j] < 0) throw ContractError("coupling: negative occupation");
        sp += p[j];
        sq += q[j];
    }
    if (sp != sq || sp < 1) throw ContractError("coupling: need sum p = sum q >= 1");
}

} // namespace

SapTriplet sap_triplet(int particles, int m, LiftMode mode, int levels)
{
    SapTriplet t;
    t.lift_multiples = resonance_lifts(particles, m, mode);
    const int left = mode == LiftMode::keep_left ? m : particles - m;
    t.initial = fock(levels, particles, 0, 0);
    t.target = fock(levels, left, 0, particles - left);

    // Equal energy must hold for any U; two generic values guard against accidents.
    const FockBasis ground = enumerate_fock_basis(particles, 1);
    for (const FockState& s1 : ground.states()) {
        const FockState s = fock(levels, s1.at(0, 0), s1.at(0, 1), s1.at(0, 2));
        if (s.at(0, 1) == 0 || !adjacent(t.initial, s, 0) || !adjacent(s, t.target, 1)) continue;
        bool equal = true;
        for (double u : {0.3711, 0.8123}) {
            BHParameters p;
            p.levels = levels;
            p.interaction = u;
            for (int i = 0; i < 3; ++i) p.lifts[i] = t.lift_multiples[i] * u;
            if (std::abs(fock_energy(s, p) - fock_energy(t.initial, p)) > 1e-12) equal = false;
        }
        if (equal) {
            t.intermediate = s;
            return t;
        }
    }
    throw ContractError("sap triplet: no resonant intermediate state");
}

double ladder_coupling(const std::vector<int>& p, const std::vector<int>& q, const std::vector<int>& m,
                       const std::vector<int>& k, double base)
{
    check_config(p, q, m, k);
    double log_f = 0.0;
    for (size_t j = 0; j < p.size(); ++j)
        log_f += log_factorial(m[j] + p[j]) - log_factorial(m[j]) + log_factorial(k[j] + q[j]) - log_factorial(k[j]);
    return std::exp(0.5 * log_f) * base;
}

double tunneling_coupling(const std::vector<int>& p, const std::vector<int>& q, const std::vector<int>& m,
                          const std::vector<int>& k, double base)
{
    check_config(p, q, m, k);
    double log_f = 0.0;
    for (size_t j = 0; j < p.size(); ++j)
        log_f += log_factorial(m[j] + p[j]) - log_factorial(m[j]) + log_factorial(k[j] + q[j]) - log_factorial(k[j]) -
                 log_factorial(p[j]) - log_factorial(q[j]);
    return std::exp(0.5 * log_f) * base;
}

std::vector<Hop> enumerate_hops(const FockBasis& basis)
{
    std::vector<Hop> hops;
    const int levels = basis.levels();
    std::vector<int> p(levels), q(levels), m(levels), k(levels);
    for (size_t a = 0; a < basis.size(); ++a) {
        const FockState& s = basis[a];
        for (size_t b = 0; b < basis.size(); ++b) {
            if (a == b) continue;
            for (int link = 0; link < 2; ++link) {
                int moved = 0;
                if (!hop_between(s, basis[b], link, moved)) continue;
                const FockState& t = basis[b];
                for (int j = 0; j < levels; ++j) {
                    p[j] = s.at(j, link) - t.at(j, link);
                    q[j] = t.at(j, link + 1) - s.at(j, link + 1);
                    m[j] = t.at(j, link);
                    k[j] = s.at(j, link + 1);
                }
                hops.push_back(Hop{a, b, link, moved, tunneling_coupling(p, q, m, k, 1.0)});
            }
        }
    }
    return hops;
}

Eigen::MatrixXd assemble_bh_hamiltonian(const FockBasis& basis, const BHParameters& p)
{
    return assemble_bh_hamiltonian(basis, p, enumerate_hops(basis));
}

Eigen::MatrixXd assemble_bh_hamiltonian(const FockBasis& basis, const BHParameters& p, const std::vector<Hop>& hops)
{
    if (basis.levels() != p.levels) throw ContractError("bh hamiltonian: basis and parameters disagree on m_L");
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) h(a, a) = fock_energy(basis[a], p);
    for (const Hop& hop : hops) {
        const double r = p.rates.rate(hop.link, hop.p);
        if (r < 0.0) throw ContractError("bh hamiltonian: negative tunnelling rate");
        const double v = hop.factor * r;
        h(hop.to, hop.from) += v;
        h(hop.from, hop.to) += v;
    }
    return h;
}

BHEvolution bh_propagate(const FockBasis& basis, const BHParameters& p, const FockState& initial,
                         const FockState& target, const RateSchedule& rates, double duration, double dt)
{
    if (!(dt > 0.0) || !(duration >= 0.0)) throw ContractError("bh propagation: need dt > 0 and T >= 0");
    const auto i0 = basis.find(initial);
    const auto it = basis.find(target);
    if (!i0 || !it) throw ContractError("bh propagation: initial or target state not in the basis");
    const std::vector<Hop> hops = enumerate_hops(basis);
    BHParameters frozen = p;
    frozen.rates = TunnelingRates{};
    const Eigen::MatrixXd diag = assemble_bh_hamiltonian(basis, frozen, {});
    auto hamiltonian = [&](double t) {
        Eigen::MatrixXd h = diag;
        const TunnelingRates r = rates(t);
        for (const Hop& hop : hops) {
            const double v = hop.factor * r.rate(hop.link, hop.p);
            h(hop.to, hop.from) += v;
            h(hop.from, hop.to) += v;
        }
        return h;
    };

    BHEvolution out;
    out.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    out.amplitudes[*i0] = 1.0;
    const long full = static_cast<long>(std::floor(duration / dt + 1e-9));
    const double rest = duration - full * dt;
    const auto nodes = magnus4_nodes();
    auto advance = [&](double t, double h) {
        out.amplitudes = magnus4_propagator(hamiltonian(t + nodes[0] * h), hamiltonian(t + nodes[1] * h), h) *
                         out.amplitudes;
    };
    for (long s = 0; s < full; ++s) advance(s * dt, dt);
    out.steps = full;
    if (rest > 1e-12 * dt) {
        advance(full * dt, rest);
        ++out.steps;
    }
    out.norm_error = std::abs(out.amplitudes.norm() - 1.0);
    if (out.norm_error > 1e-8) {
        std::ostringstream msg;
        msg << "bh propagation: norm drift " << out.norm_error << " exceeds 1e-8";
        throw NumericalError(msg.str());
    }
    out.fidelity = std::norm(out.amplitudes[*it]);
    return out;
}

std::vector<BandScanRow> bh_spectrum_scan(const FockBasis& basis, const BHParameters& base,
                                          const SapTriplet& triplet, const std::vector<double>& u_values)
{
    std::vector<BandScanRow> rows;
    rows.reserve(u_values.size());
    for (double u : u_values) {
        BHParameters p = base;
        p.interaction = u;
        for (int i = 0; i < 3; ++i) p.lifts[i] = triplet.lift_multiples[i] * u;
        BandScanRow r;
        r.u = u;
        r.triplet = fock_energy(triplet.initial, p);
        r.energies.reserve(basis.size());
        for (const FockState& s : basis.states()) r.energies.push_back(fock_energy(s, p));
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace coldsap
