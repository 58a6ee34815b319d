#include "coldsap/grid.hpp"

#include "coldsap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace coldsap {

std::vector<double> SpatialGrid::points() const
{
    std::vector<double> xs(n_points);
    for (int i = 0; i < n_points; ++i) xs[i] = x(i);
    return xs;
}

SpatialGrid SpatialGrid::with_spacing(double lo, double hi, double dx)
{
    if (!(dx > 0.0) || !(hi > lo)) throw ContractError("grid: need dx > 0 and hi > lo");
    const int steps = static_cast<int>(std::floor((hi - lo) / dx + 1e-9));
    if (steps < 2) throw ContractError("grid: fewer than 3 points");
    return SpatialGrid{lo, lo + steps * dx, steps + 1};
}

std::pair<int, int> SpatialGrid::index_range(double lo, double hi) const
{
    const double h = spacing();
    int first = static_cast<int>(std::ceil((lo - x_min) / h - 1e-9));
    int last = static_cast<int>(std::floor((hi - x_min) / h + 1e-9));
    first = std::clamp(first, 0, n_points - 1);
    last = std::clamp(last, 0, n_points - 1);
    if (last - first < 2) throw ContractError("grid: sub-range holds fewer than 3 points");
    return {first, last};
}

SpatialGrid SpatialGrid::sub(int first, int last) const
{
    return SpatialGrid{x(first), x(last), last - first + 1};
}

bool SpatialGrid::same_as(const SpatialGrid& o) const
{
    return n_points == o.n_points && std::abs(x_min - o.x_min) < 1e-12 && std::abs(x_max - o.x_max) < 1e-12;
}

Wavefunction Wavefunction::zeros(const SpatialGrid& g, int dim, Symmetry s)
{
    Wavefunction w;
    w.grid = g;
    w.dim = dim;
    w.symmetry = s;
    const Eigen::Index n = g.n_points;
    w.amp = Eigen::VectorXcd::Zero(dim == 1 ? n : n * n);
    return w;
}

Wavefunction Wavefunction::from_real(const SpatialGrid& g, int dim, const Eigen::VectorXd& v, Symmetry s)
{
    Wavefunction w = zeros(g, dim, s);
    if (v.size() != w.amp.size()) throw ContractError("wavefunction: amplitude size does not match grid");
    w.amp = v.cast<cplx>();
    return w;
}

double Wavefunction::norm() const
{
    return amp.squaredNorm() * std::pow(grid.spacing(), dim);
}

void Wavefunction::normalize()
{
    const double n = norm();
    if (!(n > 0.0)) throw NumericalError("wavefunction: cannot normalize a zero state");
    amp /= std::sqrt(n);
}

double Wavefunction::symmetry_defect() const
{
    if (dim != 2) return 0.0;
    const Eigen::Index n = grid.n_points;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) worst = std::max(worst, std::abs(amp[i + n * j] - amp[j + n * i]));
    const double scale = amp.cwiseAbs().maxCoeff();
    return scale > 0.0 ? worst / scale : 0.0;
}

void Wavefunction::symmetrize()
{
    if (dim != 2) return;
    const Eigen::Index n = grid.n_points;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const cplx avg = 0.5 * (amp[i + n * j] + amp[j + n * i]);
            amp[i + n * j] = avg;
            amp[j + n * i] = avg;
        }
    symmetry = Symmetry::bosonic;
}

cplx inner_product(const Wavefunction& a, const Wavefunction& b)
{
    if (a.dim != b.dim || !a.grid.same_as(b.grid)) throw ContractError("inner product: grid mismatch");
    return a.amp.dot(b.amp) * std::pow(a.grid.spacing(), a.dim);
}

double fidelity(const Wavefunction& a, const Wavefunction& b)
{
    return std::norm(inner_product(a, b));
}

Wavefunction embed(const Wavefunction& part, const SpatialGrid& target, int first)
{
    Wavefunction w = Wavefunction::zeros(target, part.dim, part.symmetry);
    const Eigen::Index m = part.grid.n_points;
    const Eigen::Index n = target.n_points;
    if (first < 0 || first + m > n) throw ContractError("embed: sub-grid does not fit");
    if (part.dim == 1) {
        w.amp.segment(first, m) = part.amp;
    } else {
        for (Eigen::Index j = 0; j < m; ++j)
            w.amp.segment(first + n * (first + j), m) = part.amp.segment(m * j, m);
    }
    return w;
}

Wavefunction symmetric_product(const Wavefunction& a, const Wavefunction& b)
{
    if (a.dim != 1 || b.dim != 1 || !a.grid.same_as(b.grid)) throw ContractError("product state: need 1D orbitals on one grid");
    const Eigen::Index n = a.grid.n_points;
    Wavefunction w = Wavefunction::zeros(a.grid, 2, Symmetry::bosonic);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) w.amp[i + n * j] = a.amp[i] * b.amp[j] + b.amp[i] * a.amp[j];
    w.normalize();
    return w;
}

Tridiagonal tridiagonal_1p(const SpatialGrid& g, const std::vector<double>& v)
{
    if (static_cast<int>(v.size()) != g.n_points) throw ContractError("hamiltonian: potential size mismatch");
    const double h = g.spacing();
    Tridiagonal t;
    t.diag.resize(g.n_points);
    for (int i = 0; i < g.n_points; ++i) {
        if (!std::isfinite(v[i]))
            throw NumericalError("hamiltonian: non-finite potential at x = " + std::to_string(g.x(i)));
        t.diag[i] = 1.0 / (h * h) + v[i];
    }
    t.off = -0.5 / (h * h);
    return t;
}

SparseMatrix build_hamiltonian_1p(const SpatialGrid& g, const std::vector<double>& v)
{
    const Tridiagonal t = tridiagonal_1p(g, v);
    const int n = g.n_points;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, t.diag[i]);
        if (i > 0) trip.emplace_back(i, i - 1, t.off);
        if (i + 1 < n) trip.emplace_back(i, i + 1, t.off);
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

SparseMatrix build_hamiltonian_2p(const SpatialGrid& g, const std::vector<double>& v, double coupling)
{
    if (!std::isfinite(coupling)) throw NumericalError("hamiltonian: non-finite contact strength");
    const Tridiagonal t = tridiagonal_1p(g, v);
    const int n = g.n_points;
    const double contact = coupling / g.spacing();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int k = i + n * j;
            double d = t.diag[i] + t.diag[j];
            if (i == j) d += contact;
            trip.emplace_back(k, k, d);
            if (i > 0) trip.emplace_back(k, k - 1, t.off);
            if (i + 1 < n) trip.emplace_back(k, k + 1, t.off);
            if (j > 0) trip.emplace_back(k, k - n, t.off);
            if (j + 1 < n) trip.emplace_back(k, k + n, t.off);
        }
    }
    SparseMatrix m(n * n, n * n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

} // namespace coldsap
