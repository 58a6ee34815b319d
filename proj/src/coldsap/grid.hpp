#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <vector>

namespace coldsap {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Uniform grid of interior nodes. The wavefunction vanishes one step beyond
// either end, so trapezoidal quadrature reduces to a plain sum times dx.
struct SpatialGrid {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_points = 3;

    double spacing() const { return (x_max - x_min) / (n_points - 1); }
    double x(int i) const { return x_min + i * spacing(); }
    std::vector<double> points() const;

    // Largest grid with the given spacing that starts at lo and ends at or before hi.
    static SpatialGrid with_spacing(double lo, double hi, double dx);
    // Contiguous index range [first, last] of nodes inside [lo, hi].
    std::pair<int, int> index_range(double lo, double hi) const;
    SpatialGrid sub(int first, int last) const;
    bool same_as(const SpatialGrid& o) const;
};

enum class Symmetry { none, bosonic };

struct Wavefunction {
    SpatialGrid grid;
    int dim = 1;
    // 2D layout: amp[i1 + n * i2].
    Eigen::VectorXcd amp;
    Symmetry symmetry = Symmetry::none;

    static Wavefunction zeros(const SpatialGrid& g, int dim, Symmetry s = Symmetry::none);
    static Wavefunction from_real(const SpatialGrid& g, int dim, const Eigen::VectorXd& v,
                                  Symmetry s = Symmetry::none);

    double norm() const;
    void normalize();
    // max |psi(x1,x2) - psi(x2,x1)| relative to max |psi|.
    double symmetry_defect() const;
    void symmetrize();
};

cplx inner_product(const Wavefunction& a, const Wavefunction& b);
double fidelity(const Wavefunction& a, const Wavefunction& b);

// Embeds a state defined on a contiguous sub-grid (offset `first`) into `target`.
Wavefunction embed(const Wavefunction& part, const SpatialGrid& target, int first);
// Symmetrized product state of two 1D orbitals (normalized).
Wavefunction symmetric_product(const Wavefunction& a, const Wavefunction& b);

// -1/2 d^2/dx^2 + V with three-point differences, Dirichlet ends.
SparseMatrix build_hamiltonian_1p(const SpatialGrid& g, const std::vector<double>& v);
// Kinetic and potential terms for both coordinates plus g/dx on the diagonal x1 = x2.
SparseMatrix build_hamiltonian_2p(const SpatialGrid& g, const std::vector<double>& v, double coupling);

// Structure of the 1p operator as tridiagonal (diag, off) arrays.
struct Tridiagonal {
    Eigen::VectorXd diag;
    double off = 0.0;
};
Tridiagonal tridiagonal_1p(const SpatialGrid& g, const std::vector<double>& v);

} // namespace coldsap
