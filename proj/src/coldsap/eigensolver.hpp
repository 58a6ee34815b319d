#pragma once

#include "coldsap/grid.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace coldsap {

struct Eigenpairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors; // columns, unit Euclidean norm
    Eigen::VectorXd residuals; // ||H v - e v|| per pair
    int iterations = 0;
};

// k lowest eigenpairs of a symmetric tridiagonal matrix (LAPACK dstevr).
Eigenpairs tridiagonal_lowest(const Tridiagonal& t, int k, bool want_vectors = true);

struct SubspaceOptions {
    double tolerance = 1e-9;  // relative: ||r|| <= tol * max(1, |e|)
    int max_iterations = 400;
    int extra_vectors = 4;
    // Optional exchange permutation; iterates are projected onto the sector
    // symmetric under it.
    const std::vector<Eigen::Index>* exchange = nullptr;
    std::uint64_t seed = 20240611;
    const Eigen::MatrixXd* start = nullptr; // warm start columns (optional)
    std::optional<double> shift;            // initial spectral shift
};

// Lowest k eigenpairs of a sparse symmetric operator by shift-invert block
// subspace iteration with Rayleigh-Ritz extraction.
Eigenpairs lowest_eigenpairs(const SparseMatrix& h, int k, const SubspaceOptions& opt = {});

// Lower Gershgorin bound of the spectrum.
double gershgorin_lower(const SparseMatrix& h);

// Permutation (i1, i2) -> (i2, i1) of an n x n two-coordinate grid.
std::vector<Eigen::Index> grid_exchange(int n);
void symmetrize_columns(Eigen::MatrixXd& m, const std::vector<Eigen::Index>& exchange);

} // namespace coldsap
