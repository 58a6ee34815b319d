#include "coldsap/eigensolver.hpp"

#include "coldsap/errors.hpp"

#include <Eigen/SparseCholesky>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace coldsap {

Eigenpairs tridiagonal_lowest(const Tridiagonal& t, int k, bool want_vectors)
{
    const lapack_int n = static_cast<lapack_int>(t.diag.size());
    if (k < 1 || k > n) throw ContractError("tridiagonal eigensolver: k out of range");
    std::vector<double> d(t.diag.data(), t.diag.data() + n);
    std::vector<double> e(n, t.off);
    std::vector<double> w(n);
    std::vector<lapack_int> support(2 * static_cast<size_t>(k));
    Eigen::MatrixXd z(want_vectors ? n : 1, k);
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', n, d.data(), e.data(), 0.0,
                                           0.0, 1, k, 0.0, &found, w.data(), z.data(), want_vectors ? n : 1,
                                           support.data());
    if (info != 0 || found != k)
        throw NumericalError("tridiagonal eigensolver: dstevr failed (info " + std::to_string(info) + ")");

    Eigenpairs out;
    out.values = Eigen::Map<Eigen::VectorXd>(w.data(), k);
    out.residuals = Eigen::VectorXd::Zero(k);
    if (want_vectors) {
        out.vectors = z;
        for (int c = 0; c < k; ++c) {
            const auto v = out.vectors.col(c);
            double r2 = 0.0;
            for (lapack_int i = 0; i < n; ++i) {
                double hv = t.diag[i] * v[i];
                if (i > 0) hv += t.off * v[i - 1];
                if (i + 1 < n) hv += t.off * v[i + 1];
                const double r = hv - out.values[c] * v[i];
                r2 += r * r;
            }
            out.residuals[c] = std::sqrt(r2);
        }
    }
    return out;
}

double gershgorin_lower(const SparseMatrix& h)
{
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(h.rows());
    Eigen::VectorXd radius = Eigen::VectorXd::Zero(h.rows());
    for (int c = 0; c < h.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(h, c); it; ++it) {
            if (it.row() == it.col()) diag[it.row()] = it.value();
            else radius[it.row()] += std::abs(it.value());
        }
    return (diag - radius).minCoeff();
}

std::vector<Eigen::Index> grid_exchange(int n)
{
    std::vector<Eigen::Index> p(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) p[i + static_cast<size_t>(n) * j] = j + static_cast<Eigen::Index>(n) * i;
    return p;
}

void symmetrize_columns(Eigen::MatrixXd& m, const std::vector<Eigen::Index>& exchange)
{
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double* v = m.col(c).data();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const Eigen::Index j = exchange[i];
            if (j <= i) continue;
            const double avg = 0.5 * (v[i] + v[j]);
            v[i] = avg;
            v[j] = avg;
        }
    }
}

namespace {

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

using Factor = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

void factorize(Factor& f, const SparseMatrix& h, double sigma)
{
    SparseMatrix shifted = h;
    for (int i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) -= sigma;
    f.compute(shifted);
    if (f.info() != Eigen::Success) throw NumericalError("eigensolver: factorization of H - sigma failed");
}

} // namespace

Eigenpairs lowest_eigenpairs(const SparseMatrix& h, int k, const SubspaceOptions& opt)
{
    const Eigen::Index n = h.rows();
    if (k < 1 || k >= n) throw ContractError("eigensolver: k out of range");
    const Eigen::Index b = std::min<Eigen::Index>(k + std::max(1, opt.extra_vectors), n);
    const bool bosonic = opt.exchange != nullptr;
    if (bosonic && static_cast<Eigen::Index>(opt.exchange->size()) != n)
        throw ContractError("eigensolver: exchange map size does not match operator");

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(n, b);
    for (Eigen::Index c = 0; c < b; ++c)
        for (Eigen::Index i = 0; i < n; ++i) x(i, c) = normal(rng);
    if (opt.start) {
        const Eigen::Index m = std::min<Eigen::Index>(opt.start->cols(), b);
        if (opt.start->rows() != n) throw ContractError("eigensolver: warm start has wrong length");
        x.leftCols(m) = opt.start->leftCols(m) + 1e-6 * x.leftCols(m);
    }
    if (bosonic) symmetrize_columns(x, *opt.exchange);
    x = orthonormalize(x);

    double sigma = opt.shift ? *opt.shift : gershgorin_lower(h) - 1e-3;
    Factor factor;
    factorize(factor, h, sigma);
    int reshifts = 0;
    double previous = std::numeric_limits<double>::infinity();

    Eigenpairs out;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        Eigen::MatrixXd y = factor.solve(x);
        if (bosonic) symmetrize_columns(y, *opt.exchange);
        const Eigen::MatrixXd q = orthonormalize(y);
        const Eigen::MatrixXd hq = h * q;
        Eigen::MatrixXd t = q.transpose() * hq;
        t = 0.5 * (t + t.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
        const Eigen::VectorXd theta = small.eigenvalues();
        x = q * small.eigenvectors();
        const Eigen::MatrixXd hx = hq * small.eigenvectors();

        Eigen::VectorXd res(k);
        bool done = true;
        for (int c = 0; c < k; ++c) {
            res[c] = (hx.col(c) - theta[c] * x.col(c)).norm();
            if (res[c] > opt.tolerance * std::max(1.0, std::abs(theta[c]))) done = false;
        }
        out.values = theta.head(k);
        out.residuals = res;
        out.iterations = it;
        if (done) {
            out.vectors = x.leftCols(k);
            return out;
        }

        const double spread = std::max(theta[std::min<Eigen::Index>(k, b - 1)] - theta[0], 1e-6 * std::max(1.0, std::abs(theta[0])));
        const double target = theta[0] - 0.2 * spread;
        const bool settled = std::abs(theta[0] - previous) < 1e-4 * std::max(1.0, theta[0] - sigma);
        if (reshifts < 4 && settled && theta[0] - sigma > 3.0 * (theta[0] - target)) {
            sigma = target;
            factorize(factor, h, sigma);
            ++reshifts;
        }
        previous = theta[0];
    }
    std::ostringstream msg;
    msg << "eigensolver: no convergence after " << opt.max_iterations << " iterations; residuals";
    for (int c = 0; c < k; ++c) msg << ' ' << out.residuals[c];
    throw NumericalError(msg.str());
}

} // namespace coldsap
