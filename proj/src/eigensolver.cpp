#include "sublab/eigensolver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <random>
#include <sstream>

namespace sublab {

namespace {

CMatrix random_block(long rows, long cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix B(rows, cols);
    for (long j = 0; j < cols; ++j)
        for (long i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            B(i, j) = cd(re, im);
        }
    return B;
}

// Orthonormalizes X against the first `used` columns of Q and within itself.
// Columns that collapse are replaced by fresh random directions.
void orthonormalize(const CMatrix& Q, long used, CMatrix& X, std::mt19937_64& rng) {
    if (used > 0) X -= Q.leftCols(used) * (Q.leftCols(used).adjoint() * X);
    // Fast path: thin Householder QR when the block has full numerical rank.
    {
        Eigen::HouseholderQR<CMatrix> qr(X);
        const auto diag = qr.matrixQR().diagonal().cwiseAbs();
        const long r = std::min(X.rows(), X.cols());
        if (r == X.cols() && diag.minCoeff() > 1e-8 * std::max(diag.maxCoeff(), 1e-300)) {
            X = qr.householderQ() * CMatrix::Identity(X.rows(), X.cols());
            if (used > 0) X -= Q.leftCols(used) * (Q.leftCols(used).adjoint() * X);
            Eigen::HouseholderQR<CMatrix> again(X);
            X = again.householderQ() * CMatrix::Identity(X.rows(), X.cols());
            return;
        }
    }
    for (long j = 0; j < X.cols(); ++j) {
        for (int attempt = 0; attempt < 4; ++attempt) {
            const double before = X.col(j).norm();
            for (int pass = 0; pass < 2; ++pass) {
                if (used > 0) X.col(j) -= Q.leftCols(used) * (Q.leftCols(used).adjoint() * X.col(j));
                for (long i = 0; i < j; ++i) X.col(j) -= X.col(i) * X.col(i).dot(X.col(j));
            }
            const double after = X.col(j).norm();
            if (after > 1e-10 * std::max(before, 1e-300) && after > 1e-300) {
                X.col(j) /= after;
                break;
            }
            X.col(j) = random_block(X.rows(), 1, rng);
        }
    }
}

}  // namespace

double hermitian_norm_estimate(const SpCMatrix& M, int iterations) {
    const long n = M.rows();
    if (n == 0) return 0.0;
    CVector v(n);
    for (long i = 0; i < n; ++i) v(i) = cd(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        CVector w = M * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        estimate = norm;
        v = w / norm;
    }
    return estimate;
}

EigenResult lowest_eigenpairs(const SpCMatrix& M, const EigenOptions& opt) {
    const long n = M.rows();
    if (M.cols() != n) throw std::invalid_argument("eigensolver needs a square matrix");
    if (opt.k < 1 || opt.k > n) throw std::invalid_argument("eigensolver: k must lie in [1, dim]");
    EigenResult out;
    out.norm_estimate = hermitian_norm_estimate(M);
    const double tol = opt.tolerance * std::max(out.norm_estimate, 1e-300);

    const long block = std::min<long>(n, opt.block > 0 ? opt.block : opt.k + 8);
    const long basis_cols = std::min<long>(n, block * std::max(2, opt.krylov_blocks));

    auto finish = [&](const Eigen::VectorXd& theta, const CMatrix& Y) {
        out.values = theta.head(opt.k);
        const CMatrix V = Y.leftCols(opt.k);
        const CMatrix R = M * V - V * out.values.cast<cd>().asDiagonal();
        out.residuals = R.colwise().norm().transpose();
        long needed = 0;
        while (needed < opt.k && out.values(needed) <= opt.converge_below) ++needed;
        needed = std::min<long>(opt.k, needed + 1);
        out.converged = out.residuals.head(needed).maxCoeff() <= tol;
        if (opt.want_vectors) out.vectors = V;
    };

    // Small problems, or ones whose basis would cover the space: dense solve.
    if (basis_cols >= n || n <= 64) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es{CMatrix(M)};
        finish(es.eigenvalues(), es.eigenvectors());
        return out;
    }

    SpCMatrix shifted = M;
    for (long i = 0; i < n; ++i) shifted.coeffRef(i, i) -= opt.shift;
    Eigen::SimplicialLLT<SpCMatrix, Eigen::Lower> factor(shifted);
    if (factor.info() != Eigen::Success) {
        std::ostringstream os;
        os << "eigensolver: M - (" << opt.shift << ") I is not positive definite";
        throw NumericalRefusal(os.str());
    }

    std::mt19937_64 rng(opt.seed);
    CMatrix start = random_block(n, block, rng);
    CMatrix Q(n, basis_cols);
    Eigen::VectorXd theta;
    CMatrix Y;
    for (int cycle = 0; cycle <= opt.max_restarts; ++cycle) {
        out.restarts = cycle;
        CMatrix X = start;
        orthonormalize(Q, 0, X, rng);
        long used = 0;
        while (true) {
            const long take = std::min<long>(X.cols(), basis_cols - used);
            Q.middleCols(used, take) = X.leftCols(take);
            used += take;
            if (used >= basis_cols) break;
            X = factor.solve(Q.middleCols(used - take, take));
            orthonormalize(Q, used, X, rng);
        }
        const CMatrix MQ = M * Q;
        CMatrix H = Q.adjoint() * MQ;
        H = 0.5 * (H + H.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
        theta = es.eigenvalues();
        Y = Q * es.eigenvectors();
        finish(theta, Y);
        if (out.converged) return out;
        start = Y.leftCols(block);
    }
    return out;
}

}  // namespace sublab
