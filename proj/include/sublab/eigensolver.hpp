#pragma once

#include "sublab/common.hpp"

#include <cstdint>
#include <limits>

namespace sublab {

struct EigenOptions {
    int k = 10;                 // number of lowest eigenpairs
    double shift = -1.0;        // M - shift I must be positive definite
    int block = 0;              // block size; 0 picks k + 8
    int krylov_blocks = 4;      // blocks per restart cycle
    int max_restarts = 60;
    double tolerance = 1e-8;    // residual bound relative to ||M||_2
    /// Only Ritz pairs up to this value, plus the next one, must meet the bound.
    double converge_below = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 1;
    bool want_vectors = true;
};

struct EigenResult {
    Eigen::VectorXd values;     // ascending
    CMatrix vectors;            // orthonormal columns (empty unless requested)
    Eigen::VectorXd residuals;  // ||M v - delta v||
    double norm_estimate = 0.0; // ||M||_2 from power iteration (a lower bound)
    int restarts = 0;
    bool converged = false;
};

/// Lowest k eigenpairs of a Hermitian sparse matrix by restarted block Krylov
/// iteration on (M - shift)^{-1} with full reorthogonalization and
/// Rayleigh-Ritz on M. Deterministic for a given seed.
EigenResult lowest_eigenpairs(const SpCMatrix& M, const EigenOptions& options);

/// Power-iteration estimate of the spectral norm of a Hermitian matrix.
double hermitian_norm_estimate(const SpCMatrix& M, int iterations = 40);

}  // namespace sublab
