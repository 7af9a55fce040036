#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace sublab {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using SpCMatrix = Eigen::SparseMatrix<cd>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kI{0.0, 1.0};

/// Thrown when an operation refuses its input on numerical grounds
/// (spectral gap too small, kernel not decaying, incomplete data, ...).
class NumericalRefusal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs fn(i) for i in [0, count) on `workers` threads. Each index is handled
/// exactly once; callers write results into per-index slots and reduce in
/// index order afterwards, so results never depend on the worker count.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// Worker count from SUBLAB_WORKERS (defaults to 1).
int workers_from_env();

}  // namespace sublab
