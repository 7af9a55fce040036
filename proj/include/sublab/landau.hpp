#pragma once

#include "sublab/heisenberg.hpp"

#include <string>
#include <vector>

namespace sublab {

using SpMatrix = Eigen::SparseMatrix<double>;

// ---------------------------------------------------------------------------
// Oscillator symbol H(lambda) = -sum (X_i^2 + Y_i^2) and its Landau levels.
// ---------------------------------------------------------------------------

struct OscillatorSymbol {
    double lambda = 1.0;
    int d = 1;
    int N = 4;
    SpMatrix matrix;              // N^d x N^d, real symmetric
    Eigen::MatrixXd axis_matrix;  // one-axis block, H = sum_i I (x) .. axis_matrix .. (x) I
    Eigen::VectorXd axis_values;  // eigen-decomposition of the axis block
    Eigen::MatrixXd axis_vectors;
    std::vector<bool> axis_safe;  // axis eigenvector lies in the safe band

    long dim() const { return matrix.rows(); }
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix); }
};

OscillatorSymbol oscillator_symbol(double lambda, int d, int N);

/// Exact binom(n + d - 1, n).
long landau_multiplicity(int n, int d);

struct OscillatorEigen {
    double value = 0.0;
    std::vector<int> axis_index;  // which axis eigenvector per axis
};

/// Eigenvalues of H whose eigenvectors are tensor products of safe-band axis
/// eigenvectors (Kronecker-sum spectrum), sorted ascending.
std::vector<OscillatorEigen> oscillator_spectrum(const OscillatorSymbol& H);

struct LandauProjector {
    double lambda = 1.0;
    int d = 1;
    int N = 4;
    int n = 0;
    SpMatrix basis;   // orthonormal columns spanning the eigenspace
    SpMatrix matrix;  // basis * basis^T
};

/// Projector onto the |lambda|(2n+d) eigenspace; requires 2n < N so the whole
/// level sits in the safe band.
LandauProjector landau_projector(const OscillatorSymbol& H, int n);

/// Orthogonal projector of a Hermitian matrix onto the eigenvectors with
/// |e - level| <= window that satisfy `keep` (by column of the eigenbasis).
struct SpectralSplit {
    Eigen::VectorXd values;
    CMatrix vectors;
    std::vector<bool> in_level;
    CMatrix projector;
};
SpectralSplit spectral_split(const CMatrix& H, double level, double window, const std::vector<bool>& safe_mask);

// ---------------------------------------------------------------------------
// Sylvester equation (H Pi) X - X (H Pi_perp) = Pi Y Pi_perp.
// ---------------------------------------------------------------------------

struct ContourSpec {
    double center = 0.0;
    double radius = 0.0;
    int nodes = 64;

    /// Circle around |lambda|(2n+d) of radius min(|lambda|, center/2).
    static ContourSpec around_level(double lambda, int d, int n, int nodes);
};

enum class SylvesterMethod { Direct, Contour };

struct SylvesterResult {
    CMatrix X;
    double residual = 0.0;  // Frobenius norm of the equation residual
    double gap = 0.0;       // min |e_level - e_other| over the retained spectrum
};

/// `H` Hermitian with the level eigenspace given by `split`. The contour method
/// integrates (1/2 pi i) \oint (H Pi - z)^{-1} Pi Y Pi_perp (H Pi_perp - z)^{-1} dz
/// with the trapezoid rule. Refuses when the gap is below `gap_floor`.
SylvesterResult sylvester_solve(const CMatrix& H, const SpectralSplit& split, const CMatrix& Y,
                                SylvesterMethod method, const ContourSpec& contour, double gap_floor);

/// Convenience overload at Landau level n of an oscillator symbol, with the
/// default gap floor |lambda|.
SylvesterResult sylvester_solve(const OscillatorSymbol& H, int n, const CMatrix& Y, SylvesterMethod method,
                                const ContourSpec& contour);

/// Residual of the vectorized system solved densely; independent check of the direct path.
CMatrix sylvester_dense_reference(const CMatrix& H, const CMatrix& Pi, const CMatrix& Y);

// ---------------------------------------------------------------------------
// Difference operators.
// ---------------------------------------------------------------------------

enum class Coordinate { X, Y, Z };

/// Inputs shared by every kernel-route evaluation: the kernel grid on which the
/// symbol is resolved and the lambda quadrature used for inversion (d = 1).
struct TransformContext {
    SampledKernel grid;  // values ignored; only the geometry is used
    LambdaGrid lambdas;
    int N = 32;
    int workers = 1;
};

/// Kernel route: kappa = F^{-1}(sigma) on the context grid, multiplied by the
/// coordinate, transformed again at `lambda`. `sigma` is the symbol at every
/// node of the context lambda grid.
struct DifferenceResult {
    CMatrix value;
    SampledKernel reconstructed;  // F^{-1}(sigma) times the coordinate
};
DifferenceResult difference_op(const std::vector<CMatrix>& sigma, Coordinate coordinate, int axis,
                               double lambda, const TransformContext& context, double decay_floor = 1e-6);

/// Kernel reconstruction F^{-1}(sigma) at every point of the context grid.
SampledKernel inverse_fourier(const std::vector<CMatrix>& sigma, const TransformContext& context);

/// Commutator realization on the truncated representation:
/// Delta_{x_j} sigma = [Y_j, sigma] / (i lambda), Delta_{y_j} sigma = -[X_j, sigma] / (i lambda).
CMatrix difference_commutator(const TruncatedRep& rep, const CMatrix& sigma, Coordinate coordinate, int axis);

/// P e_alpha = (-1)^{|alpha|} e_alpha.
Eigen::VectorXd parity_signs(int d, int N);

/// Frobenius norm of Pi_n M Pi_n (an upper bound on the operator norm).
double parity_compression(const LandauProjector& projector, const CMatrix& M);

// ---------------------------------------------------------------------------
// First-order corrector of the Landau projector at a node.
// ---------------------------------------------------------------------------

/// Symbol field sigma(x, lambda) given pointwise, with its order tag.
struct SymbolField {
    int order = 0;
    std::function<CMatrix(const GroupElement& x, const TruncatedRep& rep)> eval;
};

/// Oscillator-type symbol -sum_{ij} ginv_{ij}(x) V_i V_j with V = (X_1..X_d, Y_1..Y_d).
SymbolField metric_symbol(std::function<Eigen::MatrixXd(const GroupElement&)> inverse_metric);

/// Williamson normal form of a positive definite 2d x 2d matrix G:
/// S^T G S = diag(nu, nu) with S symplectic (S^T J S = J), frequencies ascending.
struct WilliamsonForm {
    Eigen::MatrixXd S;
    Eigen::VectorXd frequencies;
};
WilliamsonForm williamson(const Eigen::MatrixXd& G);

struct CorrectorReport {
    CMatrix pi1;
    CMatrix pi0;
    double commutator_pi_r = 0.0;      // ||[Pi0, R]||
    double level_block = 0.0;          // ||Pi0 [H0, R] Pi0 - Pi0 T Pi0||
    double complement_block = 0.0;     // ||Pi0perp [H0, R] Pi0perp + Pi0perp T Pi0perp||
    double parity_t1 = 0.0;            // ||Pi0 T1 Pi0||
    double hermiticity_defect = 0.0;   // ||Pi1 - Pi1^*||
    double idempotence_residual = 0.0; // order-one idempotence equation
    double commutation_residual = 0.0; // order-one commutation equation
    double sylvester_residual = 0.0;
    double gap = 0.0;
    std::string to_json() const;
};

/// Builds Pi_n^1 at (node, lambda). H0 is the principal symbol (order 2), H1 the
/// sub-principal symbol (order 1). Horizontal derivatives V_j use symmetric
/// differences at node * exp(+-step V_j). Throws NumericalRefusal when a
/// compatibility residual exceeds `tolerance`.
CorrectorReport corrector_pi1(const SymbolField& H0, const SymbolField& H1, int n, const GroupElement& node,
                              double lambda, int N, double tolerance = 1e-9, double step = 1e-3);

// ---------------------------------------------------------------------------
// Functional calculus by eigendecomposition.
// ---------------------------------------------------------------------------

Eigen::MatrixXd functional_of_matrix(const Eigen::MatrixXd& T, const std::function<double(double)>& f);
Eigen::MatrixXd functional_of_symbol(const OscillatorSymbol& H, const std::function<double(double)>& f);

}  // namespace sublab
