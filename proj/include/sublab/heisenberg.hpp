#pragma once

#include "sublab/common.hpp"

#include <string>
#include <vector>

namespace sublab {

// ---------------------------------------------------------------------------
// Group law on H^d in exponential coordinates (x, y, z).
// ---------------------------------------------------------------------------

struct GroupElement {
    int d = 1;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    double z = 0.0;

    GroupElement() : GroupElement(1) {}
    explicit GroupElement(int dim);
    GroupElement(Eigen::VectorXd xs, Eigen::VectorXd ys, double zc);

    static GroupElement identity(int dim) { return GroupElement(dim); }
    /// Convenience constructor for d = 1.
    static GroupElement h1(double x, double y, double z);
};

GroupElement group_mul(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& g);
GroupElement dilate(double t, const GroupElement& g);
double koranyi_norm(const GroupElement& g);
/// Max-abs coordinate difference; used by tests of exact identities.
double coordinate_distance(const GroupElement& a, const GroupElement& b);

/// Central character of pi^lambda composed with the dilation by hbar.
double scale_rep(double lambda, double hbar);

// ---------------------------------------------------------------------------
// Hermite basis and the truncated Schrodinger representation.
// ---------------------------------------------------------------------------

/// Multiplication by xi in the first N L^2-normalized Hermite functions.
Eigen::MatrixXd hermite_position_matrix(int N);
/// d/dxi in the same basis (skew-symmetric, tridiagonal).
Eigen::MatrixXd hermite_derivative_matrix(int N);

/// Multi-index <-> flat index, first axis most significant.
std::vector<int> multi_index(long flat, int d, int N);
long flat_index(const std::vector<int>& alpha, int N);
/// True for basis vectors with every Hermite index below N/2.
std::vector<bool> safe_band_mask(int d, int N);
/// Fraction of squared norm of `v` carried outside the safe band.
double outside_band_fraction(const CVector& v, int d, int N);

struct TruncatedRep {
    double lambda = 1.0;
    int d = 1;
    int N = 4;
    std::vector<SpCMatrix> gen_X;
    std::vector<SpCMatrix> gen_Y;
    cd gen_R{0.0, 0.0};
    std::string basis_convention = "hermite-l2-orthonormal";

    long dim() const;
    /// Generators restricted to one axis (N x N), shared by every axis.
    Eigen::MatrixXcd axis_X() const;
    Eigen::MatrixXcd axis_Y() const;
};

TruncatedRep schrodinger_generators(double lambda, int d, int N);

struct TruncationReport {
    /// Largest fraction of squared column norm leaving the safe band,
    /// taken over the safe-band columns.
    double leakage = 0.0;
    bool flagged = false;
};

/// exp(x.gen_X + y.gen_Y + z.gen_R). Axes commute exactly, so the result is
/// e^{i lambda z} times the Kronecker product of per-axis exponentials.
CMatrix rep_exponential(const TruncatedRep& rep, const GroupElement& g,
                        TruncationReport* report = nullptr, double leak_threshold = 1e-6);

/// Per-axis exp(x gen_X + y gen_Y) through the rotation identity
/// x D + i s y M = R(phi) (rho D) R(phi)^*, with D diagonalized once.
class AxisExponential {
public:
    AxisExponential(double lambda, int N);
    CMatrix operator()(double x, double y) const;
    int N() const { return N_; }
    double lambda() const { return lambda_; }
    /// Eigen-decomposition D = V diag(i omega) V^*.
    const CMatrix& V() const { return V_; }
    const Eigen::VectorXd& omega() const { return omega_; }

private:
    double lambda_;
    int N_;
    CMatrix V_;
    Eigen::VectorXd omega_;
};

// ---------------------------------------------------------------------------
// Sampled kernels and the group Fourier transform.
// ---------------------------------------------------------------------------

/// Values on a uniform tensor grid over R^{2d+1}; axis order x_1..x_d,
/// y_1..y_d, z; row-major with z fastest.
struct SampledKernel {
    int d = 1;
    std::vector<int> counts;
    std::vector<double> lower;
    std::vector<double> spacing;
    std::vector<cd> values;

    std::size_t size() const { return values.size(); }
    double cell_volume() const;
    double coordinate(int axis, int index) const;
    GroupElement point(std::size_t flat) const;
    std::vector<int> unflatten(std::size_t flat) const;
    /// max |value| on the box boundary divided by max |value|.
    double boundary_ratio() const;
    double l2_norm_squared() const;
};

SampledKernel sample_kernel(int d, const std::vector<int>& counts, const std::vector<double>& lower,
                            const std::vector<double>& spacing,
                            const std::function<cd(const GroupElement&)>& fn);
/// Symmetric box [-L, L] per axis with the given spacing per axis.
SampledKernel sample_kernel_box(int d, const std::vector<double>& half_widths,
                                const std::vector<double>& spacing,
                                const std::function<cd(const GroupElement&)>& fn);

/// Refuses kernels whose boundary values exceed floor * max.
void require_decay(const SampledKernel& k, double floor);

struct FourierTransform {
    CMatrix value;
    double lambda = 0.0;
    int N = 0;
    bool nyquist_ok = true;
    std::string warning;
};

/// kappa^(pi^lambda) = sum kappa(g) pi^lambda(g)^* * cell volume.
FourierTransform group_fourier(const SampledKernel& kernel, double lambda, int N,
                               double decay_floor = 1e-10);

/// Grid convolution (k1 * k2)(g) = sum_h k1(h) k2(h^{-1} g) * cell on the grid of k1,
/// with k2 evaluated pointwise.
SampledKernel grid_convolution(const SampledKernel& k1,
                               const std::function<cd(const GroupElement&)>& k2);

/// Density of the Plancherel measure (2 pi)^{-(d+1)} |lambda|^d.
double plancherel_density(double lambda, int d);

/// Quadrature for integrals over lambda in R: Gauss-Legendre nodes in log|lambda|
/// on [lambda_min, lambda_max] for both signs, plus a closure of the gap
/// (-lambda_min, lambda_min) by a least-squares polynomial through the
/// `closure_points` innermost nodes on each side.
struct LambdaGrid {
    std::vector<double> nodes;    // ascending, symmetric
    std::vector<double> weights;  // weights for the plain node sum
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int closure_degree = 7;
    int closure_points = 8;

    static LambdaGrid log_gauss(double lambda_min, double lambda_max, int nodes_per_side,
                                int closure_degree = 7, int closure_points = 8);
    /// Integral of the gap-closing polynomial over (-lambda_min, lambda_min).
    cd gap_integral(const std::vector<cd>& samples) const;
    cd plain_integral(const std::vector<cd>& samples) const;
};

struct PlancherelReport {
    double kernel_l2 = 0.0;          // int |kappa|^2
    double transform_l2 = 0.0;       // with gap closure
    double transform_l2_raw = 0.0;   // nodes only
    double relative_error = 0.0;
    double relative_error_raw = 0.0;
    double gap_fraction = 0.0;
    double max_band_leakage = 0.0;
    std::vector<double> lambdas;
    std::vector<double> integrand;   // density * ||k^||_HS^2 per node
    std::vector<std::string> warnings;
};

/// Compares int |kappa|^2 with int ||kappa^(lambda)||_HS^2 dmu(lambda); the HS norm
/// is taken on the safe band (indices < N/2).
PlancherelReport plancherel_check(const SampledKernel& kernel, const LambdaGrid& grid, int N,
                                  int workers = 1);

struct InversionReport {
    cd value{0.0, 0.0};
    cd value_raw{0.0, 0.0};
    double max_outside_trace_fraction = 0.0;
    bool truncation_unsafe = false;
};

/// int Tr(pi(g) kappa^(pi)) dmu over the lambda grid.
InversionReport fourier_inversion_at(const SampledKernel& kernel, const GroupElement& point,
                                     const LambdaGrid& grid, int N, int workers = 1,
                                     double unsafe_fraction = 1e-3);

struct FockBargmannReport {
    double residual = 0.0;          // max entry deviation on the safe band
    cd global_phase{1.0, 0.0};      // best-fit phase, recorded only
};

/// pi^lambda_F(g) in the normalized monomial basis (exact finite sums) compared with
/// a Schrodinger-side matrix under e_k <-> h_k. When `schrodinger` is empty the
/// truncated exponential is used.
Eigen::MatrixXcd fock_bargmann_matrix(double lambda, int N, const GroupElement& g);
FockBargmannReport fock_bargmann_check(double lambda, int d, int N, const GroupElement& g,
                                       const CMatrix& schrodinger = CMatrix());

}  // namespace sublab
