#pragma once

#include "sublab/models.hpp"

#include <boost/rational.hpp>

#include <string>
#include <vector>

namespace sublab {

using Observable2D = std::function<double(double, double)>;

// ---------------------------------------------------------------------------
// Counting and Weyl statistics.
// ---------------------------------------------------------------------------

/// #{k : delta_k <= delta} (inclusive, so the zero mode counts). Refuses delta
/// beyond delta_max or an incomplete dataset.
long counting_function(const SpectralDataset& dataset, double delta);

struct WeylFit {
    double exponent = 0.0;
    double constant = 0.0;  // N(delta) ~ constant * delta^exponent
    double delta_lo = 0.0;
    double delta_hi = 0.0;
    double residual = 0.0;  // RMS of the log-log regression
    int distinct_counts = 0;
    std::vector<double> deltas;
    std::vector<long> counts;
};

/// Least-squares slope of log N against log delta on `samples` geometric points
/// of [delta_lo, delta_hi]. Refuses windows shorter than a decade or with fewer
/// than 30 distinct counting values.
WeylFit weyl_fit(const SpectralDataset& dataset, double delta_lo, double delta_hi, int samples = 64);

// ---------------------------------------------------------------------------
// Landau-level proportions.
// ---------------------------------------------------------------------------

/// binom(n + d - 1, n) / (2n + d)^{d + 1}, exact.
boost::rational<long long> landau_coefficient(int n, int d);
/// coefficient(n1) / coefficient(n2), exact.
boost::rational<long long> landau_ratio(int n1, int n2, int d);
/// coefficient(n) / sum over all levels (series summed with an integral tail).
double landau_fraction(int n, int d);

struct LandauProportions {
    double delta = 0.0;
    long labeled = 0;
    long unlabeled = 0;
    std::vector<long> counts;        // levels 0..n_max
    std::vector<double> empirical;   // counts / labeled
    std::vector<double> expected;    // landau_fraction(n, 1)
    std::vector<double> relative_error;
    double remainder = 0.0;          // labeled mass above n_max; empirical sum + remainder = 1
};

/// Fractions of labeled eigenvalues <= delta per level. Refuses fewer than 200 labeled entries.
LandauProportions landau_proportions(const SpectralDataset& dataset, int n_max, double delta);

// ---------------------------------------------------------------------------
// Matrix elements and quantum variance.
// ---------------------------------------------------------------------------

/// <a u_k, u_k> = sum_x a(x) |u_k(x)|^2 per entry (vectors are normalized in the
/// mass-symmetrized space, so a = 1 gives 1).
std::vector<double> matrix_elements(const SpectralDataset& dataset, const Observable2D& a);

/// How near-degenerate eigenvectors are treated before variance accumulation.
/// Average: mean of the diagonal elements over the cluster (basis independent).
/// Adapted: eigenvalues of the compressed observable U^* a U (the basis of the
/// cluster that diagonalizes a). PerVector: the solver basis as returned.
enum class ClusterMode { Average, Adapted, PerVector };
std::string to_string(ClusterMode mode);
ClusterMode cluster_mode_from_string(const std::string& s);

/// Clusters: entries sharing (m, Landau level), or for unlabeled entries, (m) and a
/// relative eigenvalue spread below `relative_tolerance`. Returns entry indices.
std::vector<std::vector<std::size_t>> degenerate_clusters(const SpectralDataset& dataset,
                                                          double relative_tolerance = 1e-6);

std::vector<double> cluster_matrix_elements(const SpectralDataset& dataset, const Observable2D& a, ClusterMode mode);

/// int a d nu with nu the normalized contact volume of the model.
double observable_mean(const ContactModel3D& model, const Observable2D& a, int n = 256);

struct ExtractionResult {
    std::vector<long> indices;          // kept positions (0-based)
    std::vector<long> checkpoints;      // prefix lengths
    std::vector<double> prefix_density; // |kept in prefix| / prefix length
    std::vector<double> cesaro;         // Cesaro mean at each checkpoint
    double final_cesaro = 0.0;
    bool inconclusive = false;
};

/// Koopman-von Neumann extraction for a nonnegative sequence: keep k when
/// s_k <= sqrt(sup_{j >= k} C_j) with C_j the Cesaro means. Flagged inconclusive
/// when the last Cesaro mean exceeds `cesaro_limit`.
ExtractionResult density_one_extract(const std::vector<double>& sequence, double cesaro_limit = 0.05);

struct VarianceReport {
    std::string observable;
    ClusterMode mode = ClusterMode::Average;
    double mean = 0.0;                  // m_a
    std::vector<double> deltas;
    std::vector<long> counts;
    std::vector<double> variance;
    std::vector<double> deviations;     // |<a u_k, u_k> - m_a|^2 in dataset order
    ExtractionResult extraction;
};

/// (1 / N(delta)) sum_{delta_k <= delta} |<a u_k, u_k> - m_a|^2 from precomputed elements.
double quantum_variance(const SpectralDataset& dataset, const std::vector<double>& elements, double mean, double delta);

VarianceReport variance_report(const SpectralDataset& dataset, const ContactModel3D& model, const Observable2D& a,
                               const std::string& observable_id, const std::vector<double>& deltas, ClusterMode mode);

// ---------------------------------------------------------------------------
// Helffer-Sjostrand functional calculus.
// ---------------------------------------------------------------------------

/// Real test function with derivatives: fill(x, order, out) writes f^{(0..order)}(x).
struct SmoothFunction {
    std::string name;
    double support_lo = -1.0;
    double support_hi = 1.0;
    int max_order = 8;
    std::function<void(double, int, double*)> fill;

    double operator()(double x) const;
};

/// exp(-1 / (1 - t^2)) with t = (x - center) / radius, derivatives by forward-mode autodiff.
SmoothFunction bump_function(double center, double radius);
/// The zero function on [lo, hi].
SmoothFunction zero_function(double lo, double hi);

/// Smooth step in y: 1 on |y| <= 1/2, 0 on |y| >= 1.
double almost_analytic_cutoff(double y, double* derivative = nullptr);

struct HSQuadrature {
    int bands = 8;          // geometric y bands [2^{-k-2}, 2^{-k-1}] below the top band [1/2, 1]
    int gauss_nodes = 8;    // Gauss-Legendre nodes per band
    int top_nodes = 48;     // nodes in [1/2, 1], where the cutoff derivative lives
    double x_step_ratio = 0.25;  // trapezoid step in x relative to the band's lower y
    int min_x_steps = 512;       // floor on x resolution across the support of f
};

struct HSResult {
    Eigen::MatrixXd value;
    double strip_bound = 0.0;  // bound on the omitted strip 0 < y < y_min
    long evaluations = 0;      // resolvent evaluations
};

/// f(T) = (2/pi) Re int_{y > 0} dbar f~(z) (T - z)^{-1} dx dy with
/// f~(x + iy) = sum_{k <= order} f^{(k)}(x) (iy)^k / k! * cutoff(y). T is reduced
/// once to tridiagonal form; every resolvent is an O(n^2) tridiagonal inverse.
HSResult hs_functional_calculus(const Eigen::MatrixXd& T, const SmoothFunction& f, int aa_order,
                                const HSQuadrature& quad = {}, int workers = 1);

// ---------------------------------------------------------------------------
// Disjoint-support resolvent decay.
// ---------------------------------------------------------------------------

struct DecayCurve {
    std::vector<double> hbar;
    std::vector<double> norm;      // ||psi1 (T - z)^{-1} psi2||_2
    std::vector<double> resolvent; // ||(T - z)^{-1}||_2 (<= 1 / |Im z|)
    double slope = 0.0;            // least-squares d log norm / d log hbar
};

/// T(hbar) = hbar^2 M with M the symmetrized mode operator; cutoffs act as
/// multiplication by psi(node). Norms by power iteration on B^* B.
DecayCurve disjoint_support_decay(const ModeOperator& op, const Observable2D& psi1, const Observable2D& psi2,
                                  cd z, const std::vector<double>& hbars, int workers = 1, int iterations = 60);

/// Smooth cutoff in x1 equal to a bump on (lo, hi).
Observable2D cutoff_x1(double lo, double hi);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sublab
