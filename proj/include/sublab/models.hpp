#pragma once

#include "sublab/contact.hpp"
#include "sublab/eigensolver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sublab {

/// Discretized -Delta_m on an n1 x n2 periodic grid of the unit box, node (i, j)
/// at (i / n1, j / n2) with flat index i + n1 * j. The generalized problem
/// K u = delta Mass u is stored symmetrized as Mass^{-1/2} K Mass^{-1/2}, which
/// is complex Hermitian once gauge phases are present.
struct ModeOperator {
    int m = 0;
    int n1 = 0;
    int n2 = 0;
    SpCMatrix matrix;
    Eigen::VectorXd mass;  // sqrt(g) h1 h2 per node
    std::string boundary;  // human-readable description of the seam phases

    long dim() const { return static_cast<long>(n1) * n2; }
    Eigen::Vector2d node(long index) const;
    /// ||M - M^*||_max (zero by construction).
    double hermiticity_defect() const;
};

/// Landau gauge A = A_per + flux x1 dx2. Link phases are 2 pi m times the exact
/// line integral of A (Gauss-Legendre on the periodic part); the x1 seam carries
/// exp(2 pi i m flux x2) from the bundle gluing. Link weights use the diagonal
/// metric: sqrt(g) g^{11} h2 / h1 on x1 links, sqrt(g) g^{22} h1 / h2 on x2 links.
ModeOperator magnetic_mode_operator(const ContactModel3D& model, int m, int n1, int n2);

struct ModeSpectrum {
    Eigen::VectorXd values;
    CMatrix vectors;  // Euclidean-normalized in the symmetrized space
    Eigen::VectorXd residuals;
    bool converged = false;
};

/// Lowest k_max eigenpairs of the mode operator. `shift` is a guess for a value
/// below the spectrum; when M - shift is not positive definite the solve falls
/// back to shift -1. Only pairs up to `converge_below` (and the next one) must
/// meet the residual bound.
ModeSpectrum mode_spectrum(const ModeOperator& op, int k_max, std::uint64_t seed = 1, bool want_vectors = true,
                           double shift = -1.0,
                           double converge_below = std::numeric_limits<double>::infinity());

/// Eigenpairs up to delta_max, growing k until the largest computed value exceeds
/// delta_max. Refuses when the count would leave the safe band (lowest third).
ModeSpectrum mode_spectrum_below(const ModeOperator& op, double delta_max, int initial_k, std::uint64_t seed,
                                 bool want_vectors, double shift = -1.0);

struct SpectralEntry {
    double delta = 0.0;
    int m = 0;
    std::optional<int> level;          // Landau label n
    std::optional<double> lambda_est;
    double label_residual = 0.0;       // |delta / lambda_est - (2n + 1)|
    double solver_residual = 0.0;
    long vector = -1;                  // index into SpectralDataset::vectors
};

struct SpectralDataset {
    std::vector<SpectralEntry> entries;  // ascending delta, ties by (m, index)
    std::vector<CVector> vectors;
    std::string model;
    std::string normalization;
    int n1 = 0;
    int n2 = 0;
    double delta_max = 0.0;
    int max_mode = 0;      // largest |m| assembled
    bool complete = false;
    std::string incomplete_reason;

    std::size_t size() const { return entries.size(); }
    std::string to_csv() const;
    static SpectralDataset from_csv(const std::string& text);
    void save_vectors(const std::string& path) const;
    void load_vectors(const std::string& path);
};

struct AssemblyOptions {
    int n1 = 64;
    int n2 = 64;
    double delta_max = 100.0;
    bool want_vectors = false;
    std::uint64_t seed = 1;
    int workers = 1;
    int mode_limit = 400;  // hard cap on |m|
};

/// Union of mode spectra truncated at delta_max. Modes 0..m_est run in parallel,
/// m_est from the lowest Landau line 2 pi |m| min b; further modes are added one
/// at a time until a mode contributes nothing, which sets the completeness flag.
/// Mode -m is the complex conjugate of mode m and is filled in from it.
SpectralDataset assemble_full_spectrum(const ContactModel3D& model, const AssemblyOptions& options);

/// Heisenberg nilmanifold for the standard lattice, realized per z-frequency k as
/// a magnetic torus in symmetric gauge with lambda = 2 pi k:
/// X = d_x - i lambda y / 2, Y = d_y + i lambda x / 2, quasi-periodic seams
/// psi(x + 1, y) = exp(-i pi k y) psi(x, y), psi(x, y + 1) = exp(i pi k x) psi(x, y).
struct NilmanifoldModel {
    int n = 64;             // transverse grid points per axis
    int z_modes = 0;        // largest |k| kept; 0 means choose from delta_max
    double max_plaquette_flux = 0.05;  // lambda h^2 / (2 pi) allowed at the top sector
};

ModeOperator nilmanifold_sector_operator(const NilmanifoldModel& model, int k);

/// max over a smooth interior bump f of ||([X, Y] - i lambda) f|| / ||lambda f|| with
/// forward covariant differences; O(h).
double nilmanifold_commutator_defect(const NilmanifoldModel& model, int k);

SpectralDataset nilmanifold_spectrum(const NilmanifoldModel& model, double delta_max, std::uint64_t seed = 1,
                                     int workers = 1, bool want_vectors = false);

/// Cluster tolerance in units of lambda_est: 10% of the level spacing 2 lambda_est.
inline constexpr double kLabelTolerance = 0.2;

/// Labels with lambda_est = 2 pi |m| b for constant b, and 2 pi |m| <u, b u> otherwise
/// (requires vectors). Mode 0 stays unlabeled.
void landau_label(SpectralDataset& dataset, const ContactModel3D& model);
/// Nilmanifold labels with lambda_est = 2 pi |k|.
void landau_label_nilmanifold(SpectralDataset& dataset);
/// Labels from an explicit lambda per entry (entries with lambda <= 0 stay unlabeled).
void landau_label_with(SpectralDataset& dataset, const std::vector<double>& lambda_est);

}  // namespace sublab
