#pragma once

#include "sublab/common.hpp"

#include <string>
#include <vector>

namespace sublab {

/// Which contact form the model carries: the connection form eta = d theta + A,
/// or the metric-normalized eta_g = eta / b.
enum class ContactNormalization { Connection, Metric };

std::string to_string(ContactNormalization n);
ContactNormalization normalization_from_string(const std::string& s);

/// Circle bundle over the unit periodic box (x1, x2) with fiber theta in [0, 1).
/// The potential is A = A_per + flux * x1 dx2 with A_per periodic, so crossing
/// x1 = 1 glues (1, x2, theta) to (0, x2, theta + flux * x2).
struct ContactModel3D {
    std::string name;
    int flux = 1;
    ContactNormalization normalization = ContactNormalization::Metric;
    /// Diagonal metric coefficients (g11, g22) of the base.
    std::function<Eigen::Vector2d(double, double)> metric_diag;
    std::function<double(double, double)> b;
    std::function<Eigen::Vector2d(double, double)> grad_b;
    std::function<Eigen::Vector2d(double, double)> A_periodic;

    double sqrt_g(double x1, double x2) const;
    Eigen::Vector2d A(double x1, double x2) const;
    /// Contact form components in (x1, x2, theta) order for the chosen normalization.
    Eigen::Vector3d eta(const Eigen::Vector3d& p) const;
    /// Density of the Reeb-invariant volume |eta ^ d eta| in coordinates dx1 dx2 dtheta.
    double volume_density(double x1, double x2) const;
};

/// Flat box with constant b; the metric is scaled so that b * sqrt(g) = flux.
ContactModel3D constant_field_model(int flux, double b, ContactNormalization n = ContactNormalization::Metric);
/// Flat unit box with b = flux * (1 + eps1 sin(2 pi x1) + eps2 cos(2 pi x2)).
ContactModel3D sine_field_model(int flux, double eps1, double eps2,
                                ContactNormalization n = ContactNormalization::Metric);

/// Min over an n x n midpoint grid of |eta ^ d eta| (coordinate density), with
/// d eta taken by fourth-order central differences of the potential.
double contact_check(const ContactModel3D& model, int n = 64);

/// Max over the grid of |dA - b vol_g| by central differences (consistency of the inputs).
double curvature_mismatch(const ContactModel3D& model, int n = 64);

struct ReebSolve {
    Eigen::Vector3d field;
    double condition = 0.0;  // reciprocal condition estimate of the 3x3 system
};

/// Solves eta(R) = 1, d eta(R, e_1) = d eta(R, e_2) = 0 at p.
ReebSolve reeb_field_linear(const ContactModel3D& model, const Eigen::Vector3d& p);
/// Closed form: d_theta for the connection form; b d_theta - b_vec for eta_g.
Eigen::Vector3d reeb_field(const ContactModel3D& model, const Eigen::Vector3d& p);

/// Finite-difference divergence of R with respect to the invariant density.
double reeb_divergence(const ContactModel3D& model, const Eigen::Vector3d& p, double h = 1e-4);

/// Residuals of the defining identities for a given field at p.
struct ReebIdentity {
    double eta_defect = 0.0;    // |eta(R) - 1|
    double deta_defect = 0.0;   // max_k |d eta(R, e_k)|
};
ReebIdentity reeb_identities(const ContactModel3D& model, const Eigen::Vector3d& p, const Eigen::Vector3d& R);

/// Brings an unwrapped point back to [0,1)^3 with the bundle gluing.
Eigen::Vector3d wrap_point(const ContactModel3D& model, const Eigen::Vector3d& p);

struct ReebTrajectory {
    std::vector<double> times;
    std::vector<Eigen::Vector3d> states;     // wrapped
    std::vector<Eigen::Vector3d> unwrapped;  // lift to the cover
    double step = 0.0;
    int order = 4;
    double max_eta_drift = 0.0;

    std::string to_csv() const;
};

/// Classical RK4 with fixed step |dt|; negative T integrates backward in time.
ReebTrajectory reeb_flow(const ContactModel3D& model, const Eigen::Vector3d& start, double T, double dt,
                         double max_dt = 0.05, double drift_limit = 1e-6);

/// Time-T map on the cover (no wrapping).
Eigen::Vector3d reeb_flow_map(const ContactModel3D& model, const Eigen::Vector3d& start, double T, double dt);

/// det(D Phi_T) * rho(Phi_T x) / rho(x) with D Phi_T from central differences of
/// nearby trajectories (Richardson-extrapolated); equals 1 when the flow preserves the contact volume.
double flow_volume_ratio(const ContactModel3D& model, const Eigen::Vector3d& start, double T, double dt,
                         double eps = 1e-5);

using Observable3D = std::function<double(const Eigen::Vector3d&)>;

/// (1/T) int_0^T a(gamma(t)) dt by composite Simpson on the fixed-step trajectory
/// (trapezoid when the step count is odd).
double birkhoff_average(const ContactModel3D& model, const Observable3D& a, const Eigen::Vector3d& start, double T,
                        double dt);

/// (1 / (2^d d!)) int |eta ^ d eta| with d = 1, midpoint rule on an n x n base grid.
double contact_volume(const ContactModel3D& model, int n = 256);

}  // namespace sublab
