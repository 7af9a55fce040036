#include "sublab/contact.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace sublab {

std::string to_string(ContactNormalization n) { return n == ContactNormalization::Connection ? "connection" : "metric"; }

ContactNormalization normalization_from_string(const std::string& s) {
    if (s == "connection") return ContactNormalization::Connection;
    if (s == "metric") return ContactNormalization::Metric;
    throw std::invalid_argument("unknown contact normalization '" + s + "'");
}

double ContactModel3D::sqrt_g(double x1, double x2) const {
    const Eigen::Vector2d g = metric_diag(x1, x2);
    return std::sqrt(g(0) * g(1));
}

Eigen::Vector2d ContactModel3D::A(double x1, double x2) const {
    Eigen::Vector2d a = A_periodic(x1, x2);
    a(1) += flux * x1;
    return a;
}

Eigen::Vector3d ContactModel3D::eta(const Eigen::Vector3d& p) const {
    const Eigen::Vector2d a = A(p(0), p(1));
    Eigen::Vector3d e(a(0), a(1), 1.0);
    if (normalization == ContactNormalization::Metric) e /= b(p(0), p(1));
    return e;
}

double ContactModel3D::volume_density(double x1, double x2) const {
    const double bv = b(x1, x2);
    const double sg = sqrt_g(x1, x2);
    return normalization == ContactNormalization::Connection ? std::abs(bv) * sg : sg / std::abs(bv);
}

ContactModel3D constant_field_model(int flux, double b, ContactNormalization n) {
    if (!(b > 0.0)) throw std::invalid_argument("field strength must be positive");
    ContactModel3D m;
    m.name = "constant";
    m.flux = flux;
    m.normalization = n;
    const double scale = static_cast<double>(flux) / b;  // sqrt(g) = flux / b
    m.metric_diag = [scale](double, double) { return Eigen::Vector2d(scale, scale); };
    m.b = [b](double, double) { return b; };
    m.grad_b = [](double, double) { return Eigen::Vector2d::Zero().eval(); };
    m.A_periodic = [](double, double) { return Eigen::Vector2d::Zero().eval(); };
    return m;
}

ContactModel3D sine_field_model(int flux, double eps1, double eps2, ContactNormalization n) {
    if (std::abs(eps1) + std::abs(eps2) >= 1.0) throw std::invalid_argument("field must stay positive");
    ContactModel3D m;
    m.name = "sine";
    m.flux = flux;
    m.normalization = n;
    const double q = flux;
    const double tp = 2.0 * kPi;
    m.metric_diag = [](double, double) { return Eigen::Vector2d(1.0, 1.0); };
    m.b = [=](double x1, double x2) { return q * (1.0 + eps1 * std::sin(tp * x1) + eps2 * std::cos(tp * x2)); };
    m.grad_b = [=](double x1, double x2) {
        return Eigen::Vector2d(q * eps1 * tp * std::cos(tp * x1), -q * eps2 * tp * std::sin(tp * x2));
    };
    m.A_periodic = [=](double x1, double x2) {
        return Eigen::Vector2d(-eps2 * q * std::sin(tp * x2) / tp, -eps1 * q * std::cos(tp * x1) / tp);
    };
    return m;
}

namespace {

// Fourth-order central difference of a scalar function of one variable.
double d4(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double curl_A(const ContactModel3D& m, double x1, double x2) {
    const double h = 1e-3;
    const double dA2 = d4([&](double s) { return m.A(s, x2)(1); }, x1, h);
    const double dA1 = d4([&](double s) { return m.A(x1, s)(0); }, x2, h);
    return dA2 - dA1;
}

// Matrix of the 2-form d eta in (x1, x2, theta) coordinates.
Eigen::Matrix3d deta_matrix(const ContactModel3D& m, const Eigen::Vector3d& p) {
    const double x1 = p(0), x2 = p(1);
    const double bv = m.b(x1, x2);
    const double F = bv * m.sqrt_g(x1, x2);
    Eigen::Matrix3d area = Eigen::Matrix3d::Zero();
    area(0, 1) = 1.0;
    area(1, 0) = -1.0;
    if (m.normalization == ContactNormalization::Connection) return F * area;
    const Eigen::Vector2d a = m.A(x1, x2);
    const Eigen::Vector3d eta(a(0), a(1), 1.0);
    const Eigen::Vector2d g = m.grad_b(x1, x2);
    const Eigen::Vector3d db(g(0), g(1), 0.0);
    return (F / bv) * area - (db * eta.transpose() - eta * db.transpose()) / (bv * bv);
}

}  // namespace

double contact_check(const ContactModel3D& model, int n) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x1 = (i + 0.5) / n, x2 = (j + 0.5) / n;
            const double F = std::abs(curl_A(model, x1, x2));
            double v = F;
            if (model.normalization == ContactNormalization::Metric) {
                const double bv = model.b(x1, x2);
                v = bv > 0.0 ? F / (bv * bv) : 0.0;
            }
            worst = std::min(worst, v);
        }
    return worst;
}

double curvature_mismatch(const ContactModel3D& model, int n) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x1 = (i + 0.5) / n, x2 = (j + 0.5) / n;
            worst = std::max(worst, std::abs(curl_A(model, x1, x2) - model.b(x1, x2) * model.sqrt_g(x1, x2)));
        }
    return worst;
}

ReebSolve reeb_field_linear(const ContactModel3D& model, const Eigen::Vector3d& p) {
    const Eigen::Vector3d e = model.eta(p);
    const Eigen::Matrix3d W = deta_matrix(model, p);
    Eigen::Matrix3d sys;
    sys.row(0) = e.transpose();
    sys.row(1) = (W.col(0)).transpose();  // d eta(R, e_1) = R^T W e_1
    sys.row(2) = (W.col(1)).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(sys);
    const Eigen::Vector3d s = svd.singularValues();
    ReebSolve out;
    out.condition = s(0) > 0.0 ? s(2) / s(0) : 0.0;
    if (out.condition < 1e-13) {
        std::ostringstream os;
        os << "Reeb system is singular at (" << p.transpose() << "), reciprocal condition " << out.condition;
        throw NumericalRefusal(os.str());
    }
    out.field = sys.fullPivLu().solve(Eigen::Vector3d(1.0, 0.0, 0.0));
    return out;
}

Eigen::Vector3d reeb_field(const ContactModel3D& model, const Eigen::Vector3d& p) {
    if (model.normalization == ContactNormalization::Connection) return Eigen::Vector3d(0.0, 0.0, 1.0);
    const double x1 = p(0), x2 = p(1);
    const double bv = model.b(x1, x2);
    const Eigen::Vector2d g = model.grad_b(x1, x2);
    // Hamiltonian field of b with respect to B = b vol_g: i_w(B) = db.
    const Eigen::Vector2d w = Eigen::Vector2d(g(1), -g(0)) / (bv * model.sqrt_g(x1, x2));
    const Eigen::Vector2d a = model.A(x1, x2);
    return Eigen::Vector3d(-w(0), -w(1), bv + a.dot(w));
}

ReebIdentity reeb_identities(const ContactModel3D& model, const Eigen::Vector3d& p, const Eigen::Vector3d& R) {
    ReebIdentity out;
    out.eta_defect = std::abs(model.eta(p).dot(R) - 1.0);
    const Eigen::RowVector3d row = R.transpose() * deta_matrix(model, p);
    out.deta_defect = row.cwiseAbs().maxCoeff();
    return out;
}

double reeb_divergence(const ContactModel3D& model, const Eigen::Vector3d& p, double h) {
    double div = 0.0;
    for (int a = 0; a < 3; ++a) {
        Eigen::Vector3d pp = p, pm = p;
        pp(a) += h;
        pm(a) -= h;
        const double fp = model.volume_density(pp(0), pp(1)) * reeb_field(model, pp)(a);
        const double fm = model.volume_density(pm(0), pm(1)) * reeb_field(model, pm)(a);
        div += (fp - fm) / (2.0 * h);
    }
    return div / model.volume_density(p(0), p(1));
}

Eigen::Vector3d wrap_point(const ContactModel3D& model, const Eigen::Vector3d& p) {
    Eigen::Vector3d q = p;
    const double k1 = std::floor(q(0));
    q(0) -= k1;
    q(2) += k1 * model.flux * q(1);
    q(1) -= std::floor(q(1));
    q(2) -= std::floor(q(2));
    return q;
}

namespace {

Eigen::Vector3d rk4_step(const ContactModel3D& m, const Eigen::Vector3d& p, double h) {
    const Eigen::Vector3d k1 = reeb_field(m, p);
    const Eigen::Vector3d k2 = reeb_field(m, p + 0.5 * h * k1);
    const Eigen::Vector3d k3 = reeb_field(m, p + 0.5 * h * k2);
    const Eigen::Vector3d k4 = reeb_field(m, p + h * k3);
    return p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

int step_count(double T, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    return std::max(1, static_cast<int>(std::ceil(std::abs(T) / dt - 1e-9)));
}

}  // namespace

std::string ReebTrajectory::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(17) << "t,x1,x2,theta\n";
    for (std::size_t i = 0; i < times.size(); ++i)
        os << times[i] << ',' << states[i](0) << ',' << states[i](1) << ',' << states[i](2) << '\n';
    return os.str();
}

ReebTrajectory reeb_flow(const ContactModel3D& model, const Eigen::Vector3d& start, double T, double dt,
                         double max_dt, double drift_limit) {
    if (dt > max_dt) throw std::invalid_argument("time step exceeds the configured maximum");
    const int n = step_count(T, dt);
    const double h = T / n;
    ReebTrajectory tr;
    tr.step = h;
    Eigen::Vector3d p = start;
    for (int k = 0; k <= n; ++k) {
        if (k > 0) p = rk4_step(model, p, h);
        const double drift = std::abs(model.eta(p).dot(reeb_field(model, p)) - 1.0);
        tr.max_eta_drift = std::max(tr.max_eta_drift, drift);
        if (drift > drift_limit) {
            std::ostringstream os;
            os << "eta(gamma') drifted to " << drift << " at t=" << k * h;
            throw NumericalRefusal(os.str());
        }
        tr.times.push_back(k * h);
        tr.unwrapped.push_back(p);
        tr.states.push_back(wrap_point(model, p));
    }
    return tr;
}

Eigen::Vector3d reeb_flow_map(const ContactModel3D& model, const Eigen::Vector3d& start, double T, double dt) {
    const int n = step_count(T, dt);
    const double h = T / n;
    Eigen::Vector3d p = start;
    for (int k = 0; k < n; ++k) p = rk4_step(model, p, h);
    return p;
}

double flow_volume_ratio(const ContactModel3D& model, const Eigen::Vector3d& start, double T, double dt, double eps) {
    // Central differences at eps and eps/2, combined by Richardson extrapolation.
    auto jacobian = [&](double e) {
        Eigen::Matrix3d J;
        for (int a = 0; a < 3; ++a) {
            Eigen::Vector3d sp = start, sm = start;
            sp(a) += e;
            sm(a) -= e;
            J.col(a) = (reeb_flow_map(model, sp, T, dt) - reeb_flow_map(model, sm, T, dt)) / (2.0 * e);
        }
        return J;
    };
    const Eigen::Matrix3d J = (4.0 * jacobian(0.5 * eps) - jacobian(eps)) / 3.0;
    const Eigen::Vector3d end = reeb_flow_map(model, start, T, dt);
    return J.determinant() * model.volume_density(end(0), end(1)) / model.volume_density(start(0), start(1));
}

double birkhoff_average(const ContactModel3D& model, const Observable3D& a, const Eigen::Vector3d& start, double T,
                        double dt) {
    const ReebTrajectory tr = reeb_flow(model, start, T, dt, std::numeric_limits<double>::infinity(),
                                        std::numeric_limits<double>::infinity());
    const std::size_t n = tr.states.size() - 1;
    std::vector<double> f(n + 1);
    for (std::size_t k = 0; k <= n; ++k) f[k] = a(tr.states[k]);
    double s = 0.0;
    if (n % 2 == 0) {
        for (std::size_t k = 0; k <= n; ++k) s += f[k] * (k == 0 || k == n ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0));
        s /= 3.0;
    } else {
        for (std::size_t k = 0; k <= n; ++k) s += f[k] * (k == 0 || k == n ? 0.5 : 1.0);
    }
    return s / static_cast<double>(n);
}

double contact_volume(const ContactModel3D& model, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += model.volume_density((i + 0.5) / n, (j + 0.5) / n);
    // 1 / (2^d d!) with d = 1; the fiber has length 1.
    return 0.5 * s / (static_cast<double>(n) * n);
}

}  // namespace sublab
