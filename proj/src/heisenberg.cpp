#include "sublab/heisenberg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sublab {

namespace {

void require_same_dim(const GroupElement& a, const GroupElement& b) {
    if (a.d != b.d) throw std::invalid_argument("group elements of different dimension");
}

double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

long ipow(int base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

// Sparse matrix acting by `A` on axis `axis` of the tensor basis.
SpCMatrix kron_axis(const Eigen::MatrixXcd& A, int axis, int d, int N) {
    const long dim = ipow(N, d);
    const long stride = ipow(N, d - 1 - axis);
    std::vector<Eigen::Triplet<cd>> trips;
    for (long p = 0; p < dim; ++p) {
        const int a = static_cast<int>((p / stride) % N);
        for (int b = 0; b < N; ++b) {
            const cd v = A(b, a);
            if (v == cd(0.0, 0.0)) continue;
            trips.emplace_back(p + (b - a) * stride, p, v);
        }
    }
    SpCMatrix S(dim, dim);
    S.setFromTriplets(trips.begin(), trips.end());
    return S;
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
    CMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

double column_leakage(const CMatrix& U) {
    const int N = static_cast<int>(U.rows());
    const int half = N / 2;
    double worst = 0.0;
    for (int j = 0; j < half; ++j) {
        const double total = U.col(j).squaredNorm();
        if (total <= 0.0) continue;
        const double out = U.col(j).tail(N - half).squaredNorm();
        worst = std::max(worst, out / total);
    }
    return worst;
}

// Gauss-Legendre nodes/weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x = es.eigenvalues();
    w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

}  // namespace

// ---------------------------------------------------------------------------

GroupElement::GroupElement(int dim) : d(dim), x(Eigen::VectorXd::Zero(dim)), y(Eigen::VectorXd::Zero(dim)) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
}

GroupElement::GroupElement(Eigen::VectorXd xs, Eigen::VectorXd ys, double zc)
    : d(static_cast<int>(xs.size())), x(std::move(xs)), y(std::move(ys)), z(zc) {
    if (d < 1 || y.size() != d) throw std::invalid_argument("x and y must have equal positive length");
}

GroupElement GroupElement::h1(double x, double y, double z) {
    return GroupElement(Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, y), z);
}

GroupElement group_mul(const GroupElement& a, const GroupElement& b) {
    require_same_dim(a, b);
    return GroupElement(a.x + b.x, a.y + b.y, a.z + b.z + 0.5 * (a.x.dot(b.y) - a.y.dot(b.x)));
}

GroupElement inverse(const GroupElement& g) { return GroupElement(-g.x, -g.y, -g.z); }

GroupElement dilate(double t, const GroupElement& g) {
    if (!(t > 0.0)) throw std::invalid_argument("dilation factor must be positive");
    return GroupElement(t * g.x, t * g.y, t * t * g.z);
}

double koranyi_norm(const GroupElement& g) {
    const double r2 = g.x.squaredNorm() + g.y.squaredNorm();
    return std::pow(r2 * r2 + g.z * g.z, 0.25);
}

double coordinate_distance(const GroupElement& a, const GroupElement& b) {
    require_same_dim(a, b);
    double m = std::abs(a.z - b.z);
    m = std::max(m, (a.x - b.x).cwiseAbs().maxCoeff());
    m = std::max(m, (a.y - b.y).cwiseAbs().maxCoeff());
    return m;
}

double scale_rep(double lambda, double hbar) {
    if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
    return hbar * hbar * lambda;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd hermite_position_matrix(int N) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    for (int n = 0; n + 1 < N; ++n) M(n + 1, n) = M(n, n + 1) = std::sqrt((n + 1) / 2.0);
    return M;
}

Eigen::MatrixXd hermite_derivative_matrix(int N) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N, N);
    for (int n = 0; n + 1 < N; ++n) {
        D(n, n + 1) = std::sqrt((n + 1) / 2.0);
        D(n + 1, n) = -std::sqrt((n + 1) / 2.0);
    }
    return D;
}

std::vector<int> multi_index(long flat, int d, int N) {
    std::vector<int> alpha(d);
    for (int i = d - 1; i >= 0; --i) {
        alpha[i] = static_cast<int>(flat % N);
        flat /= N;
    }
    return alpha;
}

long flat_index(const std::vector<int>& alpha, int N) {
    long p = 0;
    for (int a : alpha) p = p * N + a;
    return p;
}

std::vector<bool> safe_band_mask(int d, int N) {
    const long dim = ipow(N, d);
    std::vector<bool> mask(dim);
    for (long p = 0; p < dim; ++p) {
        const auto alpha = multi_index(p, d, N);
        mask[p] = std::all_of(alpha.begin(), alpha.end(), [&](int a) { return 2 * a < N; });
    }
    return mask;
}

double outside_band_fraction(const CVector& v, int d, int N) {
    const auto mask = safe_band_mask(d, N);
    double in = 0.0, out = 0.0;
    for (Eigen::Index p = 0; p < v.size(); ++p) (mask[p] ? in : out) += std::norm(v(p));
    const double total = in + out;
    return total > 0.0 ? out / total : 0.0;
}

long TruncatedRep::dim() const { return ipow(N, d); }

Eigen::MatrixXcd TruncatedRep::axis_X() const {
    return std::sqrt(std::abs(lambda)) * hermite_derivative_matrix(N).cast<cd>();
}

Eigen::MatrixXcd TruncatedRep::axis_Y() const {
    return kI * sgn(lambda) * std::sqrt(std::abs(lambda)) * hermite_position_matrix(N).cast<cd>();
}

TruncatedRep schrodinger_generators(double lambda, int d, int N) {
    if (lambda == 0.0) throw std::invalid_argument("lambda = 0 is a non-generic representation");
    if (d < 1) throw std::invalid_argument("d must be positive");
    if (N < 4) throw std::invalid_argument("truncation N must be at least 4");
    TruncatedRep rep;
    rep.lambda = lambda;
    rep.d = d;
    rep.N = N;
    rep.gen_R = kI * lambda;
    const CMatrix X1 = rep.axis_X();
    const CMatrix Y1 = rep.axis_Y();
    for (int i = 0; i < d; ++i) {
        rep.gen_X.push_back(kron_axis(X1, i, d, N));
        rep.gen_Y.push_back(kron_axis(Y1, i, d, N));
    }
    return rep;
}

CMatrix rep_exponential(const TruncatedRep& rep, const GroupElement& g, TruncationReport* report,
                        double leak_threshold) {
    if (g.d != rep.d) throw std::invalid_argument("group element dimension differs from representation");
    const CMatrix X1 = rep.axis_X();
    const CMatrix Y1 = rep.axis_Y();
    CMatrix result = CMatrix::Constant(1, 1, std::exp(kI * rep.lambda * g.z));
    double kept = 1.0;
    for (int i = 0; i < rep.d; ++i) {
        const CMatrix A = g.x(i) * X1 + g.y(i) * Y1;
        const CMatrix E = A.exp();
        kept *= 1.0 - column_leakage(E);
        result = kron(result, E);
    }
    if (report != nullptr) {
        report->leakage = 1.0 - kept;
        report->flagged = report->leakage > leak_threshold;
    }
    return result;
}

AxisExponential::AxisExponential(double lambda, int N) : lambda_(lambda), N_(N) {
    if (lambda == 0.0) throw std::invalid_argument("lambda = 0 is a non-generic representation");
    const CMatrix H = -kI * hermite_derivative_matrix(N).cast<cd>();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    V_ = es.eigenvectors();
    omega_ = es.eigenvalues();
}

CMatrix AxisExponential::operator()(double x, double y) const {
    const double a = std::sqrt(std::abs(lambda_));
    const cd w(x, sgn(lambda_) * y);
    const double rho = std::abs(w);
    const double phi = std::arg(w);
    CVector diag(N_);
    for (int k = 0; k < N_; ++k) diag(k) = std::exp(kI * (rho * a * omega_(k)));
    CMatrix U = V_ * diag.asDiagonal() * V_.adjoint();
    for (int m = 0; m < N_; ++m)
        for (int n = 0; n < N_; ++n) U(m, n) *= std::exp(-kI * (static_cast<double>(m - n) * phi));
    return U;
}

// ---------------------------------------------------------------------------

double SampledKernel::cell_volume() const {
    double v = 1.0;
    for (double h : spacing) v *= h;
    return v;
}

double SampledKernel::coordinate(int axis, int index) const { return lower[axis] + index * spacing[axis]; }

std::vector<int> SampledKernel::unflatten(std::size_t flat) const {
    std::vector<int> idx(counts.size());
    for (int a = static_cast<int>(counts.size()) - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % counts[a]);
        flat /= counts[a];
    }
    return idx;
}

GroupElement SampledKernel::point(std::size_t flat) const {
    const auto idx = unflatten(flat);
    GroupElement g(d);
    for (int i = 0; i < d; ++i) {
        g.x(i) = coordinate(i, idx[i]);
        g.y(i) = coordinate(d + i, idx[d + i]);
    }
    g.z = coordinate(2 * d, idx[2 * d]);
    return g;
}

double SampledKernel::boundary_ratio() const {
    double peak = 0.0, edge = 0.0;
    for (std::size_t p = 0; p < values.size(); ++p) {
        const double v = std::abs(values[p]);
        peak = std::max(peak, v);
        const auto idx = unflatten(p);
        for (std::size_t a = 0; a < idx.size(); ++a) {
            if (idx[a] == 0 || idx[a] == counts[a] - 1) {
                edge = std::max(edge, v);
                break;
            }
        }
    }
    return peak > 0.0 ? edge / peak : 0.0;
}

double SampledKernel::l2_norm_squared() const {
    double s = 0.0;
    for (const cd& v : values) s += std::norm(v);
    return s * cell_volume();
}

SampledKernel sample_kernel(int d, const std::vector<int>& counts, const std::vector<double>& lower,
                            const std::vector<double>& spacing,
                            const std::function<cd(const GroupElement&)>& fn) {
    const std::size_t axes = static_cast<std::size_t>(2 * d + 1);
    if (d < 1 || counts.size() != axes || lower.size() != axes || spacing.size() != axes)
        throw std::invalid_argument("kernel grid needs 2d+1 axes");
    SampledKernel k;
    k.d = d;
    k.counts = counts;
    k.lower = lower;
    k.spacing = spacing;
    std::size_t total = 1;
    for (int c : counts) {
        if (c < 1) throw std::invalid_argument("kernel grid axis with no points");
        total *= static_cast<std::size_t>(c);
    }
    for (double h : spacing)
        if (!(h > 0.0)) throw std::invalid_argument("kernel grid spacing must be positive");
    k.values.resize(total);
    for (std::size_t p = 0; p < total; ++p) k.values[p] = fn(k.point(p));
    return k;
}

SampledKernel sample_kernel_box(int d, const std::vector<double>& half_widths,
                                const std::vector<double>& spacing,
                                const std::function<cd(const GroupElement&)>& fn) {
    std::vector<int> counts;
    std::vector<double> lower;
    for (std::size_t a = 0; a < half_widths.size(); ++a) {
        const int half = static_cast<int>(std::llround(half_widths[a] / spacing.at(a)));
        counts.push_back(2 * half + 1);
        lower.push_back(-half * spacing[a]);
    }
    return sample_kernel(d, counts, lower, spacing, fn);
}

void require_decay(const SampledKernel& k, double floor) {
    const double r = k.boundary_ratio();
    if (r > floor) {
        std::ostringstream os;
        os << "kernel does not decay at the box boundary: boundary/peak = " << r << " > " << floor;
        throw NumericalRefusal(os.str());
    }
}

namespace {

// Partial transform in z: sum_z kappa(x, y, z) e^{-i lambda z} h_z for every (x, y) node.
std::vector<cd> z_transform(const SampledKernel& k, double lambda) {
    const int nz = k.counts.back();
    const std::size_t nxy = k.values.size() / static_cast<std::size_t>(nz);
    std::vector<cd> phase(nz);
    for (int j = 0; j < nz; ++j) phase[j] = std::exp(-kI * (lambda * k.coordinate(2 * k.d, j))) * k.spacing.back();
    std::vector<cd> out(nxy);
    for (std::size_t p = 0; p < nxy; ++p) {
        cd s = 0.0;
        const cd* row = &k.values[p * nz];
        for (int j = 0; j < nz; ++j) s += row[j] * phase[j];
        out[p] = s;
    }
    return out;
}

// (x, y) of a node of the z-reduced grid.
void xy_point(const SampledKernel& k, std::size_t p, Eigen::VectorXd& x, Eigen::VectorXd& y) {
    const int d = k.d;
    for (int a = 2 * d - 1; a >= 0; --a) {
        const int idx = static_cast<int>(p % k.counts[a]);
        p /= k.counts[a];
        if (a < d) x(a) = k.coordinate(a, idx);
        else y(a - d) = k.coordinate(a, idx);
    }
}

CMatrix fourier_d1(const SampledKernel& k, const std::vector<cd>& kz, const AxisExponential& ax) {
    const int N = ax.N();
    const double lambda = ax.lambda();
    const double a = std::sqrt(std::abs(lambda));
    const double s = sgn(lambda);
    const double hxy = k.spacing[0] * k.spacing[1];
    std::vector<std::size_t> active;
    for (std::size_t p = 0; p < kz.size(); ++p)
        if (kz[p] != cd(0.0, 0.0)) active.push_back(p);
    const Eigen::Index P = static_cast<Eigen::Index>(active.size());
    CMatrix E(P, N), Ph(P, 2 * N - 1);
    Eigen::VectorXd x(1), y(1);
    for (Eigen::Index r = 0; r < P; ++r) {
        xy_point(k, active[r], x, y);
        // pi(g)^* = exp(-(x gen_X + y gen_Y)) on the axis.
        const cd w(-x(0), -s * y(0));
        const double rho = std::abs(w);
        const double phi = std::arg(w);
        for (int kk = 0; kk < N; ++kk) E(r, kk) = std::exp(kI * (rho * a * ax.omega()(kk)));
        const cd step = std::exp(-kI * phi);
        const cd F = kz[active[r]] * hxy;
        cd pos = F, neg = F;
        Ph(r, N - 1) = F;
        for (int dlt = 1; dlt < N; ++dlt) {
            pos *= step;
            neg *= std::conj(step);
            Ph(r, N - 1 + dlt) = pos;
            Ph(r, N - 1 - dlt) = neg;
        }
    }
    const CMatrix S = E.transpose() * Ph;  // N x (2N-1)
    const CMatrix& V = ax.V();
    CMatrix U = CMatrix::Zero(N, N);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
            cd acc = 0.0;
            for (int kk = 0; kk < N; ++kk) acc += V(m, kk) * std::conj(V(n, kk)) * S(kk, m - n + N - 1);
            U(m, n) = acc;
        }
    return U;
}

CMatrix fourier_general(const SampledKernel& k, const std::vector<cd>& kz, const AxisExponential& ax) {
    const int d = k.d;
    double hxy = 1.0;
    for (int a = 0; a < 2 * d; ++a) hxy *= k.spacing[a];
    const long dim = ipow(ax.N(), d);
    CMatrix U = CMatrix::Zero(dim, dim);
    Eigen::VectorXd x(d), y(d);
    for (std::size_t p = 0; p < kz.size(); ++p) {
        if (kz[p] == cd(0.0, 0.0)) continue;
        xy_point(k, p, x, y);
        CMatrix T = CMatrix::Constant(1, 1, kz[p] * hxy);
        for (int i = 0; i < d; ++i) T = kron(T, ax(-x(i), -y(i)));
        U += T;
    }
    return U;
}

}  // namespace

FourierTransform group_fourier(const SampledKernel& kernel, double lambda, int N, double decay_floor) {
    if (lambda == 0.0) throw std::invalid_argument("lambda = 0 is a non-generic representation");
    if (N < 4) throw std::invalid_argument("truncation N must be at least 4");
    require_decay(kernel, decay_floor);
    FourierTransform out;
    out.lambda = lambda;
    out.N = N;
    const double root = std::sqrt(std::abs(lambda) * (N + 1));
    std::ostringstream warn;
    for (int a = 0; a < 2 * kernel.d; ++a) {
        if (kernel.spacing[a] * root > 2.0 * kPi) {
            out.nyquist_ok = false;
            warn << "axis " << a << " spacing " << kernel.spacing[a] << " under-resolves lambda=" << lambda
                 << ", N=" << N << "; ";
        }
    }
    if (kernel.spacing.back() * std::abs(lambda) > kPi) {
        out.nyquist_ok = false;
        warn << "z spacing under-resolves lambda=" << lambda << "; ";
    }
    out.warning = warn.str();
    const auto kz = z_transform(kernel, lambda);
    const AxisExponential ax(lambda, N);
    out.value = kernel.d == 1 ? fourier_d1(kernel, kz, ax) : fourier_general(kernel, kz, ax);
    return out;
}

SampledKernel grid_convolution(const SampledKernel& k1, const std::function<cd(const GroupElement&)>& k2) {
    SampledKernel out = k1;
    const double cell = k1.cell_volume();
    std::vector<GroupElement> pts(k1.size());
    std::vector<GroupElement> inv(k1.size());
    for (std::size_t p = 0; p < k1.size(); ++p) {
        pts[p] = k1.point(p);
        inv[p] = inverse(pts[p]);
    }
    for (std::size_t q = 0; q < k1.size(); ++q) {
        cd acc = 0.0;
        for (std::size_t p = 0; p < k1.size(); ++p) {
            if (k1.values[p] == cd(0.0, 0.0)) continue;
            acc += k1.values[p] * k2(group_mul(inv[p], pts[q]));
        }
        out.values[q] = acc * cell;
    }
    return out;
}

double plancherel_density(double lambda, int d) {
    return std::pow(2.0 * kPi, -(d + 1)) * std::pow(std::abs(lambda), d);
}

// ---------------------------------------------------------------------------

LambdaGrid LambdaGrid::log_gauss(double lambda_min, double lambda_max, int nodes_per_side, int closure_degree,
                                 int closure_points) {
    if (!(lambda_min > 0.0) || !(lambda_max > lambda_min))
        throw std::invalid_argument("lambda grid needs 0 < lambda_min < lambda_max");
    if (nodes_per_side < 2) throw std::invalid_argument("lambda grid needs at least two nodes per side");
    if (closure_points > nodes_per_side || 2 * closure_points <= closure_degree)
        throw std::invalid_argument("gap closure needs more fitting nodes than polynomial coefficients");
    Eigen::VectorXd u, w;
    gauss_legendre(nodes_per_side, u, w);
    const double lo = std::log(lambda_min), hi = std::log(lambda_max);
    std::vector<double> pos(nodes_per_side), posw(nodes_per_side);
    for (int i = 0; i < nodes_per_side; ++i) {
        pos[i] = std::exp(lo + 0.5 * (u(i) + 1.0) * (hi - lo));
        posw[i] = w(i) * 0.5 * (hi - lo) * pos[i];
    }
    LambdaGrid g;
    g.lambda_min = lambda_min;
    g.lambda_max = lambda_max;
    g.closure_degree = closure_degree;
    g.closure_points = closure_points;
    for (int i = nodes_per_side - 1; i >= 0; --i) {
        g.nodes.push_back(-pos[i]);
        g.weights.push_back(posw[i]);
    }
    for (int i = 0; i < nodes_per_side; ++i) {
        g.nodes.push_back(pos[i]);
        g.weights.push_back(posw[i]);
    }
    return g;
}

cd LambdaGrid::plain_integral(const std::vector<cd>& samples) const {
    if (samples.size() != nodes.size()) throw std::invalid_argument("sample count differs from node count");
    cd s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * samples[i];
    return s;
}

cd LambdaGrid::gap_integral(const std::vector<cd>& samples) const {
    if (samples.size() != nodes.size()) throw std::invalid_argument("sample count differs from node count");
    if (closure_points <= 0) return 0.0;
    const std::size_t half = nodes.size() / 2;
    std::vector<std::size_t> pick;
    for (int j = 0; j < closure_points; ++j) {
        pick.push_back(half - 1 - j);
        pick.push_back(half + j);
    }
    const int ncoef = closure_degree + 1;
    CMatrix A(pick.size(), ncoef);
    CVector b(pick.size());
    for (std::size_t r = 0; r < pick.size(); ++r) {
        const double t = nodes[pick[r]] / lambda_min;
        double tp = 1.0;
        for (int c = 0; c < ncoef; ++c) {
            A(r, c) = tp;
            tp *= t;
        }
        b(r) = samples[pick[r]];
    }
    const CVector coef = A.colPivHouseholderQr().solve(b);
    cd s = 0.0;
    for (int c = 0; c < ncoef; c += 2) s += coef(c) * (2.0 / (c + 1));
    return s * lambda_min;
}

PlancherelReport plancherel_check(const SampledKernel& kernel, const LambdaGrid& grid, int N, int workers) {
    PlancherelReport rep;
    rep.kernel_l2 = kernel.l2_norm_squared();
    rep.lambdas = grid.nodes;
    const std::size_t n = grid.nodes.size();
    rep.integrand.assign(n, 0.0);
    std::vector<double> leak(n, 0.0);
    std::vector<std::string> warn(n);
    const auto mask = safe_band_mask(kernel.d, N);
    parallel_for(n, workers, [&](std::size_t i) {
        const double lambda = grid.nodes[i];
        const FourierTransform ft = group_fourier(kernel, lambda, N);
        double in = 0.0, total = 0.0;
        for (Eigen::Index c = 0; c < ft.value.cols(); ++c)
            for (Eigen::Index r = 0; r < ft.value.rows(); ++r) {
                const double v = std::norm(ft.value(r, c));
                total += v;
                if (mask[r] && mask[c]) in += v;
            }
        rep.integrand[i] = plancherel_density(lambda, kernel.d) * in;
        leak[i] = total > 0.0 ? 1.0 - in / total : 0.0;
        warn[i] = ft.warning;
    });
    std::vector<cd> samples(rep.integrand.begin(), rep.integrand.end());
    rep.transform_l2_raw = grid.plain_integral(samples).real();
    const double gap = grid.gap_integral(samples).real();
    rep.transform_l2 = rep.transform_l2_raw + gap;
    rep.relative_error = std::abs(rep.transform_l2 - rep.kernel_l2) / rep.kernel_l2;
    rep.relative_error_raw = std::abs(rep.transform_l2_raw - rep.kernel_l2) / rep.kernel_l2;
    rep.gap_fraction = gap / rep.transform_l2;
    for (std::size_t i = 0; i < n; ++i) {
        rep.max_band_leakage = std::max(rep.max_band_leakage, leak[i]);
        if (!warn[i].empty()) rep.warnings.push_back(warn[i]);
    }
    return rep;
}

InversionReport fourier_inversion_at(const SampledKernel& kernel, const GroupElement& point,
                                     const LambdaGrid& grid, int N, int workers, double unsafe_fraction) {
    if (point.d != kernel.d) throw std::invalid_argument("point dimension differs from kernel");
    const std::size_t n = grid.nodes.size();
    std::vector<cd> samples(n);
    std::vector<double> outside(n, 0.0);
    const auto mask = safe_band_mask(kernel.d, N);
    parallel_for(n, workers, [&](std::size_t i) {
        const double lambda = grid.nodes[i];
        const FourierTransform ft = group_fourier(kernel, lambda, N);
        const AxisExponential ax(lambda, N);
        CMatrix P = CMatrix::Constant(1, 1, std::exp(kI * (lambda * point.z)));
        for (int a = 0; a < kernel.d; ++a) P = kron(P, ax(point.x(a), point.y(a)));
        const CMatrix prod = P * ft.value;
        double in = 0.0, out = 0.0;
        cd tr = 0.0;
        for (Eigen::Index r = 0; r < prod.rows(); ++r) {
            tr += prod(r, r);
            (mask[r] ? in : out) += std::abs(prod(r, r));
        }
        samples[i] = plancherel_density(lambda, kernel.d) * tr;
        outside[i] = in + out > 0.0 ? out / (in + out) : 0.0;
    });
    InversionReport rep;
    rep.value_raw = grid.plain_integral(samples);
    rep.value = rep.value_raw + grid.gap_integral(samples);
    for (double f : outside) rep.max_outside_trace_fraction = std::max(rep.max_outside_trace_fraction, f);
    rep.truncation_unsafe = rep.max_outside_trace_fraction > unsafe_fraction;
    return rep;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXcd fock_bargmann_matrix(double lambda, int N, const GroupElement& g) {
    if (lambda == 0.0) throw std::invalid_argument("lambda = 0 is a non-generic representation");
    if (g.d != 1) throw std::invalid_argument("fock_bargmann_matrix acts on one axis (d = 1)");
    // Negative lambda: conjugate realization pi^{|lambda|}(x, -y, -r).
    const double s = sgn(lambda);
    const double c = std::sqrt(std::abs(lambda) / 2.0);
    const cd a = c * cd(g.x(0), s * g.y(0));
    const cd pref = std::exp(kI * (lambda * g.z) - 0.5 * std::norm(a));
    std::vector<double> lfact(N + 1, 0.0);
    for (int k = 1; k <= N; ++k) lfact[k] = lfact[k - 1] + std::log(static_cast<double>(k));
    CMatrix F(N, N);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
            cd acc = 0.0;
            for (int j = 0; j <= std::min(m, n); ++j) {
                // binom(n, j) a^{n-j} (-conj a)^{m-j} / (m-j)!, scaled by sqrt(m!/n!).
                const double logc = lfact[n] - lfact[j] - lfact[n - j] - lfact[m - j] + 0.5 * (lfact[m] - lfact[n]);
                acc += std::exp(logc) * std::pow(a, n - j) * std::pow(-std::conj(a), m - j);
            }
            F(m, n) = pref * acc;
        }
    return F;
}

FockBargmannReport fock_bargmann_check(double lambda, int d, int N, const GroupElement& g, const CMatrix& schrodinger) {
    if (g.d != d) throw std::invalid_argument("group element dimension differs from d");
    CMatrix S = schrodinger;
    if (S.size() == 0) S = rep_exponential(schrodinger_generators(lambda, d, N), g);
    CMatrix F = CMatrix::Constant(1, 1, 1.0);
    for (int i = 0; i < d; ++i) {
        const GroupElement axis = GroupElement::h1(g.x(i), g.y(i), i == 0 ? g.z : 0.0);
        F = kron(F, fock_bargmann_matrix(lambda, N, axis));
    }
    if (F.rows() != S.rows()) throw std::invalid_argument("Schrodinger matrix has the wrong size");
    const auto mask = safe_band_mask(d, N);
    cd overlap = 0.0;
    for (Eigen::Index c = 0; c < F.cols(); ++c)
        for (Eigen::Index r = 0; r < F.rows(); ++r)
            if (mask[r] && mask[c]) overlap += std::conj(S(r, c)) * F(r, c);
    FockBargmannReport rep;
    rep.global_phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cd(1.0, 0.0);
    for (Eigen::Index c = 0; c < F.cols(); ++c)
        for (Eigen::Index r = 0; r < F.rows(); ++r)
            if (mask[r] && mask[c])
                rep.residual = std::max(rep.residual, std::abs(F(r, c) - rep.global_phase * S(r, c)));
    return rep;
}

}  // namespace sublab
