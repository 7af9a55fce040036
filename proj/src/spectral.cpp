#include "sublab/spectral.hpp"

#include <boost/math/differentiation/autodiff.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace sublab {

namespace {

void require_complete(const SpectralDataset& ds, double delta, const char* what) {
    if (!ds.complete) throw NumericalRefusal(std::string(what) + ": dataset is incomplete (" + ds.incomplete_reason + ")");
    if (delta > ds.delta_max * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << what << ": delta " << delta << " exceeds the completeness bound " << ds.delta_max;
        throw NumericalRefusal(os.str());
    }
}

long long binomial(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-16) break;
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

}  // namespace

// ---------------------------------------------------------------------------

long counting_function(const SpectralDataset& dataset, double delta) {
    require_complete(dataset, delta, "counting_function");
    const auto it = std::upper_bound(dataset.entries.begin(), dataset.entries.end(), delta,
                                     [](double d, const SpectralEntry& e) { return d < e.delta; });
    return static_cast<long>(it - dataset.entries.begin());
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

WeylFit weyl_fit(const SpectralDataset& dataset, double delta_lo, double delta_hi, int samples) {
    if (!(delta_lo > 0.0) || delta_hi < 10.0 * delta_lo * (1.0 - 1e-12))
        throw NumericalRefusal("weyl_fit: window must span at least one decade");
    require_complete(dataset, delta_hi, "weyl_fit");
    WeylFit fit;
    fit.delta_lo = delta_lo;
    fit.delta_hi = delta_hi;
    for (int i = 0; i < samples; ++i) {
        const double d = delta_lo * std::pow(delta_hi / delta_lo, static_cast<double>(i) / (samples - 1));
        const long c = counting_function(dataset, d);
        if (c <= 0) throw NumericalRefusal("weyl_fit: zero count inside the window");
        fit.deltas.push_back(d);
        fit.counts.push_back(c);
    }
    std::vector<long> distinct = fit.counts;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    fit.distinct_counts = static_cast<int>(distinct.size());
    if (fit.distinct_counts < 30) throw NumericalRefusal("weyl_fit: fewer than 30 distinct counting values");
    std::vector<double> counts(fit.counts.begin(), fit.counts.end());
    fit.exponent = loglog_slope(fit.deltas, counts);
    double mean_offset = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i)
        mean_offset += std::log(counts[i]) - fit.exponent * std::log(fit.deltas[i]);
    mean_offset /= static_cast<double>(counts.size());
    fit.constant = std::exp(mean_offset);
    double ss = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double r = std::log(counts[i]) - mean_offset - fit.exponent * std::log(fit.deltas[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(counts.size()));
    return fit;
}

// ---------------------------------------------------------------------------

boost::rational<long long> landau_coefficient(int n, int d) {
    if (n < 0 || d < 1) throw std::invalid_argument("landau_coefficient needs n >= 0, d >= 1");
    long long denom = 1;
    for (int i = 0; i < d + 1; ++i) denom *= (2LL * n + d);
    return boost::rational<long long>(binomial(n + d - 1, n), denom);
}

boost::rational<long long> landau_ratio(int n1, int n2, int d) {
    return landau_coefficient(n1, d) / landau_coefficient(n2, d);
}

namespace {

// sum_j binom(j + d - 1, j) / (2j + d)^{d + 1}, summed once per d.
double landau_normalizer(int d) {
    static std::mutex guard;
    static std::map<int, double> cache;
    std::lock_guard<std::mutex> lock(guard);
    const auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    const int terms = 1000000;
    double total = 0.0;
    for (int j = terms - 1; j >= 0; --j) {
        const double logc = std::lgamma(j + d) - std::lgamma(j + 1.0) - std::lgamma(static_cast<double>(d)) -
                            (d + 1) * std::log(2.0 * j + d);
        total += std::exp(logc);
    }
    // Tail: c_j ~ j^{-2} / (2^{d+1} (d-1)!).
    total += 1.0 / (std::pow(2.0, d + 1) * std::tgamma(static_cast<double>(d)) * terms);
    cache[d] = total;
    return total;
}

}  // namespace

double landau_fraction(int n, int d) {
    return boost::rational_cast<double>(landau_coefficient(n, d)) / landau_normalizer(d);
}

LandauProportions landau_proportions(const SpectralDataset& dataset, int n_max, double delta) {
    require_complete(dataset, delta, "landau_proportions");
    LandauProportions p;
    p.delta = delta;
    p.counts.assign(static_cast<std::size_t>(n_max) + 1, 0);
    long above = 0;
    for (const auto& e : dataset.entries) {
        if (e.delta > delta) break;
        if (!e.level) {
            ++p.unlabeled;
            continue;
        }
        ++p.labeled;
        if (*e.level <= n_max) ++p.counts[static_cast<std::size_t>(*e.level)];
        else ++above;
    }
    if (p.labeled < 200) throw NumericalRefusal("landau_proportions: fewer than 200 labeled eigenvalues");
    for (int n = 0; n <= n_max; ++n) {
        const double emp = static_cast<double>(p.counts[static_cast<std::size_t>(n)]) / p.labeled;
        const double exp = landau_fraction(n, 1);
        p.empirical.push_back(emp);
        p.expected.push_back(exp);
        p.relative_error.push_back(std::abs(emp - exp) / exp);
    }
    p.remainder = static_cast<double>(above) / p.labeled;
    return p;
}

// ---------------------------------------------------------------------------

std::vector<double> matrix_elements(const SpectralDataset& dataset, const Observable2D& a) {
    if (dataset.vectors.empty()) throw NumericalRefusal("matrix_elements: dataset has no stored eigenvectors");
    const long dim = static_cast<long>(dataset.n1) * dataset.n2;
    Eigen::VectorXd samples(dim);
    for (long i = 0; i < dim; ++i)
        samples(i) = a(static_cast<double>(i % dataset.n1) / dataset.n1, static_cast<double>(i / dataset.n1) / dataset.n2);
    std::vector<double> out;
    out.reserve(dataset.entries.size());
    for (const auto& e : dataset.entries) {
        if (e.vector < 0) throw NumericalRefusal("matrix_elements: entry without eigenvector");
        const CVector& u = dataset.vectors.at(static_cast<std::size_t>(e.vector));
        out.push_back(samples.dot(u.cwiseAbs2()));
    }
    return out;
}

std::string to_string(ClusterMode mode) {
    switch (mode) {
        case ClusterMode::Average: return "average";
        case ClusterMode::Adapted: return "adapted";
        case ClusterMode::PerVector: return "per_vector";
    }
    return "average";
}

ClusterMode cluster_mode_from_string(const std::string& s) {
    if (s == "average") return ClusterMode::Average;
    if (s == "adapted") return ClusterMode::Adapted;
    if (s == "per_vector") return ClusterMode::PerVector;
    throw std::invalid_argument("unknown cluster mode '" + s + "'");
}

std::vector<std::vector<std::size_t>> degenerate_clusters(const SpectralDataset& dataset, double relative_tolerance) {
    std::vector<std::vector<std::size_t>> clusters;
    std::map<std::pair<int, int>, std::size_t> labeled;  // (m, n) -> cluster
    std::map<int, std::size_t> open;                      // m -> last unlabeled cluster
    for (std::size_t i = 0; i < dataset.entries.size(); ++i) {
        const auto& e = dataset.entries[i];
        if (e.level) {
            const auto key = std::make_pair(e.m, *e.level);
            auto it = labeled.find(key);
            if (it == labeled.end()) {
                labeled.emplace(key, clusters.size());
                clusters.push_back({i});
            } else {
                clusters[it->second].push_back(i);
            }
            continue;
        }
        auto it = open.find(e.m);
        if (it != open.end()) {
            const double first = dataset.entries[clusters[it->second].front()].delta;
            if (e.delta - first <= relative_tolerance * std::max(std::abs(first), 1.0)) {
                clusters[it->second].push_back(i);
                continue;
            }
        }
        open[e.m] = clusters.size();
        clusters.push_back({i});
    }
    return clusters;
}

std::vector<double> cluster_matrix_elements(const SpectralDataset& dataset, const Observable2D& a, ClusterMode mode) {
    std::vector<double> diag = matrix_elements(dataset, a);
    if (mode == ClusterMode::PerVector) return diag;
    const auto clusters = degenerate_clusters(dataset);
    std::vector<double> out(diag.size());
    const long dim = static_cast<long>(dataset.n1) * dataset.n2;
    Eigen::VectorXd samples(dim);
    for (long i = 0; i < dim; ++i)
        samples(i) = a(static_cast<double>(i % dataset.n1) / dataset.n1, static_cast<double>(i / dataset.n1) / dataset.n2);
    for (const auto& cluster : clusters) {
        if (mode == ClusterMode::Average || cluster.size() == 1) {
            double mean = 0.0;
            for (std::size_t i : cluster) mean += diag[i];
            mean /= static_cast<double>(cluster.size());
            for (std::size_t i : cluster) out[i] = mode == ClusterMode::Average ? mean : diag[i];
            continue;
        }
        CMatrix U(dim, static_cast<long>(cluster.size()));
        for (std::size_t c = 0; c < cluster.size(); ++c)
            U.col(static_cast<long>(c)) =
                dataset.vectors.at(static_cast<std::size_t>(dataset.entries[cluster[c]].vector));
        CMatrix C = U.adjoint() * samples.cast<cd>().asDiagonal() * U;
        C = 0.5 * (C + C.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(C, Eigen::EigenvaluesOnly);
        for (std::size_t c = 0; c < cluster.size(); ++c) out[cluster[c]] = es.eigenvalues()(static_cast<long>(c));
    }
    return out;
}

double observable_mean(const ContactModel3D& model, const Observable2D& a, int n) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x1 = (i + 0.5) / n, x2 = (j + 0.5) / n;
            const double rho = model.volume_density(x1, x2);
            num += a(x1, x2) * rho;
            den += rho;
        }
    return num / den;
}

ExtractionResult density_one_extract(const std::vector<double>& sequence, double cesaro_limit) {
    ExtractionResult r;
    const std::size_t n = sequence.size();
    if (n == 0) return r;
    std::vector<double> cesaro(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (sequence[k] < 0.0) throw std::invalid_argument("density_one_extract needs a nonnegative sequence");
        sum += sequence[k];
        cesaro[k] = sum / static_cast<double>(k + 1);
    }
    std::vector<double> threshold(n);
    double sup = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        sup = std::max(sup, cesaro[k]);
        threshold[k] = std::sqrt(sup);
    }
    long kept = 0;
    std::size_t next_checkpoint = 10;
    for (std::size_t k = 0; k < n; ++k) {
        if (sequence[k] <= threshold[k]) {
            r.indices.push_back(static_cast<long>(k));
            ++kept;
        }
        const std::size_t len = k + 1;
        if (len == next_checkpoint || len == n) {
            r.checkpoints.push_back(static_cast<long>(len));
            r.prefix_density.push_back(static_cast<double>(kept) / static_cast<double>(len));
            r.cesaro.push_back(cesaro[k]);
            if (len == next_checkpoint) next_checkpoint *= 10;
        }
    }
    r.final_cesaro = cesaro.back();
    r.inconclusive = r.final_cesaro > cesaro_limit;
    return r;
}

double quantum_variance(const SpectralDataset& dataset, const std::vector<double>& elements, double mean,
                        double delta) {
    if (elements.size() != dataset.entries.size()) throw std::invalid_argument("one matrix element per entry");
    double sum = 0.0;
    long count = 0;
    for (std::size_t k = 0; k < dataset.entries.size(); ++k) {
        if (dataset.entries[k].delta > delta) break;
        const double dev = elements[k] - mean;
        sum += dev * dev;
        ++count;
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

VarianceReport variance_report(const SpectralDataset& dataset, const ContactModel3D& model, const Observable2D& a,
                               const std::string& observable_id, const std::vector<double>& deltas, ClusterMode mode) {
    VarianceReport rep;
    rep.observable = observable_id;
    rep.mode = mode;
    rep.mean = observable_mean(model, a);
    const std::vector<double> elements = cluster_matrix_elements(dataset, a, mode);
    for (double e : elements) rep.deviations.push_back((e - rep.mean) * (e - rep.mean));
    for (double d : deltas) {
        rep.deltas.push_back(d);
        rep.counts.push_back(counting_function(dataset, d));
        rep.variance.push_back(quantum_variance(dataset, elements, rep.mean, d));
    }
    rep.extraction = density_one_extract(rep.deviations);
    return rep;
}

// ---------------------------------------------------------------------------

double SmoothFunction::operator()(double x) const {
    double v = 0.0;
    fill(x, 0, &v);
    return v;
}

SmoothFunction bump_function(double center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
    SmoothFunction f;
    std::ostringstream name;
    name << "bump(" << center << "," << radius << ")";
    f.name = name.str();
    f.support_lo = center - radius;
    f.support_hi = center + radius;
    f.max_order = 8;
    f.fill = [center, radius](double x, int order, double* out) {
        using namespace boost::math::differentiation;
        const double t0 = (x - center) / radius;
        if (std::abs(t0) >= 1.0) {
            std::fill(out, out + order + 1, 0.0);
            return;
        }
        const auto t = (make_fvar<double, 8>(x) - center) / radius;
        const auto v = exp(-1.0 / (1.0 - t * t));
        for (int k = 0; k <= order; ++k) out[k] = v.derivative(static_cast<std::size_t>(k));
    };
    return f;
}

SmoothFunction zero_function(double lo, double hi) {
    SmoothFunction f;
    f.name = "zero";
    f.support_lo = lo;
    f.support_hi = hi;
    f.fill = [](double, int order, double* out) { std::fill(out, out + order + 1, 0.0); };
    return f;
}

double almost_analytic_cutoff(double y, double* derivative) {
    using namespace boost::math::differentiation;
    const double a = std::abs(y);
    if (a <= 0.5 || a >= 1.0) {
        if (derivative) *derivative = 0.0;
        return a <= 0.5 ? 1.0 : 0.0;
    }
    const auto s = (make_fvar<double, 1>(a) - 0.5) * 2.0;
    const auto g1 = exp(-1.0 / (1.0 - s));
    const auto g0 = exp(-1.0 / s);
    const auto chi = g1 / (g1 + g0);
    if (derivative) *derivative = (y < 0 ? -1.0 : 1.0) * chi.derivative(1);
    return chi.derivative(0);
}

HSResult hs_functional_calculus(const Eigen::MatrixXd& T, const SmoothFunction& f, int aa_order,
                                const HSQuadrature& quad, int workers) {
    const long n = T.rows();
    if (T.cols() != n) throw std::invalid_argument("hs_functional_calculus needs a square matrix");
    if ((T - T.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, T.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("hs_functional_calculus needs a symmetric matrix");
    if (aa_order < 0 || aa_order + 1 > f.max_order)
        throw std::invalid_argument("aa_order exceeds the derivatives the test function provides");
    HSResult result;
    if (n == 0) return result;

    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(T);
    const Eigen::MatrixXd Q = tri.matrixQ();
    const Eigen::VectorXd diag = tri.diagonal();
    const Eigen::VectorXd sub = tri.subDiagonal();

    // Band b < bands covers [2^{-b-2}, 2^{-b-1}]; band `bands` is [1/2, 1].
    const int band_count = quad.bands + 1;
    std::vector<CMatrix> partial(static_cast<std::size_t>(band_count), CMatrix::Zero(n, n));
    std::vector<long> evaluations(static_cast<std::size_t>(band_count), 0);
    std::vector<double> top_derivative_l1(static_cast<std::size_t>(band_count), 0.0);
    const double length = f.support_hi - f.support_lo;
    const int K = aa_order;
    double factorial = 1.0;
    for (int k = 2; k <= K; ++k) factorial *= k;

    parallel_for(static_cast<std::size_t>(band_count), workers, [&](std::size_t band) {
        const bool top = static_cast<int>(band) == quad.bands;
        const double y_lo = top ? 0.5 : std::ldexp(1.0, -static_cast<int>(band) - 2);
        const double y_hi = top ? 1.0 : 2.0 * y_lo;
        std::vector<double> gx, gw;
        gauss_legendre(top ? quad.top_nodes : quad.gauss_nodes, gx, gw);
        const double target = std::min(quad.x_step_ratio * y_lo, length / quad.min_x_steps);
        const long steps = std::max<long>(2, static_cast<long>(std::ceil(length / target)));
        const double hx = length / steps;

        std::vector<double> derivs(static_cast<std::size_t>(K) + 2);
        CMatrix& acc = partial[band];
        std::vector<cd> pivots(static_cast<std::size_t>(n)), lower(static_cast<std::size_t>(n));
        CVector column(n);
        double l1 = 0.0;
        for (long s = 0; s <= steps; ++s) {
            const double x = f.support_lo + s * hx;
            const double wx = (s == 0 || s == steps) ? 0.5 * hx : hx;
            f.fill(x, K + 1, derivs.data());
            l1 += wx * std::abs(derivs[static_cast<std::size_t>(K) + 1]);
            bool all_zero = true;
            for (double d : derivs) all_zero = all_zero && d == 0.0;
            if (all_zero) continue;
            for (std::size_t q = 0; q < gx.size(); ++q) {
                const double y = 0.5 * (y_lo + y_hi) + 0.5 * (y_hi - y_lo) * gx[q];
                const double wy = 0.5 * (y_hi - y_lo) * gw[q];
                double chi_prime = 0.0;
                const double chi = almost_analytic_cutoff(y, &chi_prime);
                // dbar f~ = (1/2) f^{(K+1)} (iy)^K / K! chi + (i/2) chi' sum_k f^{(k)} (iy)^k / k!
                cd iy_pow = 1.0, taylor = 0.0;
                double kfact = 1.0;
                for (int k = 0; k <= K; ++k) {
                    if (k > 0) kfact *= k;
                    taylor += derivs[static_cast<std::size_t>(k)] * iy_pow / kfact;
                    if (k < K) iy_pow *= cd(0.0, y);
                }
                const cd dbar = 0.5 * derivs[static_cast<std::size_t>(K) + 1] * iy_pow / factorial * chi +
                                0.5 * kI * chi_prime * taylor;
                const cd weight = wx * wy * dbar;
                if (weight == cd(0.0)) continue;
                const cd z(x, y);
                // Pivot-free LU of J - z: Im(pivot) <= -y keeps every pivot away from zero.
                pivots[0] = diag(0) - z;
                for (long i = 1; i < n; ++i) {
                    lower[static_cast<std::size_t>(i)] = sub(i - 1) / pivots[static_cast<std::size_t>(i - 1)];
                    pivots[static_cast<std::size_t>(i)] = diag(i) - z - lower[static_cast<std::size_t>(i)] * sub(i - 1);
                }
                for (long j = 0; j < n; ++j) {
                    column.setZero();
                    column(j) = 1.0;
                    for (long i = j + 1; i < n; ++i) column(i) = -lower[static_cast<std::size_t>(i)] * column(i - 1);
                    column(n - 1) /= pivots[static_cast<std::size_t>(n - 1)];
                    for (long i = n - 2; i >= 0; --i)
                        column(i) = (column(i) - sub(i) * column(i + 1)) / pivots[static_cast<std::size_t>(i)];
                    acc.col(j) += weight * column;
                }
                ++evaluations[band];
            }
        }
        top_derivative_l1[band] = l1;
    });

    CMatrix total = CMatrix::Zero(n, n);
    for (int b = 0; b < band_count; ++b) {
        total += partial[static_cast<std::size_t>(b)];
        result.evaluations += evaluations[static_cast<std::size_t>(b)];
    }
    result.value = (2.0 / kPi) * (Q * total.real() * Q.transpose());
    const double y_min = std::ldexp(1.0, -quad.bands - 1);
    const double l1 = quad.bands > 0 ? top_derivative_l1[static_cast<std::size_t>(quad.bands - 1)]
                                     : top_derivative_l1.back();
    result.strip_bound = K == 0 ? std::numeric_limits<double>::infinity()
                                : l1 * std::pow(y_min, K) / (kPi * K * factorial);
    return result;
}

// ---------------------------------------------------------------------------

Observable2D cutoff_x1(double lo, double hi) {
    const double center = 0.5 * (lo + hi), radius = 0.5 * (hi - lo);
    return [center, radius](double x1, double) {
        const double t = (x1 - center) / radius;
        if (std::abs(t) >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - t * t));
    };
}

DecayCurve disjoint_support_decay(const ModeOperator& op, const Observable2D& psi1, const Observable2D& psi2, cd z,
                                  const std::vector<double>& hbars, int workers, int iterations) {
    if (std::abs(z.imag()) < 1e-3) throw NumericalRefusal("disjoint_support_decay: |Im z| below 1e-3");
    const long dim = op.dim();
    Eigen::VectorXd c1(dim), c2(dim);
    for (long i = 0; i < dim; ++i) {
        const Eigen::Vector2d p = op.node(i);
        c1(i) = psi1(p(0), p(1));
        c2(i) = psi2(p(0), p(1));
    }
    DecayCurve curve;
    curve.hbar = hbars;
    curve.norm.assign(hbars.size(), 0.0);
    curve.resolvent.assign(hbars.size(), 0.0);
    parallel_for(hbars.size(), workers, [&](std::size_t idx) {
        const double hbar = hbars[idx];
        SpCMatrix shifted = (hbar * hbar) * op.matrix;
        SpCMatrix shifted_adj = shifted;
        for (long i = 0; i < dim; ++i) {
            shifted.coeffRef(i, i) -= z;
            shifted_adj.coeffRef(i, i) -= std::conj(z);
        }
        Eigen::SparseLU<SpCMatrix> lu(shifted), lu_adj(shifted_adj);
        if (lu.info() != Eigen::Success || lu_adj.info() != Eigen::Success)
            throw NumericalRefusal("disjoint_support_decay: resolvent factorization failed");
        auto power_norm = [&](const Eigen::VectorXd& left, const Eigen::VectorXd& right) {
            CVector v(dim);
            for (long i = 0; i < dim; ++i) v(i) = cd(1.0 + 0.5 * std::sin(0.37 * i), 0.25 * std::cos(0.11 * i));
            v.normalize();
            double estimate = 0.0;
            for (int it = 0; it < iterations; ++it) {
                const CVector forward = left.cast<cd>().asDiagonal() * CVector(lu.solve(CVector(right.cast<cd>().asDiagonal() * v)));
                const double value = forward.norm();
                const CVector back = right.cast<cd>().asDiagonal() * CVector(lu_adj.solve(CVector(left.cast<cd>().asDiagonal() * forward)));
                const double bn = back.norm();
                if (bn == 0.0) return 0.0;
                v = back / bn;
                const bool settled = std::abs(value - estimate) <= 1e-10 * value;
                estimate = value;
                if (settled) break;
            }
            return estimate;
        };
        curve.norm[idx] = power_norm(c1, c2);
        curve.resolvent[idx] = power_norm(Eigen::VectorXd::Ones(dim), Eigen::VectorXd::Ones(dim));
    });
    if (hbars.size() >= 2) curve.slope = loglog_slope(curve.hbar, curve.norm);
    return curve;
}

}  // namespace sublab
