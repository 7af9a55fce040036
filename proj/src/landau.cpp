#include "sublab/landau.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sublab {

namespace {

double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

long ipow(int base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

CMatrix dense(const SpCMatrix& s) { return CMatrix(s); }

double safe_fraction_outside(const CVector& v, const std::vector<bool>& mask) {
    double in = 0.0, out = 0.0;
    for (Eigen::Index p = 0; p < v.size(); ++p) (mask[p] ? in : out) += std::norm(v(p));
    return in + out > 0.0 ? out / (in + out) : 0.0;
}

// All multi-indices of length d with entries in [0, limit) and |alpha| = total.
void compositions(int d, int total, int limit, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == d - 1) {
        if (total < limit) {
            cur.push_back(total);
            out.push_back(cur);
            cur.pop_back();
        }
        return;
    }
    for (int a = std::min(total, limit - 1); a >= 0; --a) {
        cur.push_back(a);
        compositions(d, total - a, limit, cur, out);
        cur.pop_back();
    }
}

}  // namespace

// ---------------------------------------------------------------------------

OscillatorSymbol oscillator_symbol(double lambda, int d, int N) {
    const TruncatedRep rep = schrodinger_generators(lambda, d, N);
    OscillatorSymbol H;
    H.lambda = lambda;
    H.d = d;
    H.N = N;
    SpCMatrix acc(rep.dim(), rep.dim());
    for (int i = 0; i < d; ++i) {
        acc -= rep.gen_X[i] * rep.gen_X[i];
        acc -= rep.gen_Y[i] * rep.gen_Y[i];
    }
    acc.prune(cd(0.0, 0.0), 0.0);
    H.matrix = acc.real();
    if (acc.imag().norm() > 1e-12 * std::max(1.0, H.matrix.norm()))
        throw std::logic_error("oscillator symbol is not real");
    const CMatrix X1 = rep.axis_X(), Y1 = rep.axis_Y();
    H.axis_matrix = (-(X1 * X1 + Y1 * Y1)).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.axis_matrix);
    H.axis_values = es.eigenvalues();
    H.axis_vectors = es.eigenvectors();
    H.axis_safe.resize(N);
    const auto mask = safe_band_mask(1, N);
    for (int k = 0; k < N; ++k)
        H.axis_safe[k] = safe_fraction_outside(H.axis_vectors.col(k).cast<cd>(), mask) < 1e-10;
    return H;
}

long landau_multiplicity(int n, int d) {
    if (n < 0 || d < 1) throw std::invalid_argument("landau_multiplicity needs n >= 0, d >= 1");
    long r = 1;
    for (int k = 1; k <= n; ++k) r = r * (d - 1 + k) / k;
    return r;
}

std::vector<OscillatorEigen> oscillator_spectrum(const OscillatorSymbol& H) {
    std::vector<int> safe;
    for (int k = 0; k < H.N; ++k)
        if (H.axis_safe[k]) safe.push_back(k);
    const long S = static_cast<long>(safe.size());
    std::vector<OscillatorEigen> out;
    if (S == 0) return out;
    const long total = ipow(static_cast<int>(S), H.d);
    out.reserve(total);
    for (long p = 0; p < total; ++p) {
        OscillatorEigen e;
        long rem = p;
        for (int i = H.d - 1; i >= 0; --i) {
            e.axis_index.insert(e.axis_index.begin(), safe[rem % S]);
            rem /= S;
        }
        for (int k : e.axis_index) e.value += H.axis_values(k);
        out.push_back(std::move(e));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const OscillatorEigen& a, const OscillatorEigen& b) { return a.value < b.value; });
    return out;
}

LandauProjector landau_projector(const OscillatorSymbol& H, int n) {
    if (n < 0) throw std::invalid_argument("Landau index must be nonnegative");
    if (2 * n >= H.N)
        throw std::invalid_argument("Landau level " + std::to_string(n) + " lies outside the safe band for N=" +
                                    std::to_string(H.N));
    const double a = std::abs(H.lambda);
    // Axis eigenvector carrying the one-axis level k.
    std::vector<int> axis_of_level(n + 1, -1);
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j < H.N; ++j) {
            if (H.axis_safe[j] && std::abs(H.axis_values(j) - a * (2 * k + 1)) < 1e-8 * a * (2 * k + 1)) {
                axis_of_level[k] = j;
                break;
            }
        }
        if (axis_of_level[k] < 0) throw NumericalRefusal("axis level " + std::to_string(k) + " not resolved");
    }
    std::vector<std::vector<int>> alphas;
    std::vector<int> cur;
    compositions(H.d, n, n + 1, cur, alphas);
    LandauProjector P;
    P.lambda = H.lambda;
    P.d = H.d;
    P.N = H.N;
    P.n = n;
    const long dim = H.dim();
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t c = 0; c < alphas.size(); ++c) {
        Eigen::VectorXd v = Eigen::VectorXd::Ones(1);
        for (int i = 0; i < H.d; ++i) {
            const Eigen::VectorXd w = H.axis_vectors.col(axis_of_level[alphas[c][i]]);
            Eigen::VectorXd next(v.size() * w.size());
            for (Eigen::Index r = 0; r < v.size(); ++r) next.segment(r * w.size(), w.size()) = v(r) * w;
            v = next;
        }
        for (long p = 0; p < dim; ++p)
            if (std::abs(v(p)) > 1e-15) trips.emplace_back(p, static_cast<int>(c), v(p));
    }
    P.basis.resize(dim, static_cast<long>(alphas.size()));
    P.basis.setFromTriplets(trips.begin(), trips.end());
    P.matrix = (P.basis * SpMatrix(P.basis.transpose())).pruned(1e-15);
    return P;
}

SpectralSplit spectral_split(const CMatrix& H, double level, double window, const std::vector<bool>& safe_mask) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    SpectralSplit s;
    s.values = es.eigenvalues();
    s.vectors = es.eigenvectors();
    s.in_level.assign(s.values.size(), false);
    s.projector = CMatrix::Zero(H.rows(), H.cols());
    for (Eigen::Index k = 0; k < s.values.size(); ++k) {
        if (std::abs(s.values(k) - level) > window) continue;
        if (!safe_mask.empty() && safe_fraction_outside(s.vectors.col(k), safe_mask) > 1e-8) continue;
        s.in_level[k] = true;
        s.projector += s.vectors.col(k) * s.vectors.col(k).adjoint();
    }
    return s;
}

// ---------------------------------------------------------------------------

ContourSpec ContourSpec::around_level(double lambda, int d, int n, int nodes) {
    ContourSpec c;
    c.center = std::abs(lambda) * (2 * n + d);
    c.radius = std::min(std::abs(lambda), 0.5 * c.center);
    c.nodes = nodes;
    return c;
}

namespace {

double split_gap(const SpectralSplit& split) {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < split.values.size(); ++i) {
        if (!split.in_level[i]) continue;
        for (Eigen::Index j = 0; j < split.values.size(); ++j)
            if (!split.in_level[j]) gap = std::min(gap, std::abs(split.values(i) - split.values(j)));
    }
    return gap;
}

double equation_residual(const CMatrix& H, const CMatrix& Pi, const CMatrix& X, const CMatrix& rhs) {
    const CMatrix Perp = CMatrix::Identity(H.rows(), H.cols()) - Pi;
    return ((H * Pi) * X - X * (H * Perp) - rhs).norm();
}

}  // namespace

SylvesterResult sylvester_solve(const CMatrix& H, const SpectralSplit& split, const CMatrix& Y,
                                SylvesterMethod method, const ContourSpec& contour, double gap_floor) {
    const Eigen::Index dim = H.rows();
    if (H.cols() != dim || Y.rows() != dim || Y.cols() != dim)
        throw std::invalid_argument("Sylvester operands must be square of equal size");
    SylvesterResult res;
    res.gap = split_gap(split);
    if (!(res.gap >= gap_floor)) {
        std::ostringstream os;
        os << "spectral gap " << res.gap << " below floor " << gap_floor;
        throw NumericalRefusal(os.str());
    }
    const CMatrix& Pi = split.projector;
    const CMatrix Perp = CMatrix::Identity(dim, dim) - Pi;
    const CMatrix rhs = Pi * Y * Perp;
    if (method == SylvesterMethod::Direct) {
        const CMatrix& V = split.vectors;
        const CMatrix Yt = V.adjoint() * rhs * V;
        CMatrix Xt = CMatrix::Zero(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (!split.in_level[i]) continue;
            for (Eigen::Index j = 0; j < dim; ++j)
                if (!split.in_level[j]) Xt(i, j) = Yt(i, j) / (split.values(i) - split.values(j));
        }
        res.X = V * Xt * V.adjoint();
    } else {
        if (contour.nodes < 4 || !(contour.radius > 0.0)) throw std::invalid_argument("contour needs radius and >= 4 nodes");
        if (contour.center - contour.radius <= 0.0) throw NumericalRefusal("contour encloses the origin");
        for (Eigen::Index k = 0; k < split.values.size(); ++k) {
            const bool inside = std::abs(split.values(k) - contour.center) < contour.radius;
            if (inside != static_cast<bool>(split.in_level[k]))
                throw NumericalRefusal("contour does not isolate the target level");
        }
        const CMatrix A = H * Pi;
        const CMatrix B = H * Perp;
        const CMatrix Id = CMatrix::Identity(dim, dim);
        res.X = CMatrix::Zero(dim, dim);
        for (int k = 0; k < contour.nodes; ++k) {
            const double theta = 2.0 * kPi * k / contour.nodes;
            const cd w = contour.radius * std::exp(kI * theta);
            const cd z = contour.center + w;
            const CMatrix left = (A - z * Id).partialPivLu().solve(rhs);
            const CMatrix right = (B - z * Id).partialPivLu().inverse();
            res.X += (w / static_cast<double>(contour.nodes)) * (left * right);
        }
    }
    res.residual = equation_residual(H, Pi, res.X, rhs);
    return res;
}

SylvesterResult sylvester_solve(const OscillatorSymbol& H, int n, const CMatrix& Y, SylvesterMethod method,
                                const ContourSpec& contour) {
    const CMatrix Hd = H.dense().cast<cd>();
    const double level = std::abs(H.lambda) * (2 * n + H.d);
    const SpectralSplit split = spectral_split(Hd, level, 0.5 * std::abs(H.lambda), safe_band_mask(H.d, H.N));
    return sylvester_solve(Hd, split, Y, method, contour, std::abs(H.lambda));
}

CMatrix sylvester_dense_reference(const CMatrix& H, const CMatrix& Pi, const CMatrix& Y) {
    const Eigen::Index n = H.rows();
    const CMatrix Id = CMatrix::Identity(n, n);
    const CMatrix Perp = Id - Pi;
    const CMatrix A = H * Pi, B = H * Perp;
    // vec(A X - X B) = (I (x) A - B^T (x) I) vec(X), column-major vec.
    CMatrix L = CMatrix::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l) {
            L.block(j * n, l * n, n, n) -= B(l, j) * Id;
            if (j == l) L.block(j * n, l * n, n, n) += A;
        }
    const CMatrix rhs = Pi * Y * Perp;
    const CVector b = Eigen::Map<const CVector>(rhs.data(), n * n);
    const CVector x = L.completeOrthogonalDecomposition().solve(b);
    return Eigen::Map<const CMatrix>(x.data(), n, n);
}

// ---------------------------------------------------------------------------

SampledKernel inverse_fourier(const std::vector<CMatrix>& sigma, const TransformContext& context) {
    const SampledKernel& grid = context.grid;
    const LambdaGrid& lg = context.lambdas;
    if (grid.d != 1) throw std::invalid_argument("kernel-route difference operators are implemented for d = 1");
    if (sigma.size() != lg.nodes.size()) throw std::invalid_argument("one symbol per lambda node is required");
    const int N = context.N;
    const std::size_t L = lg.nodes.size();
    // Total weight per node: plain quadrature plus the gap closure (linear in the samples).
    std::vector<double> weight(L);
    for (std::size_t i = 0; i < L; ++i) {
        std::vector<cd> unit(L, 0.0);
        unit[i] = 1.0;
        weight[i] = lg.weights[i] + lg.gap_integral(unit).real();
    }
    // C[i](k, delta) = sum_{m - n = delta} conj(V_mk) sigma_mn V_nk.
    std::vector<CMatrix> C(L);
    std::vector<AxisExponential> axes;
    axes.reserve(L);
    for (std::size_t i = 0; i < L; ++i) axes.emplace_back(lg.nodes[i], N);
    parallel_for(L, context.workers, [&](std::size_t i) {
        const CMatrix& V = axes[i].V();
        const CMatrix& s = sigma[i];
        if (s.rows() != N || s.cols() != N) throw std::invalid_argument("symbol size differs from context N");
        CMatrix Ci = CMatrix::Zero(N, 2 * N - 1);
        for (int k = 0; k < N; ++k)
            for (int m = 0; m < N; ++m)
                for (int n = 0; n < N; ++n) Ci(k, m - n + N - 1) += std::conj(V(m, k)) * s(m, n) * V(n, k);
        C[i] = Ci;
    });
    SampledKernel out = grid;
    const int nx = grid.counts[0], ny = grid.counts[1], nz = grid.counts[2];
    out.values.assign(static_cast<std::size_t>(nx) * ny * nz, 0.0);
    parallel_for(static_cast<std::size_t>(nx) * ny, context.workers, [&](std::size_t p) {
        const int ix = static_cast<int>(p / ny), iy = static_cast<int>(p % ny);
        const double x = grid.coordinate(0, ix), y = grid.coordinate(1, iy);
        std::vector<cd> trace(L);
        for (std::size_t i = 0; i < L; ++i) {
            const double lam = lg.nodes[i];
            const double a = std::sqrt(std::abs(lam));
            const cd w(x, sgn(lam) * y);
            const double rho = std::abs(w), phi = std::arg(w);
            std::vector<cd> ph(2 * N - 1);
            for (int dl = -(N - 1); dl <= N - 1; ++dl) ph[dl + N - 1] = std::exp(kI * (dl * phi));
            cd t = 0.0;
            for (int k = 0; k < N; ++k) {
                cd inner = 0.0;
                for (int dl = 0; dl < 2 * N - 1; ++dl) inner += ph[dl] * C[i](k, dl);
                t += std::exp(kI * (rho * a * axes[i].omega()(k))) * inner;
            }
            trace[i] = t * weight[i] * plancherel_density(lam, 1);
        }
        for (int iz = 0; iz < nz; ++iz) {
            const double z = grid.coordinate(2, iz);
            cd acc = 0.0;
            for (std::size_t i = 0; i < L; ++i) acc += trace[i] * std::exp(kI * (lg.nodes[i] * z));
            out.values[p * nz + iz] = acc;
        }
    });
    return out;
}

DifferenceResult difference_op(const std::vector<CMatrix>& sigma, Coordinate coordinate, int axis, double lambda,
                               const TransformContext& context, double decay_floor) {
    if (axis != 0) throw std::invalid_argument("kernel-route difference operators act on d = 1 (axis 0)");
    DifferenceResult res;
    res.reconstructed = inverse_fourier(sigma, context);
    for (std::size_t p = 0; p < res.reconstructed.size(); ++p) {
        const GroupElement g = res.reconstructed.point(p);
        const double q = coordinate == Coordinate::X ? g.x(0) : coordinate == Coordinate::Y ? g.y(0) : g.z;
        res.reconstructed.values[p] *= q;
    }
    res.value = group_fourier(res.reconstructed, lambda, context.N, decay_floor).value;
    return res;
}

CMatrix difference_commutator(const TruncatedRep& rep, const CMatrix& sigma, Coordinate coordinate, int axis) {
    if (axis < 0 || axis >= rep.d) throw std::invalid_argument("axis out of range");
    const cd il = kI * rep.lambda;
    if (coordinate == Coordinate::X) {
        const CMatrix Y = dense(rep.gen_Y[axis]);
        return (Y * sigma - sigma * Y) / il;
    }
    if (coordinate == Coordinate::Y) {
        const CMatrix X = dense(rep.gen_X[axis]);
        return -(X * sigma - sigma * X) / il;
    }
    throw std::invalid_argument("the central difference operator has no commutator realization");
}

Eigen::VectorXd parity_signs(int d, int N) {
    const long dim = ipow(N, d);
    Eigen::VectorXd s(dim);
    for (long p = 0; p < dim; ++p) {
        const auto alpha = multi_index(p, d, N);
        s(p) = (std::accumulate(alpha.begin(), alpha.end(), 0) % 2 == 0) ? 1.0 : -1.0;
    }
    return s;
}

double parity_compression(const LandauProjector& projector, const CMatrix& M) {
    const SpCMatrix P = projector.matrix.cast<cd>();
    return (P * M * P).norm();
}

// ---------------------------------------------------------------------------

SymbolField metric_symbol(std::function<Eigen::MatrixXd(const GroupElement&)> inverse_metric) {
    SymbolField f;
    f.order = 2;
    f.eval = [inverse_metric](const GroupElement& x, const TruncatedRep& rep) {
        const Eigen::MatrixXd G = inverse_metric(x);
        const int d = rep.d;
        if (G.rows() != 2 * d || G.cols() != 2 * d) throw std::invalid_argument("metric must be 2d x 2d");
        std::vector<CMatrix> V;
        for (int i = 0; i < d; ++i) V.push_back(dense(rep.gen_X[i]));
        for (int i = 0; i < d; ++i) V.push_back(dense(rep.gen_Y[i]));
        CMatrix H = CMatrix::Zero(rep.dim(), rep.dim());
        for (int i = 0; i < 2 * d; ++i)
            for (int j = 0; j < 2 * d; ++j)
                if (G(i, j) != 0.0) H -= G(i, j) * (V[i] * V[j]);
        return H;
    };
    return f;
}

WilliamsonForm williamson(const Eigen::MatrixXd& G) {
    const Eigen::Index n2 = G.rows();
    if (G.cols() != n2 || n2 % 2 != 0) throw std::invalid_argument("williamson needs an even square matrix");
    const Eigen::Index d = n2 / 2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.eigenvalues().minCoeff() <= 0.0) throw NumericalRefusal("metric matrix is not positive definite");
    const Eigen::MatrixXd Gmh = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                                es.eigenvectors().transpose();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n2, n2);
    J.topRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
    J.bottomLeftCorner(d, d) = -Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd K = Gmh * J * Gmh;
    Eigen::RealSchur<Eigen::MatrixXd> schur(K);
    const Eigen::MatrixXd& T = schur.matrixT();
    const Eigen::MatrixXd& U = schur.matrixU();
    struct Pair {
        double b;
        Eigen::VectorXd u1, u2;
    };
    std::vector<Pair> pairs;
    for (Eigen::Index k = 0; k + 1 < n2; k += 2) {
        double b = T(k, k + 1);
        Eigen::VectorXd u1 = U.col(k), u2 = U.col(k + 1);
        if (b < 0.0) {
            std::swap(u1, u2);
            b = -b;
        }
        pairs.push_back({b, u1, u2});
    }
    // Ascending frequency nu = 1/b; stable order keeps ties lexicographic in Schur order.
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.b > b.b; });
    Eigen::MatrixXd O(n2, n2);
    WilliamsonForm w;
    w.frequencies.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        O.col(k) = pairs[k].u1;
        O.col(d + k) = pairs[k].u2;
        w.frequencies(k) = 1.0 / pairs[k].b;
    }
    Eigen::VectorXd root(n2);
    root << w.frequencies.cwiseSqrt(), w.frequencies.cwiseSqrt();
    w.S = Gmh * O * root.asDiagonal();
    return w;
}

std::string CorrectorReport::to_json() const {
    nlohmann::ordered_json j;
    j["commutator_pi_r"] = commutator_pi_r;
    j["level_block"] = level_block;
    j["complement_block"] = complement_block;
    j["parity_t1"] = parity_t1;
    j["hermiticity_defect"] = hermiticity_defect;
    j["idempotence_residual"] = idempotence_residual;
    j["commutation_residual"] = commutation_residual;
    j["sylvester_residual"] = sylvester_residual;
    j["gap"] = gap;
    return j.dump();
}

CorrectorReport corrector_pi1(const SymbolField& H0, const SymbolField& H1, int n, const GroupElement& node,
                              double lambda, int N, double tolerance, double step) {
    const TruncatedRep rep = schrodinger_generators(lambda, node.d, N);
    const int d = node.d;
    const long dim = rep.dim();
    const CMatrix Id = CMatrix::Identity(dim, dim);
    const CMatrix H = H0.eval(node, rep);
    if ((H - H.adjoint()).norm() > 1e-10 * H.norm()) throw std::invalid_argument("H0 is not Hermitian at the node");

    // Level value |lambda| nu (2n+d) with nu read off the lowest safe eigenvalue.
    const auto mask = safe_band_mask(d, N);
    const SpectralSplit probe = spectral_split(H, 0.0, std::numeric_limits<double>::infinity(), mask);
    double lowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < probe.values.size(); ++k)
        if (probe.in_level[k]) lowest = std::min(lowest, probe.values(k));
    const double nu = lowest / (std::abs(lambda) * d);
    const double level = std::abs(lambda) * nu * (2 * n + d);
    const SpectralSplit split = spectral_split(H, level, 0.5 * std::abs(lambda) * nu, mask);
    const long rank = std::count(split.in_level.begin(), split.in_level.end(), true);
    if (rank != landau_multiplicity(n, d))
        throw NumericalRefusal("node symbol is not isotropic at level " + std::to_string(n) +
                               " (normalize the node metric first)");
    const CMatrix& Pi = split.projector;
    const CMatrix Perp = Id - Pi;

    // Horizontal derivatives of H0 and of Pi0 at the node.
    std::vector<CMatrix> dH(2 * d), dPi(2 * d);
    const CMatrix& V = split.vectors;
    for (int v = 0; v < 2 * d; ++v) {
        GroupElement shift(d);
        if (v < d) shift.x(v) = step;
        else shift.y(v - d) = step;
        const CMatrix Hp = H0.eval(group_mul(node, shift), rep);
        const CMatrix Hm = H0.eval(group_mul(node, inverse(shift)), rep);
        dH[v] = (Hp - Hm) / (2.0 * step);
        const CMatrix Ht = V.adjoint() * dH[v] * V;
        CMatrix Pt = CMatrix::Zero(dim, dim);
        for (long i = 0; i < dim; ++i) {
            if (!split.in_level[i]) continue;
            for (long k = 0; k < dim; ++k) {
                if (split.in_level[k]) continue;
                const double gap = split.values(i) - split.values(k);
                if (std::abs(gap) < 0.5 * std::abs(lambda) * nu) {
                    if (std::abs(Ht(i, k)) > 1e-12 || std::abs(Ht(k, i)) > 1e-12)
                        throw NumericalRefusal("derivative couples the level to a truncation artifact");
                    continue;
                }
                Pt(i, k) = Ht(i, k) / gap;
                Pt(k, i) = Ht(k, i) / gap;
            }
        }
        dPi[v] = V * Pt * V.adjoint();
    }
    auto delta = [&](const CMatrix& s, int v) {
        return v < d ? difference_commutator(rep, s, Coordinate::X, v)
                     : difference_commutator(rep, s, Coordinate::Y, v - d);
    };

    const CMatrix Hsub = H1.eval(node, rep);
    CMatrix R = CMatrix::Zero(dim, dim);
    CMatrix T = Hsub * Pi - Pi * Hsub;
    std::vector<CMatrix> deltaH(2 * d);
    for (int v = 0; v < 2 * d; ++v) {
        const CMatrix dP = delta(Pi, v);
        deltaH[v] = delta(H, v);
        R += dP * dPi[v];
        T += deltaH[v] * dPi[v] - dP * dH[v];
    }

    CorrectorReport rep_out;
    rep_out.pi0 = Pi;
    rep_out.commutator_pi_r = (Pi * R - R * Pi).norm();
    const CMatrix HR = H * R - R * H;
    rep_out.level_block = (Pi * HR * Pi - Pi * T * Pi).norm();
    rep_out.complement_block = (Perp * HR * Perp + Perp * T * Perp).norm();
    if (rep_out.commutator_pi_r > tolerance || rep_out.level_block > tolerance || rep_out.complement_block > tolerance) {
        std::ostringstream os;
        os << "corrector compatibility violated: [Pi,R]=" << rep_out.commutator_pi_r
           << " level=" << rep_out.level_block << " complement=" << rep_out.complement_block;
        throw NumericalRefusal(os.str());
    }

    const double gap_floor = std::abs(lambda) * nu;
    const ContourSpec unused;
    const SylvesterResult upper = sylvester_solve(H, split, -T, SylvesterMethod::Direct, unused, gap_floor);
    const SylvesterResult lower =
        sylvester_solve(H, split, T.adjoint(), SylvesterMethod::Direct, unused, gap_floor);
    rep_out.sylvester_residual = std::max(upper.residual, lower.residual);
    rep_out.gap = upper.gap;
    rep_out.pi1 = -Pi * R * Pi + Perp * R * Perp + upper.X + lower.X.adjoint();

    const CMatrix& P1 = rep_out.pi1;
    rep_out.idempotence_residual = (Pi * P1 + P1 * Pi + R - P1).norm();
    rep_out.commutation_residual = (H * P1 - P1 * H + T).norm();
    rep_out.hermiticity_defect = (P1 - P1.adjoint()).norm();

    CMatrix T1 = (H - level * Id) * P1 + Hsub * Pi;
    for (int v = 0; v < 2 * d; ++v) T1 += deltaH[v] * dPi[v];
    rep_out.parity_t1 = (Pi * T1 * Pi).norm();
    return rep_out;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd functional_of_matrix(const Eigen::MatrixXd& T, const std::function<double(double)>& f) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    Eigen::VectorXd fv(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < fv.size(); ++k) fv(k) = f(es.eigenvalues()(k));
    return es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd functional_of_symbol(const OscillatorSymbol& H, const std::function<double(double)>& f) {
    if (H.dim() > 4096) throw std::invalid_argument("functional_of_symbol is dense; dimension too large");
    return functional_of_matrix(H.dense(), f);
}

}  // namespace sublab
