#include "doctest.h"

#include "sublab/landau.hpp"

#include <cmath>
#include <random>

using namespace sublab;

namespace {

long count_multi_indices(int n, int d) {
    if (d == 1) return 1;
    long total = 0;
    for (int k = 0; k <= n; ++k) total += count_multi_indices(n - k, d - 1);
    return total;
}

CMatrix random_matrix(long n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal;
    CMatrix Y(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) Y(i, j) = cd(normal(rng), normal(rng));
    return Y;
}

}  // namespace

TEST_CASE("multiplicity matches a count of multi-indices") {
    for (int d = 1; d <= 4; ++d)
        for (int n = 0; n <= 8; ++n) CHECK(landau_multiplicity(n, d) == count_multi_indices(n, d));
}

TEST_CASE("safe-band spectrum appears in the dense spectrum of the truncated symbol") {
    for (int d : {1, 2})
        for (double lambda : {-0.5, 2.0}) {
            const auto H = oscillator_symbol(lambda, d, 12);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(H.dense(), Eigen::EigenvaluesOnly);
            for (const auto& e : oscillator_spectrum(H)) {
                const double nearest = (dense.eigenvalues().array() - e.value).abs().minCoeff();
                CHECK(nearest < 1e-9);
                const double level = (e.value / std::abs(lambda) - d) / 2.0;
                CHECK(std::abs(level - std::round(level)) < 1e-9);
            }
        }
}

TEST_CASE("Landau projector is an orthogonal projector of the right rank") {
    const auto H = oscillator_symbol(1.0, 2, 12);
    const auto P = landau_projector(H, 2);
    const Eigen::MatrixXd Pd(P.matrix);
    CHECK((Pd * Pd - Pd).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Pd.trace() == doctest::Approx(3.0));
    CHECK_THROWS(landau_projector(oscillator_symbol(1.0, 1, 8), 4));
}

TEST_CASE("direct Sylvester solve agrees with the vectorized dense solve") {
    const auto H = oscillator_symbol(1.0, 1, 16);
    const CMatrix Y = random_matrix(16, 3);
    const auto direct = sylvester_solve(H, 1, Y, SylvesterMethod::Direct, ContourSpec());
    CHECK(direct.residual < 1e-10);
    const CMatrix Hd = H.dense().cast<cd>();
    const auto split = spectral_split(Hd, 3.0, 0.5, safe_band_mask(1, 16));
    CHECK((sylvester_dense_reference(Hd, split.projector, Y) - direct.X).norm() < 1e-9);
    const auto contour = sylvester_solve(H, 1, Y, SylvesterMethod::Contour, ContourSpec::around_level(1.0, 1, 1, 64));
    CHECK((contour.X - direct.X).norm() < 1e-8 * direct.X.norm());
}

TEST_CASE("Sylvester solve refuses a gap below the floor") {
    const CMatrix H = Eigen::Vector3d(1.0, 1.0 + 1e-9, 5.0).cast<cd>().asDiagonal();
    const auto split = spectral_split(H, 1.0, 1e-12, std::vector<bool>(3, true));
    CHECK_THROWS_AS(sylvester_solve(H, split, random_matrix(3, 1), SylvesterMethod::Direct, ContourSpec(), 1e-3),
                    NumericalRefusal);
}

TEST_CASE("commutator differences of the generators") {
    const auto rep = schrodinger_generators(1.5, 1, 12);
    const CMatrix Y = rep.axis_Y(), X = rep.axis_X();
    const CMatrix dy = difference_commutator(rep, Y, Coordinate::Y, 0);
    const CMatrix dx = difference_commutator(rep, Y, Coordinate::X, 0);
    CHECK(dx.cwiseAbs().maxCoeff() < 1e-14);
    CHECK((dy.topLeftCorner(11, 11) + CMatrix::Identity(11, 11)).cwiseAbs().maxCoeff() < 1e-12);
    const CMatrix dxx = difference_commutator(rep, X, Coordinate::X, 0);
    CHECK((dxx.topLeftCorner(11, 11) + CMatrix::Identity(11, 11)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Williamson normal form") {
    Eigen::Matrix2d G;
    G << 2.0, 0.5, 0.5, 1.0;
    const auto w = williamson(G);
    Eigen::Matrix2d J;
    J << 0.0, 1.0, -1.0, 0.0;
    CHECK((w.S.transpose() * J * w.S - J).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd D = w.S.transpose() * G * w.S;
    CHECK(D(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(D(0, 0) == doctest::Approx(std::sqrt(G.determinant())));
    CHECK(D(1, 1) == doctest::Approx(std::sqrt(G.determinant())));
}

TEST_CASE("parity compression separates odd and even words") {
    const auto H = oscillator_symbol(1.0, 1, 16);
    const auto rep = schrodinger_generators(1.0, 1, 16);
    const CMatrix X = rep.axis_X(), Y = rep.axis_Y();
    for (int n = 0; n < 4; ++n) {
        const auto P = landau_projector(H, n);
        CHECK(parity_compression(P, X) < 1e-13);
        CHECK(parity_compression(P, X * Y * Y) < 1e-13);
        CHECK(parity_compression(P, X * X) > 0.1);
    }
}

TEST_CASE("corrector compatibility on the perturbed metric symbol") {
    Eigen::Matrix2d P1, P2;
    P1 << 0.3, 0.1, 0.1, -0.2;
    P2 << 0.05, 0.2, 0.2, 0.15;
    auto metric = [&](const GroupElement& g) {
        return Eigen::MatrixXd(Eigen::Matrix2d::Identity() + g.x(0) * P1 + g.y(0) * P2);
    };
    const auto node = GroupElement::h1(0.2, -0.1, 0.0);
    const auto H0 = metric_symbol(metric);
    SymbolField H1;
    H1.order = 1;
    H1.eval = [](const GroupElement&, const TruncatedRep& r) {
        return CMatrix(kI * (0.7 * CMatrix(r.gen_X[0]) + 0.4 * CMatrix(r.gen_Y[0])));
    };
    const auto rep = corrector_pi1(H0, H1, 1, node, 1.0, 24);
    CHECK(rep.idempotence_residual < 1e-9);
    CHECK(rep.commutation_residual < 1e-9);
    CHECK(rep.gap > 1.0);
    CHECK_THROWS_AS(corrector_pi1(H0, H1, 1, node, 1.0, 24, 1e-30), NumericalRefusal);
}

TEST_CASE("functional calculus by eigendecomposition") {
    Eigen::MatrixXd T(3, 3);
    T << 2.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 1.0;
    const auto sq = functional_of_matrix(T, [](double x) { return x * x; });
    CHECK((sq - T * T).cwiseAbs().maxCoeff() < 1e-12);
}

namespace {

cd unit_gaussian(const GroupElement& g) {
    return cd(std::exp(-0.5 * (g.x.squaredNorm() + g.y.squaredNorm()) - 0.5 * g.z * g.z), 0.0);
}

}  // namespace

TEST_CASE("commutator differences equal the transform of the coordinate-weighted kernel") {
    const std::vector<double> half{7.5, 7.5, 7.5}, spacing{0.3, 0.3, 0.3};
    const auto k = sample_kernel_box(1, half, spacing, unit_gaussian);
    const auto kx = sample_kernel_box(1, half, spacing, [](const GroupElement& g) { return g.x(0) * unit_gaussian(g); });
    const auto ky = sample_kernel_box(1, half, spacing, [](const GroupElement& g) { return g.y(0) * unit_gaussian(g); });
    const int N = 48, block = N / 2;
    for (double lambda : {1.0, -0.7}) {
        const auto rep = schrodinger_generators(lambda, 1, N);
        const CMatrix sigma = group_fourier(k, lambda, N).value;
        const CMatrix dx = group_fourier(kx, lambda, N).value;
        const CMatrix dy = group_fourier(ky, lambda, N).value;
        const CMatrix cx = difference_commutator(rep, sigma, Coordinate::X, 0);
        const CMatrix cy = difference_commutator(rep, sigma, Coordinate::Y, 0);
        CHECK((cx - dx).topLeftCorner(block, block).norm() < 1e-5 * dx.topLeftCorner(block, block).norm());
        CHECK((cy - dy).topLeftCorner(block, block).norm() < 1e-5 * dy.topLeftCorner(block, block).norm());
    }
}

TEST_CASE("kernel-route reconstruction converges slowly in the truncation") {
    const auto k = sample_kernel_box(1, {7.5, 7.5, 7.5}, {0.3, 0.3, 0.3}, unit_gaussian);
    double previous = 1e300;
    for (int N : {16, 32}) {
        TransformContext context;
        context.grid = k;
        context.lambdas = LambdaGrid::log_gauss(0.25, 4.5, 16);
        context.N = N;
        std::vector<CMatrix> sigma;
        for (double lambda : context.lambdas.nodes) sigma.push_back(group_fourier(k, lambda, N).value);
        const auto rec = inverse_fourier(sigma, context);
        double error = 0.0;
        for (std::size_t p = 0; p < rec.size(); ++p) {
            const auto g = rec.point(p);
            if (std::hypot(g.x(0), g.y(0)) <= 3.0 && std::abs(g.z) <= 3.0)
                error = std::max(error, std::abs(rec.values[p] - k.values[p]));
        }
        CHECK(error < previous);
        previous = error;
    }
    CHECK(previous < 0.05);
}
