#include "doctest.h"

#include "sublab/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace sublab;

namespace {

// Spectrum of the 5-point periodic Laplacian on an n x n grid of the unit box.
std::vector<double> lattice_laplacian_spectrum(int n) {
    std::vector<double> v;
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            const double s1 = std::sin(kPi * p / n), s2 = std::sin(kPi * q / n);
            v.push_back(4.0 * n * n * (s1 * s1 + s2 * s2));
        }
    std::sort(v.begin(), v.end());
    return v;
}

SpCMatrix random_hermitian(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Eigen::Triplet<cd>> t;
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, cd(4.0 + normal(rng), 0.0));
        for (int off : {1, 7}) {
            const int j = (i + off) % n;
            const cd v(normal(rng), normal(rng));
            t.emplace_back(i, j, v);
            t.emplace_back(j, i, std::conj(v));
        }
    }
    SpCMatrix M(n, n);
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

}  // namespace

TEST_CASE("block Krylov eigensolver matches a dense solve") {
    const auto M = random_hermitian(300, 5);
    EigenOptions opt;
    opt.k = 12;
    opt.shift = -20.0;
    const auto r = lowest_eigenpairs(M, opt);
    REQUIRE(r.converged);
    Eigen::SelfAdjointEigenSolver<CMatrix> dense{CMatrix(M)};
    CHECK((dense.eigenvalues().head(12) - r.values).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((r.vectors.adjoint() * r.vectors - CMatrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THROWS_AS(
        [&] {
            EigenOptions bad = opt;
            bad.shift = 100.0;
            lowest_eigenpairs(M, bad);
        }(),
        NumericalRefusal);
}

TEST_CASE("mode 0 of the flat torus is the lattice Laplacian") {
    const auto model = constant_field_model(1, 1.0);
    const auto op = magnetic_mode_operator(model, 0, 16, 16);
    CHECK(op.hermiticity_defect() == 0.0);
    const auto s = mode_spectrum(op, 12, 1, false);
    const auto oracle = lattice_laplacian_spectrum(16);
    for (int i = 0; i < 12; ++i) CHECK(s.values(i) == doctest::Approx(oracle[i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("magnetic modes: Landau levels, conjugate symmetry, dense agreement") {
    const auto model = constant_field_model(1, 1.0);
    const auto op = magnetic_mode_operator(model, 2, 24, 24);
    const auto s = mode_spectrum(op, 8, 1, false);
    // Level n of mode m sits near 2 pi |m| b (2n + 1) with multiplicity |m| * flux.
    for (int i = 0; i < 6; ++i) {
        const double level = 2.0 * kPi * 2.0 * (2 * (i / 2) + 1);
        CHECK(std::abs(s.values(i) / level - 1.0) < 0.03);
    }
    const auto neg = mode_spectrum(magnetic_mode_operator(model, -2, 24, 24), 8, 1, false);
    CHECK((neg.values - s.values).cwiseAbs().maxCoeff() < 1e-8 * s.values.maxCoeff());

    const auto small = magnetic_mode_operator(sine_field_model(1, 0.3, 0.2), 1, 12, 12);
    Eigen::SelfAdjointEigenSolver<CMatrix> dense{CMatrix(small.matrix)};
    const auto ks = mode_spectrum(small, 10, 1, false);
    CHECK((dense.eigenvalues().head(10) - ks.values).cwiseAbs().maxCoeff() < 1e-9 * dense.eigenvalues()(9));
}

TEST_CASE("nilmanifold sectors carry Landau levels of multiplicity |k|") {
    NilmanifoldModel nil;
    nil.n = 32;
    const auto s = mode_spectrum(nilmanifold_sector_operator(nil, 2), 6, 1, false);
    const double unit = 2.0 * kPi * 2.0;
    CHECK(std::abs(s.values(0) / unit - 1.0) < 0.03);
    CHECK(std::abs(s.values(1) / unit - 1.0) < 0.03);
    CHECK(std::abs(s.values(2) / unit - 3.0) < 0.1);
    CHECK(nilmanifold_commutator_defect(nil, 1) < 0.5);
}

TEST_CASE("assembled datasets: completeness, labels, worker independence, CSV round trip") {
    const auto model = constant_field_model(1, 1.0);
    AssemblyOptions opt;
    opt.n1 = opt.n2 = 24;
    opt.delta_max = 2.0 * kPi * 6.0;
    auto one = assemble_full_spectrum(model, opt);
    opt.workers = 3;
    auto three = assemble_full_spectrum(model, opt);
    CHECK(one.complete);
    CHECK(one.to_csv() == three.to_csv());
    for (std::size_t i = 1; i < one.entries.size(); ++i) CHECK(one.entries[i - 1].delta <= one.entries[i].delta);

    landau_label(one, model);
    long labeled = 0;
    for (const auto& e : one.entries)
        if (e.level) {
            ++labeled;
            CHECK(e.label_residual <= kLabelTolerance);
            CHECK(*e.lambda_est == doctest::Approx(2.0 * kPi * std::abs(e.m)));
        }
    CHECK(labeled > 0);
    const auto text = one.to_csv();
    CHECK(SpectralDataset::from_csv(text).to_csv() == text);

    opt.mode_limit = 1;
    const auto cut = assemble_full_spectrum(model, opt);
    CHECK_FALSE(cut.complete);
    CHECK_FALSE(cut.incomplete_reason.empty());
}

TEST_CASE("requests beyond the safe band are refused") {
    const auto op = magnetic_mode_operator(constant_field_model(1, 1.0), 1, 8, 8);
    CHECK_THROWS_AS(mode_spectrum_below(op, 1e6, 4, 1, false), NumericalRefusal);
}

TEST_CASE("eigenvector sidecar round trip") {
    const auto model = constant_field_model(1, 1.0);
    AssemblyOptions opt;
    opt.n1 = opt.n2 = 12;
    opt.delta_max = 2.0 * kPi * 2.0;
    opt.want_vectors = true;
    const auto ds = assemble_full_spectrum(model, opt);
    REQUIRE(!ds.vectors.empty());
    const std::string path = "test_models_vectors.bin";
    ds.save_vectors(path);
    auto copy = SpectralDataset::from_csv(ds.to_csv());
    copy.load_vectors(path);
    REQUIRE(copy.vectors.size() == ds.vectors.size());
    for (std::size_t i = 0; i < ds.vectors.size(); ++i) CHECK((copy.vectors[i] - ds.vectors[i]).norm() == 0.0);
}
