#include "doctest.h"

#include "sublab/heisenberg.hpp"
#include "sublab/kernel_io.hpp"

#include <cmath>
#include <filesystem>

using namespace sublab;

namespace {

cd gaussian(const GroupElement& g) {
    return cd(std::exp(-0.5 * (g.x.squaredNorm() + g.y.squaredNorm()) - 0.5 * g.z * g.z), 0.0);
}

// L2-normalized Hermite functions by the three-term recurrence.
std::vector<double> hermite_functions(double xi, int count) {
    std::vector<double> h(count);
    h[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
    if (count > 1) h[1] = std::sqrt(2.0) * xi * h[0];
    for (int n = 2; n < count; ++n)
        h[n] = std::sqrt(2.0 / n) * xi * h[n - 1] - std::sqrt((n - 1.0) / n) * h[n - 2];
    return h;
}

}  // namespace

TEST_CASE("group law matches the explicit product") {
    const auto a = GroupElement::h1(1.0, 0.0, 0.0);
    const auto b = GroupElement::h1(0.0, 1.0, 0.0);
    const auto ab = group_mul(a, b);
    CHECK(ab.z == doctest::Approx(0.5));
    CHECK(group_mul(b, a).z == doctest::Approx(-0.5));

    const auto g = GroupElement::h1(0.3, -1.2, 0.7), h = GroupElement::h1(-0.4, 0.5, 2.0),
               k = GroupElement::h1(1.1, 0.2, -0.3);
    const auto left = group_mul(group_mul(g, h), k), right = group_mul(g, group_mul(h, k));
    CHECK(coordinate_distance(left, right) < 1e-14);
    CHECK(coordinate_distance(group_mul(g, inverse(g)), GroupElement::identity(1)) < 1e-15);
}

TEST_CASE("dilations are automorphisms and the gauge norm is homogeneous") {
    const auto g = GroupElement::h1(0.3, -1.2, 0.7), h = GroupElement::h1(-0.4, 0.5, 2.0);
    const double t = 1.7;
    CHECK(coordinate_distance(dilate(t, group_mul(g, h)), group_mul(dilate(t, g), dilate(t, h))) < 1e-14);
    CHECK(koranyi_norm(dilate(t, g)) == doctest::Approx(t * koranyi_norm(g)).epsilon(1e-14));
}

TEST_CASE("position matrix agrees with quadrature of Hermite functions") {
    const int N = 10;
    const auto Q = hermite_position_matrix(N);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(N, N);
    const double h = 1e-3;
    for (double xi = -14.0; xi <= 14.0; xi += h) {
        const auto f = hermite_functions(xi, N);
        for (int m = 0; m < N; ++m)
            for (int n = 0; n < N; ++n) oracle(m, n) += f[m] * xi * f[n] * h;
    }
    CHECK((Q - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("truncated generators satisfy the canonical commutation relation") {
    for (double lambda : {0.7, -1.3}) {
        const auto rep = schrodinger_generators(lambda, 1, 16);
        const CMatrix X = rep.axis_X(), Y = rep.axis_Y();
        const CMatrix comm = X * Y - Y * X;
        const CMatrix top = comm.topLeftCorner(15, 15);
        CHECK((top - kI * lambda * CMatrix::Identity(15, 15)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("Plancherel density") {
    CHECK(plancherel_density(2.0, 1) == doctest::Approx(2.0 / (4.0 * kPi * kPi)));
    CHECK(plancherel_density(-0.5, 2) == doctest::Approx(0.25 / std::pow(2.0 * kPi, 3)));
}

TEST_CASE("lambda quadrature integrates a Gaussian over the line") {
    double previous = 1.0;
    for (int nodes : {16, 24, 32}) {
        const auto grid = LambdaGrid::log_gauss(0.25, 7.0, nodes);
        std::vector<cd> samples;
        for (double l : grid.nodes) samples.emplace_back(std::exp(-l * l), 0.0);
        const double total = (grid.plain_integral(samples) + grid.gap_integral(samples)).real();
        const double error = std::abs(total / std::sqrt(kPi) - 1.0);
        CHECK(error < previous);
        previous = error;
    }
    CHECK(previous < 1e-6);
}

TEST_CASE("Gaussian kernel: Plancherel and inversion on a coarse grid") {
    const auto k = sample_kernel_box(1, {7.5, 7.5, 7.5}, {0.3, 0.3, 0.3}, gaussian);
    CHECK(k.l2_norm_squared() == doctest::Approx(std::pow(kPi, 1.5)).epsilon(1e-6));
    const auto grid = LambdaGrid::log_gauss(0.25, 4.5, 16);
    const auto r = plancherel_check(k, grid, 32, 2);
    CHECK(r.relative_error < 1e-3);
    // The truncated trace converges slowly near the gap, so inversion is checked for convergence in N.
    const auto coarse = fourier_inversion_at(k, GroupElement::identity(1), grid, 16, 2);
    const auto fine = fourier_inversion_at(k, GroupElement::identity(1), grid, 32, 2);
    CHECK(std::abs(fine.value - 1.0) < std::abs(coarse.value - 1.0));
    CHECK(std::abs(fine.value - 1.0) < 1e-2);
}

TEST_CASE("non-decaying kernels are refused") {
    const auto k = sample_kernel_box(1, {2.0, 2.0, 2.0}, {0.5, 0.5, 0.5},
                                     [](const GroupElement&) { return cd(1.0, 0.0); });
    CHECK_THROWS_AS(require_decay(k, 1e-6), NumericalRefusal);
    CHECK_THROWS_AS(group_fourier(k, 1.0, 8), NumericalRefusal);
}

TEST_CASE("kernel files round-trip") {
    const auto k = sample_kernel_box(1, {1.0, 1.0, 1.0}, {0.5, 0.5, 0.5}, gaussian);
    const auto dir = std::filesystem::temp_directory_path() / "sublab_kernel_io";
    std::filesystem::create_directories(dir);
    save_kernel_csv(k, (dir / "k.csv").string());
    save_kernel_binary(k, (dir / "k.bin").string());
    for (const auto& loaded : {load_kernel_csv((dir / "k.csv").string()), load_kernel_binary((dir / "k.bin").string())}) {
        REQUIRE(loaded.size() == k.size());
        CHECK(loaded.counts == k.counts);
        for (std::size_t i = 0; i < k.size(); ++i) CHECK(loaded.values[i] == k.values[i]);
    }
}

TEST_CASE("Fock-Bargmann model matches the Schrodinger model") {
    for (double lambda : {1.0, -0.7}) {
        const auto fb = fock_bargmann_check(lambda, 1, 16, GroupElement::h1(0.3, -0.4, 0.2));
        CHECK(fb.residual < 1e-10);
    }
}
