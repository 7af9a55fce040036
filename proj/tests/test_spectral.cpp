#include "doctest.h"

#include "sublab/spectral.hpp"

#include <cmath>

using namespace sublab;

namespace {

// Dataset whose counting function is floor(c delta^2) up to delta_max.
SpectralDataset quadratic_dataset(double c, double delta_max) {
    SpectralDataset ds;
    for (long k = 1;; ++k) {
        const double d = std::sqrt(k / c);
        if (d > delta_max) break;
        SpectralEntry e;
        e.delta = d;
        ds.entries.push_back(e);
    }
    ds.delta_max = delta_max;
    ds.complete = true;
    return ds;
}

}  // namespace

TEST_CASE("counting function is inclusive and refuses what it cannot know") {
    auto ds = quadratic_dataset(1.0, 10.0);
    CHECK(counting_function(ds, 2.0) == 4);
    CHECK(counting_function(ds, 1.99) == 3);
    CHECK_THROWS_AS(counting_function(ds, 11.0), NumericalRefusal);
    ds.complete = false;
    CHECK_THROWS_AS(counting_function(ds, 5.0), NumericalRefusal);
}

TEST_CASE("Weyl fit recovers the exponent of a synthetic counting function") {
    const auto ds = quadratic_dataset(3.0, 100.0);
    const auto fit = weyl_fit(ds, 10.0, 100.0);
    CHECK(fit.exponent == doctest::Approx(2.0).epsilon(0.005));
    CHECK(fit.constant == doctest::Approx(3.0).epsilon(0.05));
    CHECK_THROWS_AS(weyl_fit(ds, 20.0, 100.0), NumericalRefusal);
}

TEST_CASE("Landau coefficients are exact rationals") {
    CHECK(landau_ratio(0, 1, 1) == boost::rational<long long>(9));
    CHECK(landau_ratio(0, 2, 1) == boost::rational<long long>(25));
    CHECK(landau_coefficient(1, 2) == boost::rational<long long>(2, 64));
    CHECK(landau_fraction(0, 1) == doctest::Approx(8.0 / (kPi * kPi)).epsilon(1e-12));
    // Closed forms: sum 1/(2j+1)^2 = pi^2/8 and sum (j+1)/(2j+2)^3 = pi^2/48.
    for (int n = 0; n < 6; ++n) {
        CHECK(landau_fraction(n, 1) == doctest::Approx(8.0 / (kPi * kPi * (2 * n + 1) * (2 * n + 1))).epsilon(1e-10));
        CHECK(landau_fraction(n, 2) == doctest::Approx(6.0 / (kPi * kPi * (n + 1) * (n + 1))).epsilon(1e-10));
    }
}

TEST_CASE("Landau proportions on a labeled synthetic dataset") {
    SpectralDataset ds;
    ds.complete = true;
    ds.delta_max = 1e9;
    // Level n receives round(10^5 / (2n+1)^2) entries.
    for (int n = 0; n < 40; ++n) {
        const long count = std::lround(1e5 / ((2.0 * n + 1) * (2.0 * n + 1)));
        for (long k = 0; k < count; ++k) {
            SpectralEntry e;
            e.delta = 2 * n + 1;
            e.m = 1;
            e.level = n;
            e.lambda_est = 1.0;
            ds.entries.push_back(e);
        }
    }
    const auto p = landau_proportions(ds, 3, 1e9);
    for (int n = 0; n <= 3; ++n) CHECK(std::abs(p.relative_error[n]) < 0.02);
    double sum = p.remainder;
    for (double f : p.empirical) sum += f;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quantum variance: constant observables vanish and shifts cancel") {
    SpectralDataset ds;
    ds.complete = true;
    ds.delta_max = 10.0;
    for (int k = 0; k < 5; ++k) {
        SpectralEntry e;
        e.delta = k + 1.0;
        ds.entries.push_back(e);
    }
    const std::vector<double> elements{0.1, 0.3, -0.2, 0.5, 0.0};
    CHECK(quantum_variance(ds, elements, 0.1, 2.0) == doctest::Approx(0.02));
    std::vector<double> shifted;
    for (double e : elements) shifted.push_back(e + 0.7);
    CHECK(quantum_variance(ds, shifted, 0.8, 5.0) == doctest::Approx(quantum_variance(ds, elements, 0.1, 5.0)));
}

TEST_CASE("density-one extraction") {
    const long n = 100000;
    std::vector<double> squares(n, 0.0);
    for (long k = 0; k * k < n; ++k) squares[k * k] = 1.0;
    const auto r = density_one_extract(squares);
    CHECK_FALSE(r.inconclusive);
    CHECK(static_cast<double>(r.indices.size()) / n == doctest::Approx(1.0 - 317.0 / n).epsilon(1e-3));
    // The threshold only drops below 1 once the Cesaro means are small.
    for (long i : r.indices)
        if (i >= 100) CHECK(squares[i] == 0.0);
    CHECK(density_one_extract(std::vector<double>(1000, 1.0)).inconclusive);
}

TEST_CASE("bump function derivatives agree with finite differences") {
    const auto f = bump_function(0.2, 0.8);
    double d[9], dp[9], dm[9];
    const double x = 0.5, h = 1e-5;
    f.fill(x, 3, d);
    f.fill(x + h, 3, dp);
    f.fill(x - h, 3, dm);
    for (int k = 0; k < 3; ++k) CHECK(d[k + 1] == doctest::Approx((dp[k] - dm[k]) / (2 * h)).epsilon(1e-6));
    CHECK(f(1.0) == 0.0);
    CHECK(f(0.2) == doctest::Approx(std::exp(-1.0)));
    CHECK(almost_analytic_cutoff(0.4) == 1.0);
    CHECK(almost_analytic_cutoff(1.1) == 0.0);
}

TEST_CASE("Helffer-Sjostrand calculus on small matrices") {
    const auto f = bump_function(0.0, 1.0);
    Eigen::MatrixXd T(1, 1);
    T(0, 0) = 0.3;
    const auto r = hs_functional_calculus(T, f, 3);
    CHECK(r.value(0, 0) == doctest::Approx(f(0.3)).epsilon(1e-7));
    CHECK(r.strip_bound > 0.0);

    Eigen::MatrixXd D = Eigen::Vector4d(-1.5, -0.4, 0.1, 0.9).asDiagonal();
    const auto rd = hs_functional_calculus(D, f, 3, {}, 2);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(rd.value(i, i) - f(D(i, i))) < 1e-7);
    CHECK(hs_functional_calculus(D, zero_function(-1.0, 1.0), 3).value.norm() == 0.0);
}

TEST_CASE("log-log slope and cutoffs") {
    std::vector<double> x{1, 2, 4, 8}, y;
    for (double v : x) y.push_back(5.0 * v * v * v);
    CHECK(loglog_slope(x, y) == doctest::Approx(3.0));
    const auto psi = cutoff_x1(0.2, 0.4);
    CHECK(psi(0.3, 0.7) == doctest::Approx(1.0));
    CHECK(psi(0.5, 0.1) == 0.0);
}

TEST_CASE("disjoint-support decay on a coarse torus") {
    const auto op = magnetic_mode_operator(constant_field_model(1, 1.0), 1, 48, 48);
    const auto curve = disjoint_support_decay(op, cutoff_x1(0.02, 0.22), cutoff_x1(0.52, 0.72), cd(0.0, 1.0),
                                              {1.0 / 16.0, 1.0 / 8.0}, 1);
    CHECK(curve.norm[0] < curve.norm[1]);
    for (std::size_t i = 0; i < 2; ++i) CHECK(curve.resolvent[i] <= 1.0 + 1e-9);
}
