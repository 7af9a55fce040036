#include "doctest.h"

#include "sublab/contact.hpp"

#include <cmath>

using namespace sublab;

TEST_CASE("constant field: Reeb field is a rescaled fiber rotation") {
    const auto metric = constant_field_model(1, 2.0, ContactNormalization::Metric);
    const auto connection = constant_field_model(1, 2.0, ContactNormalization::Connection);
    const Eigen::Vector3d p(0.3, 0.7, 0.1);
    CHECK((reeb_field(metric, p) - Eigen::Vector3d(0.0, 0.0, 2.0)).norm() < 1e-14);
    CHECK((reeb_field(connection, p) - Eigen::Vector3d(0.0, 0.0, 1.0)).norm() < 1e-14);
    CHECK((reeb_field_linear(metric, p).field - reeb_field(metric, p)).norm() < 1e-12);
}

TEST_CASE("variable field: linear solve matches the closed form and the defining identities") {
    const auto model = sine_field_model(1, 0.5, 0.2);
    for (double x1 : {0.1, 0.45, 0.8})
        for (double x2 : {0.05, 0.6}) {
            const Eigen::Vector3d p(x1, x2, 0.3);
            const auto closed = reeb_field(model, p);
            CHECK((reeb_field_linear(model, p).field - closed).cwiseAbs().maxCoeff() < 1e-10);
            const auto id = reeb_identities(model, p, closed);
            CHECK(id.eta_defect < 1e-12);
            CHECK(id.deta_defect < 1e-8);
            CHECK(std::abs(reeb_divergence(model, p)) < 2e-5);  // O(h^2) differences
        }
    CHECK(contact_check(model) > 0.0);
    CHECK(curvature_mismatch(model) < 1e-6);
}

TEST_CASE("bundle gluing across x1 = 1") {
    const auto model = constant_field_model(1, 1.0);
    const auto w = wrap_point(model, Eigen::Vector3d(1.2, 0.3, 0.1));
    CHECK(w(0) == doctest::Approx(0.2));
    CHECK(w(1) == doctest::Approx(0.3));
    CHECK(w(2) == doctest::Approx(0.4));
}

TEST_CASE("contact volume of the flat unit bundle") {
    // |eta ^ d eta| has density b sqrt(g) = flux, times 1 / (2^1 1!).
    CHECK(contact_volume(constant_field_model(1, 1.0)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("flows: periodicity, volume preservation, Birkhoff averages") {
    const auto flat = constant_field_model(1, 1.0);
    const Eigen::Vector3d p(0.25, 0.4, 0.6);
    const auto end = reeb_flow_map(flat, p, 1.0, 1e-2);
    CHECK((end - p - Eigen::Vector3d(0.0, 0.0, 1.0)).norm() < 1e-12);
    // The constant-b flow moves only the fiber, so time averages are pointwise values.
    const double avg = birkhoff_average(flat, [](const Eigen::Vector3d& q) { return std::cos(2.0 * kPi * q(0)); }, p,
                                        3.0, 1e-2);
    CHECK(avg == doctest::Approx(std::cos(2.0 * kPi * 0.25)).epsilon(1e-12));

    const auto model = sine_field_model(1, 0.5, 0.0);
    CHECK(std::abs(flow_volume_ratio(model, p, 2.0, 1e-3) - 1.0) < 1e-6);
    const auto tr = reeb_flow(model, p, -1.0, 1e-3);
    CHECK(tr.times.back() == doctest::Approx(-1.0));
    CHECK(tr.max_eta_drift < 1e-9);
    CHECK_THROWS(reeb_flow(model, p, 1.0, 0.5));
}
