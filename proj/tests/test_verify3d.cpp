#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stringkern/numerics.hpp"
#include "stringkern/verify3d.hpp"

#include <json.hpp>

#include <set>

using namespace stringkern;

TEST_CASE("elasto_residual on polynomial fields") {
    const ElasticParams p(3.0, 1.5);
    const Vec3 x(0.3, -0.2, 0.9);

    const MatrixField3 constant = [](const Vec3&) { return Mat3::Constant(2.0); };
    CHECK(elasto_residual(constant, x, 1e-3, p).cwiseAbs().maxCoeff() == 0.0);

    Mat3 L;
    L << 1, 2, 3, -1, 0.5, 4, 2, 2, -3;
    const MatrixField3 linear = [&](const Vec3& z) { return Mat3(L * z.asDiagonal()); };
    CHECK(elasto_residual(linear, x, 1e-3, p).cwiseAbs().maxCoeff() <= 1e-9);

    // Column 0 is (x1^2, 0, 0): residual (2 lambda + 4 mu) e1. Column 1 is (0, x1 x2, 0): (lambda + mu) e1.
    const MatrixField3 quad = [](const Vec3& z) {
        Mat3 m = Mat3::Zero();
        m(0, 0) = z(0) * z(0);
        m(1, 1) = z(0) * z(1);
        return m;
    };
    const Mat3 r = elasto_residual(quad, x, 1e-2, p);
    CHECK(r(0, 0) == doctest::Approx(2 * p.lambda() + 4 * p.mu()).epsilon(1e-8));
    CHECK(r(0, 1) == doctest::Approx(p.lambda() + p.mu()).epsilon(1e-8));
    CHECK(std::abs(r(1, 0)) + std::abs(r(2, 0)) + std::abs(r(1, 1)) + r.col(2).norm() <= 1e-8);

    CHECK_THROWS_AS(elasto_residual(quad, x, 0.0, p), NumericsError);
}

TEST_CASE("fd_traction on a linear field") {
    const ElasticParams p(2.0, 0.5);
    // Column 0: u = (x1, 0, 0), strain e11 = 1, stress diag(lambda + 2 mu, lambda, lambda).
    const MatrixField3 f = [](const Vec3& z) {
        Mat3 m = Mat3::Zero();
        m(0, 0) = z(0);
        return m;
    };
    const Vec3 n = Vec3(1, 2, 2) / 3.0;
    const Mat3 t = fd_traction(f, Vec3(0.4, 0.1, -0.3), n, 1e-3, p);
    CHECK(t(0, 0) == doctest::Approx((p.lambda() + 2 * p.mu()) * n(0)).epsilon(1e-10));
    CHECK(t(1, 0) == doctest::Approx(p.lambda() * n(1)).epsilon(1e-10));
    CHECK(t(2, 0) == doctest::Approx(p.lambda() * n(2)).epsilon(1e-10));
    CHECK(t.col(1).norm() + t.col(2).norm() == 0.0);
}

TEST_CASE("the verification suite passes") {
    const auto reports = run_suite(7, {ElasticParams(1.0, 1.0)});
    std::set<std::string> names;
    for (const auto& r : reports) {
        INFO(r.check << " max_error " << r.max_error << " tol " << r.tolerance << " ratio " << r.order_ratio);
        CHECK(r.pass);
        CHECK(r.samples > 0);
        CHECK(r.max_error <= r.tolerance);
        names.insert(r.check);
    }
    for (const char* n : {"pde_residual/order0", "pde_residual/order1", "pde_residual/order2", "pde_residual/string_kernel",
                          "stress_fd/order0", "stress_fd/order1", "stress_fd/order2", "closed_vs_quadrature/kernel",
                          "closed_vs_quadrature/traction", "stokes_limit_scaling", "flat_half_space"})
        CHECK(names.count(n) == 1);

    const auto j = nlohmann::json::parse(reports_json(reports));
    REQUIRE(j.is_array());
    CHECK(j.size() == reports.size());
    CHECK(j[0].contains("check"));
    CHECK(j[0].contains("pass"));
}

TEST_CASE("suite labels parameter sets and is reproducible") {
    SuiteOptions small;
    small.pde_samples = small.stress_samples = small.form_samples = 5;
    small.limit_samples = small.flat_samples = 5;
    const auto a = run_suite(3, {ElasticParams(1.0, 1.0), ElasticParams(100.0, 1.0)}, small);
    const auto b = run_suite(3, {ElasticParams(1.0, 1.0), ElasticParams(100.0, 1.0)}, small);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].check == b[i].check);
        CHECK(a[i].max_error == b[i].max_error);
    }
    CHECK(a.front().check.find("[lambda=") != std::string::npos);
}
