#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stringkern/kernels3d.hpp"
#include "stringkern/numerics.hpp"
#include "stringkern/verify3d.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>

using namespace stringkern;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(const Mat3& a, const Mat3& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

// Largest pure second difference, a scale for second derivatives of F at x.
double hessian_scale(const MatrixField3& F, const Vec3& x, double s) {
    double m = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Vec3 e = s * Vec3::Unit(i);
        m = std::max(m, ((F(x + e) - 2 * F(x) + F(x - e)) / (s * s)).cwiseAbs().maxCoeff());
    }
    return m;
}

Mat3 richardson_traction(const MatrixField3& F, const Vec3& x, const Vec3& n, double step, const ElasticParams& p) {
    return (4 * fd_traction(F, x, n, 0.5 * step, p) - fd_traction(F, x, n, step, p)) / 3;
}

struct Sampler {
    std::mt19937_64 rng;
    std::normal_distribution<double> g{0.0, 1.0};
    std::uniform_real_distribution<double> u{0.0, 1.0};
    explicit Sampler(std::uint64_t seed) : rng(seed) {}
    Vec3 dir() {
        Vec3 d(g(rng), g(rng), g(rng));
        return d.normalized();
    }
    // Target at distance in [lo, hi] from y, away from the forward ray.
    Vec3 target(const Vec3& y, const Vec3& v, double lo, double hi) {
        for (;;) {
            const Vec3 d = dir();
            if (d.dot(v) <= 0.9) return y + (lo + (hi - lo) * u(rng)) * d;
        }
    }
};

const ElasticParams kParams[] = {ElasticParams(1.0, 1.0), ElasticParams(10.0, 2.0), ElasticParams(1e3, 0.7)};

}  // namespace

TEST_CASE("stokeslet3d") {
    const Mat3 g = stokeslet3d(Vec3(1, 0, 0), Vec3::Zero(), 1.0);
    const Mat3 expect = Vec3(2, 1, 1).asDiagonal() * (1.0 / (4 * kPi));
    CHECK((g - expect).cwiseAbs().maxCoeff() <= 1e-16);
    CHECK_THROWS_AS(stokeslet3d(Vec3::Ones(), Vec3::Ones(), 1.0), KernelError);

    Sampler s(1);
    for (int i = 0; i < 10; ++i) {
        const Mat3 R = Eigen::Quaterniond::UnitRandom().toRotationMatrix();
        const Vec3 x = s.dir() * 1.3, y = s.dir() * 0.4;
        CHECK(rel(stokeslet3d(R * x, R * y, 2.0), R * stokeslet3d(x, y, 2.0) * R.transpose()) <= 1e-13);
    }
}

TEST_CASE("Frame3 identities") {
    Sampler s(2);
    for (int i = 0; i < 20; ++i) {
        const Vec3 y = s.dir(), v = s.dir(), x = s.target(y, v, 0.5, 2.0);
        const auto f = Frame3::make(x, y, v);
        CHECK(std::abs(f.R - (f.rnorm - f.rv)) <= 1e-14 * f.rnorm);
        CHECK((f.Qr - (f.r - f.rv * v)).norm() <= 1e-14);
        CHECK(f.R * (f.rnorm + f.rv) == doctest::Approx(f.Qr.squaredNorm()).epsilon(1e-12));
        CHECK((f.Q * v).norm() <= 1e-15);
    }
    // Near the backward ray R ~ 2 r; near the forward ray R stays accurate.
    const auto b = Frame3::make(Vec3(0, 0, -1), Vec3::Zero(), Vec3(0, 0, 1));
    CHECK(b.R == 2.0);
    const auto fw = Frame3::make(Vec3(1e-6, 0, 1), Vec3::Zero(), Vec3(0, 0, 1));
    CHECK(fw.R == doctest::Approx(0.5e-12).epsilon(1e-6));
}

TEST_CASE("non-unit directions are rejected") {
    const ElasticParams p(1.0, 1.0);
    const Vec3 x(1, 1, 0), y = Vec3::Zero(), v(2, 0, 0);
    CHECK_THROWS_AS(string_kernel3d(x, y, v, 0.1, p), KernelError);
    CHECK_THROWS_AS(sigma_string3d(x, Vec3(0, 0, 1), y, v, 0.1, p), KernelError);
    CHECK_THROWS_AS(disp3d(3, x, y, Vec3(1, 0, 0), p), KernelError);
}

TEST_CASE("disp3d rotation equivariance") {
    Sampler s(3);
    for (int order = 0; order <= 2; ++order)
        for (int i = 0; i < 5; ++i) {
            const Mat3 R = Eigen::Quaterniond::UnitRandom().toRotationMatrix();
            const Vec3 y = s.dir(), v = s.dir(), x = s.target(y, v, 0.5, 2.0);
            const Mat3 a = disp3d(order, R * x, R * y, R * v, kParams[1]);
            const Mat3 b = R * disp3d(order, x, y, v, kParams[1]) * R.transpose();
            CHECK(rel(a, b) <= 1e-12);
        }
}

TEST_CASE("disp3d reduces to the Stokeslet when alpha = 1") {
    const ElasticParams sl = ElasticParams::stokes_limit(1.5);
    const Vec3 x(0.3, -0.4, 1.0), y(0.1, 0.2, 0.0), v(0, 0, 1);
    CHECK(rel(disp3d(0, x, y, v, sl), stokeslet3d(x, y, 1.5)) <= 1e-15);
    CHECK(rel(kelvin3d(x, y, sl), stokeslet3d(x, y, 1.5)) <= 1e-15);
}

TEST_CASE("higher orders are directional derivatives in y") {
    Sampler s(4);
    for (const auto& p : kParams)
        for (int i = 0; i < 10; ++i) {
            const Vec3 y = s.dir(), v = s.dir(), x = s.target(y, v, 0.5, 2.0);
            const double e = 1e-5;
            for (int order = 1; order <= 2; ++order) {
                const Mat3 fd = (disp3d(order - 1, x, y + e * v, v, p) - disp3d(order - 1, x, y - e * v, v, p)) / (2 * e);
                CHECK(rel(fd, disp3d(order, x, y, v, p)) <= 1e-7);
            }
        }
}

TEST_CASE("order 0 and order 1 reject the forward ray; order 2 is finite there") {
    const ElasticParams p(1.0, 1.0);
    const Vec3 y = Vec3::Zero(), v(0, 0, 1), x(0, 0, 0.8);
    CHECK_THROWS_AS(disp3d(0, x, y, v, p), KernelError);
    CHECK_THROWS_AS(disp3d(1, x, y, v, p), KernelError);
    const Mat3 on = disp3d(2, x, y, v, p);
    CHECK(on.allFinite());
    for (double e : {1e-4, 1e-6}) CHECK(rel(disp3d(2, x + Vec3(e, 0, 0), y, v, p), on) <= 10 * e);
    // Antipodal direction: the order-0 correction is regular and symmetric.
    const Mat3 back = disp3d(0, -x, y, v, p);
    CHECK(back.allFinite());
    CHECK((back - back.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("stress3d matches finite-difference stress") {
    Sampler s(5);
    for (const auto& p : kParams)
        for (int order = 0; order <= 2; ++order)
            for (int i = 0; i < 10; ++i) {
                const Vec3 y = s.dir(), v = s.dir(), x = s.target(y, v, 0.5, 2.0), n = s.dir();
                const MatrixField3 F = [&](const Vec3& z) { return disp3d(order, z, y, v, p); };
                // Plain O(step^2) differences lose accuracy in proportion to lambda.
                const Mat3 fd = richardson_traction(F, x, n, 2e-3 * (x - y).norm(), p);
                CHECK(rel(fd, stress3d(order, x, n, y, v, p)) <= 1e-6);
            }
}

TEST_CASE("disp3d and the string kernel satisfy the elastostatic equation") {
    Sampler s(6);
    for (const auto& p : kParams)
        for (int i = 0; i < 10; ++i) {
            const Vec3 y = s.dir(), v = s.dir(), x = s.target(y, v, 0.5, 2.0);
            const double step = 1e-3 * (x - y).norm();
            for (int order = 0; order <= 3; ++order) {
                const MatrixField3 F = [&](const Vec3& z) {
                    return order < 3 ? disp3d(order, z, y, v, p) : string_kernel3d(z, y, v, 0.25, p);
                };
                const double scale = (p.lambda() + 2 * p.mu()) * hessian_scale(F, x, step);
                CHECK(elasto_residual(F, x, step, p).cwiseAbs().maxCoeff() <= 1e-5 * scale);
            }
        }
}

TEST_CASE("closed form and line quadrature agree away from the string") {
    Sampler s(7);
    const double h = 0.25;
    for (const auto& p : kParams)
        for (int i = 0; i < 20; ++i) {
            const Vec3 y = s.dir(), v = s.dir(), x = s.target(y, v, 2 * h, 8 * h), n = s.dir();
            const Mat3 kc = string_kernel3d(x, y, v, h, p, {StringForm::closed, 16});
            const Mat3 kq = string_kernel3d(x, y, v, h, p, {StringForm::quadrature, 16});
            CHECK(rel(kq, kc) <= 1e-12);
            const Mat3 sc = sigma_string3d(x, n, y, v, h, p, {StringForm::closed, 16});
            const Mat3 sq = sigma_string3d(x, n, y, v, h, p, {StringForm::quadrature, 16});
            CHECK(rel(sq, sc) <= 1e-12);
        }
}

TEST_CASE("string kernel equals the telescoped definition") {
    // K = G(y) - G(y + h v) + h v.grad G(y + h v), by direct evaluation.
    const ElasticParams p(10.0, 1.0);
    const Vec3 y(0.1, 0.0, -0.2), v = Vec3(1, 2, 2) / 3.0, x(-0.5, 0.6, 0.3);
    const double h = 0.3;
    const Vec3 ys = y + h * v;
    const Mat3 expect = disp3d(0, x, y, v, p) - disp3d(0, x, ys, v, p) + h * disp3d(1, x, ys, v, p);
    CHECK(rel(string_kernel3d(x, y, v, h, p, {StringForm::closed, 16}), expect) <= 1e-15);
    CHECK_THROWS_AS(string_kernel3d(y + 0.5 * h * v, y, v, h, p), KernelError);
}

TEST_CASE("forward ray beyond the string") {
    const ElasticParams p(1.0, 1.0);
    const double h = 0.25;
    const Vec3 y = Vec3::Zero(), v(0, 0, 1), x = y + 3 * h * v;
    CHECK(string_kernel3d(x, y, v, h, p, {StringForm::quadrature, 16}).allFinite());
    CHECK(string_kernel3d(x, y, v, h, p).allFinite());
    CHECK_THROWS_AS(string_kernel3d(x, y, v, h, p, {StringForm::closed, 16}), KernelError);
}

TEST_CASE("string kernel decays one order faster than the Stokeslet") {
    const ElasticParams p(1.0, 1.0);
    const Vec3 y = Vec3::Zero(), v(0, 0, 1), dir = Vec3(1, 1, -1).normalized();
    const double h = 0.1;
    double prev = 0.0;
    for (double d : {2.0, 4.0, 8.0, 16.0}) {
        const double k = string_kernel3d(y + d * dir, y, v, h, p).norm();
        if (prev > 0.0) CHECK(prev / k == doctest::Approx(8.0).epsilon(0.1));
        prev = k;
    }
}

TEST_CASE("Stokes-limit traction kernel") {
    Sampler s(8);
    const auto sl = ElasticParams::stokes_limit(1.0);
    for (int i = 0; i < 10; ++i) {
        const Vec3 y = s.dir(), v = s.dir(), x = s.target(y, v, 0.5, 2.0), n = s.dir();
        const Mat3 a = stokes_limit_sigma3d(x, n, y, v, 0.25);
        CHECK(rel(sigma_string3d(x, n, y, v, 0.25, sl, {StringForm::quadrature, 32}), a) <= 1e-12);
        // lambda -> infinity approaches the limit.
        CHECK(rel(sigma_string3d(x, n, y, v, 0.25, ElasticParams(1e12, 1.0), {StringForm::closed, 16}), a) <= 1e-9);
    }
}

TEST_CASE("kelvin3d traction") {
    Sampler s(9);
    for (const auto& p : kParams)
        for (int i = 0; i < 10; ++i) {
            const Vec3 y = s.dir(), x = y + (0.5 + s.u(s.rng)) * s.dir(), n = s.dir();
            const MatrixField3 F = [&](const Vec3& z) { return kelvin3d(z, y, p); };
            CHECK(rel(richardson_traction(F, x, n, 2e-3, p), kelvin3d_traction(x, n, y, p)) <= 1e-7);
        }
}

TEST_CASE("kelvin3d traction integrates to -2 I over a sphere") {
    const ElasticParams p(10.0, 1.0);
    const auto& q = gauss_legendre_cached(32);
    auto net = [&](const Vec3& y) {
        Mat3 s = Mat3::Zero();
        const int nphi = 64;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const double ct = q.nodes[i], st = std::sqrt(1 - ct * ct);
            for (int k = 0; k < nphi; ++k) {
                const double ph = 2 * kPi * k / nphi;
                const Vec3 x(st * std::cos(ph), st * std::sin(ph), ct);
                s += q.weights[i] * (2 * kPi / nphi) * kelvin3d_traction(x, x, y, p);
            }
        }
        return s;
    };
    CHECK((net(Vec3(0.1, -0.2, 0.15)) + 2 * Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(net(Vec3(2.5, 0.3, -0.2)).cwiseAbs().maxCoeff() <= 1e-8);
}
