#include "stringkern/kernels2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stringkern {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 checked_r(const Vec2& x, const Vec2& y, const char* who) {
    const Vec2 r = x - y;
    if (!(r.squaredNorm() > 0.0)) throw KernelError(std::string(who) + ": coincident points");
    return r;
}

const Mat2 kJ = (Mat2() << 0.0, 1.0, -1.0, 0.0).finished();

}  // namespace

ElasticParams::ElasticParams(double lambda, double mu) : lambda_(lambda), mu_(mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw KernelError("ElasticParams: mu must be positive and finite");
    if (std::isnan(lambda) || lambda < 0.0) throw KernelError("ElasticParams: lambda must be >= 0 or +infinity");
    if (std::isinf(lambda)) {
        alpha_ = 1.0;
        beta_ = 0.0;
    } else {
        alpha_ = (lambda + mu) / (lambda + 2.0 * mu);
        beta_ = mu / (lambda + mu);
    }
}

double arg2(double u, double v) {
    if (u == 0.0 && v == 0.0) throw KernelError("arg2: origin");
    const double a = std::atan2(u, v);
    return a == -kPi ? kPi : a;
}

Mat2 stokeslet2d(const Vec2& x, const Vec2& y, double mu) {
    const Vec2 r = checked_r(x, y, "stokeslet2d");
    const double r2 = r.squaredNorm();
    return (-0.5 * std::log(r2) * Mat2::Identity() + r * r.transpose() / r2) / (2.0 * kPi * mu);
}

Mat2 stokeslet2d_traction(const Vec2& x, const Vec2& n_x, const Vec2& y) {
    const Vec2 r = checked_r(x, y, "stokeslet2d_traction");
    const double r2 = r.squaredNorm();
    return (-2.0 * r.dot(n_x) / (kPi * r2 * r2)) * (r * r.transpose());
}

Mat2 boussinesq2d(const Vec2& x, const Vec2& y, const Vec2& v, const ElasticParams& p) {
    const Vec2 r = checked_r(x, y, "boussinesq2d");
    const Mat2 gs = stokeslet2d(x, y, p.mu());
    if (p.beta() == 0.0) return gs;
    const Vec2 vp(v.y(), -v.x());
    const double u = vp.dot(r), w = -v.dot(r);
    if (w < 0.0 && std::abs(u) <= 1e-12 * r.norm()) throw KernelError("boussinesq2d: target on the branch ray");
    const double theta = arg2(u, w);
    const double log_r = 0.5 * std::log(r.squaredNorm());
    return gs + (p.beta() / (2.0 * kPi * p.mu())) * (-log_r * Mat2::Identity() + theta * kJ);
}

Mat2 string_kernel2d(const Vec2& x, const StringSpec& s, const ElasticParams& p) {
    if (s.vertices.size() < 2) throw KernelError("string_kernel2d: string needs >= 2 vertices");
    Mat2 k = Mat2::Zero();
    for (std::size_t i = 0; i + 1 < s.vertices.size(); ++i) {
        const Vec2 &a = s.vertices[i], &b = s.vertices[i + 1];
        const Vec2 d = b - a;
        const double len = d.norm();
        const Vec2 v = d / len;
        // On-segment guard.
        const double t = std::clamp((x - a).dot(v), 0.0, len);
        if ((x - (a + t * v)).norm() <= 1e-12 * std::max(1.0, (x - a).norm()))
            throw KernelError("string_kernel2d: target on the string");
        k += boussinesq2d(x, a, v, p) - boussinesq2d(x, b, v, p);
    }
    return k;
}

Mat2 string_traction2d(const Vec2& x, const Vec2& n_x, const StringSpec& s) {
    return stokeslet2d_traction(x, n_x, s.vertices.front()) - stokeslet2d_traction(x, n_x, s.vertices.back());
}

Mat2 sigma_string2d(const Vec2& x, const Vec2& n_x, double curvature_x, const StringSpec& s) {
    const Vec2& p0 = s.vertices.front();
    const Vec2& pm = s.vertices.back();
    if (x == p0) {
        const Vec2 tau(-n_x.y(), n_x.x());
        return (-curvature_x / kPi) * (tau * tau.transpose()) - stokeslet2d_traction(x, n_x, pm);
    }
    return stokeslet2d_traction(x, n_x, p0) - stokeslet2d_traction(x, n_x, pm);
}

Mat2 kelvin2d(const Vec2& x, const Vec2& y, const ElasticParams& p) {
    const Vec2 r = checked_r(x, y, "kelvin2d");
    const double r2 = r.squaredNorm(), a = p.alpha();
    return (-(2.0 - a) * 0.5 * std::log(r2) * Mat2::Identity() + a * r * r.transpose() / r2) / (2.0 * kPi * p.mu());
}

Mat2 kelvin2d_traction(const Vec2& x, const Vec2& n_x, const Vec2& y, const ElasticParams& p) {
    // sigma_ijk = (1/pi)[(1-a)(d_ij r_k - r_i d_jk - r_j d_ik)/r^2 - 2a r_i r_j r_k / r^4]
    const Vec2 r = checked_r(x, y, "kelvin2d_traction");
    const double r2 = r.squaredNorm(), a = p.alpha(), rn = r.dot(n_x);
    const Mat2 t = (1.0 - a) * (n_x * r.transpose() - rn * Mat2::Identity() - r * n_x.transpose()) / r2 -
                   (2.0 * a * rn / (r2 * r2)) * (r * r.transpose());
    return t / kPi;
}

}  // namespace stringkern
