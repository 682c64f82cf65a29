#include "stringkern/kernels3d.hpp"

#include "stringkern/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stringkern {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRayTol = 1e-12;

void check_unit(const Vec3& v) {
    if (!(std::abs(v.norm() - 1.0) <= 1e-12)) throw KernelError("kernels3d: direction must be a unit vector");
}

void check_off_ray(const Frame3& f) {
    if (!(f.R > kRayTol * f.rnorm)) throw KernelError("kernels3d: target on the singular ray");
}

void check_off_segment(const Vec3& x, const Vec3& y, const Vec3& v, double h) {
    if (!(h > 0.0)) throw KernelError("kernels3d: string length must be positive");
    const double t = std::clamp((x - y).dot(v), 0.0, h);
    if ((x - (y + t * v)).norm() <= 1e-12 * std::max(1.0, (x - y).norm()))
        throw KernelError("kernels3d: target on the string");
}

Mat3 outer(const Vec3& a, const Vec3& b) { return a * b.transpose(); }

}  // namespace

Frame3 Frame3::make(const Vec3& x, const Vec3& y, const Vec3& v) {
    check_unit(v);
    Frame3 f;
    f.r = x - y;
    f.rnorm = f.r.norm();
    if (!(f.rnorm > 0.0)) throw KernelError("kernels3d: coincident points");
    f.v = v;
    f.Q = Mat3::Identity() - v * v.transpose();
    f.rv = f.r.dot(v);
    f.Qr = f.r - f.rv * v;
    // R (r + r.v) = |Q r|^2
    f.R = f.rv > 0.0 ? f.Qr.squaredNorm() / (f.rnorm + f.rv) : f.rnorm - f.rv;
    return f;
}

Mat3 stokeslet3d(const Vec3& x, const Vec3& y, double mu) {
    const Vec3 r = x - y;
    const double rn = r.norm();
    if (!(rn > 0.0)) throw KernelError("stokeslet3d: coincident points");
    return (Mat3::Identity() / rn + outer(r, r) / (rn * rn * rn)) / (4.0 * kPi * mu);
}

Mat3 disp3d(int order, const Vec3& x, const Vec3& y, const Vec3& v, const ElasticParams& p) {
    const Frame3 f = Frame3::make(x, y, v);
    const Vec3 &r = f.r, &Qr = f.Qr;
    const double rn = f.rnorm, rv = f.rv, R = f.R, b = p.beta();
    const double r3 = rn * rn * rn, r5 = r3 * rn * rn, r7 = r5 * rn * rn;
    const Mat3 I = Mat3::Identity();
    const Mat3 skew = outer(r, v) - outer(v, r) - rv * outer(v, v);
    const double c = 1.0 / (4.0 * kPi * p.mu());
    switch (order) {
        case 0: {
            const Mat3 gs = I / rn + outer(r, r) / r3;
            if (b == 0.0) return c * gs;
            check_off_ray(f);
            return c * (gs + b * (I / R + skew / (rn * R) - outer(Qr, Qr) / (rn * R * R)));
        }
        case 1: {
            const Mat3 gs = rv * I / r3 - (outer(v, r) + outer(r, v)) / r3 + 3.0 * rv * outer(r, r) / r5;
            if (b == 0.0) return c * gs;
            check_off_ray(f);
            return c * (gs + b * (-f.Q / (rn * R) - skew / r3 + (rn + R) * outer(Qr, Qr) / (r3 * R * R)));
        }
        case 2: {
            const Mat3 gs = (-1.0 / r3 + 3.0 * rv * rv / r5) * I + 2.0 * outer(v, v) / r3 -
                            6.0 * rv * (outer(v, r) + outer(r, v)) / r5 - 3.0 * outer(r, r) / r5 +
                            15.0 * rv * rv * outer(r, r) / r7;
            return c * (gs + b * (I / r3 - 2.0 * outer(v, v) / r3 - 3.0 * outer(Qr, Qr) / r5 - 3.0 * rv * skew / r5));
        }
        default:
            throw KernelError("disp3d: order must be 0, 1 or 2");
    }
}

Mat3 stress3d(int order, const Vec3& x, const Vec3& n, const Vec3& y, const Vec3& v, const ElasticParams& p) {
    const Frame3 f = Frame3::make(x, y, v);
    const Vec3 &r = f.r, &Qr = f.Qr;
    const double rn = f.rnorm, rv = f.rv, R = f.R, b = p.beta();
    const double r2 = rn * rn, r3 = r2 * rn, r5 = r3 * r2, r7 = r5 * r2, r9 = r7 * r2;
    const Vec3 Qn = f.Q * n;
    const double nr = n.dot(r), nv = n.dot(v), nQr = n.dot(Qr);
    const Mat3& Q = f.Q;
    const double c = 1.0 / (4.0 * kPi);
    // Contractions: a_i b_j c_k -> (n.a) b c^T; Q_ij w_k -> Qn w^T;
    // Q_ik (Qr)_j + Q_jk (Qr)_i -> Qr Qn^T + (n.Qr) Q.
    const Mat3 sym = outer(Qr, Qn) + nQr * Q;
    switch (order) {
        case 0: {
            const Mat3 t = -6.0 * nr * outer(r, r) / r5;
            if (b == 0.0) return c * t;
            check_off_ray(f);
            const Mat3 bb = (4.0 / R + 2.0 / rn) * nQr * outer(Qr, r) / (r2 * R * R) -
                            2.0 * outer(Qn, r) / rn * (1.0 / (R * R) - 1.0 / r2) -
                            4.0 * nQr * outer(Qr, v) / (rn * R * R * R) + 2.0 * outer(Qn, v) / (R * R) -
                            2.0 * sym / (rn * R * R);
            return c * (t + b * bb);
        }
        case 1: {
            // The printed display is -sigma[v.grad_y G]; return sigma itself.
            const Mat3 t = -6.0 * (nr * outer(r, v) + nr * outer(v, r) + nv * outer(r, r)) / r5 +
                           30.0 * nr * rv * outer(r, r) / r7;
            if (b == 0.0) return -c * t;
            check_off_ray(f);
            const double R2 = R * R, R3 = R2 * R;
            const Mat3 bb = -2.0 * nQr * outer(Qr, v) * (R + 2.0 * rn) / (r3 * R3) +
                            2.0 * nQr * outer(Qr, r) * (2.0 * r2 + 3.0 * rn * R + 3.0 * R2) / (r5 * R3) +
                            2.0 * outer(Qn, v) / (rn * R2) - 2.0 * (R + rn) / (r3 * R2) * (sym + outer(Qn, r)) +
                            2.0 * outer(Qn, v) / r3 - 6.0 * rv * outer(Qn, r) / r5;
            return -c * (t + b * bb);
        }
        case 2: {
            const Mat3 rrv = nr * outer(r, v) + nr * outer(v, r) + nv * outer(r, r);
            const Mat3 t = -12.0 * (nr * outer(v, v) + nv * outer(r, v) + nv * outer(v, r)) / r5 +
                           30.0 * nr * outer(r, r) / r7 + 60.0 * rv * rrv / r7 - 210.0 * nr * rv * rv * outer(r, r) / r9;
            const Mat3 bb = 30.0 * nQr * outer(Qr, r) / r7 - 6.0 * sym / r5 - 12.0 * rv * outer(Qn, v) / r5 -
                            12.0 * outer(Qn, r) / r5 + 30.0 * rv * rv * outer(Qn, r) / r7;
            return c * (t + b * bb);
        }
        default:
            throw KernelError("stress3d: order must be 0, 1 or 2");
    }
}

namespace {

bool use_closed(const Vec3& x, const Vec3& y, double h, FormSpec form) {
    switch (form.form) {
        case StringForm::closed: return true;
        case StringForm::quadrature: return false;
        default: return (x - y).norm() < kClosedFormLimit * h;
    }
}

}  // namespace

Mat3 string_kernel3d(const Vec3& x, const Vec3& y, const Vec3& v, double h, const ElasticParams& p, FormSpec form) {
    check_unit(v);
    check_off_segment(x, y, v, h);
    const Vec3 ys = y + h * v;
    if (use_closed(x, y, h, form)) return disp3d(0, x, y, v, p) - disp3d(0, x, ys, v, p) + h * disp3d(1, x, ys, v, p);
    const auto& q = gauss_legendre_cached(form.n);
    Mat3 k = Mat3::Zero();
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double t = 0.5 * h * (1.0 + q.nodes[i]);
        k += (0.5 * h * q.weights[i] * t) * disp3d(2, x, y + t * v, v, p);
    }
    return k;
}

Mat3 sigma_string3d(const Vec3& x, const Vec3& n, const Vec3& y, const Vec3& v, double h, const ElasticParams& p,
                    FormSpec form) {
    check_unit(v);
    check_off_segment(x, y, v, h);
    const Vec3 ys = y + h * v;
    if (use_closed(x, y, h, form))
        return stress3d(0, x, n, y, v, p) - stress3d(0, x, n, ys, v, p) + h * stress3d(1, x, n, ys, v, p);
    const auto& q = gauss_legendre_cached(form.n);
    Mat3 s = Mat3::Zero();
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double t = 0.5 * h * (1.0 + q.nodes[i]);
        s += (0.5 * h * q.weights[i] * t) * stress3d(2, x, n, y + t * v, v, p);
    }
    return s;
}

Mat3 stokes_limit_sigma3d(const Vec3& x, const Vec3& n, const Vec3& y, const Vec3& v, double h) {
    return sigma_string3d(x, n, y, v, h, ElasticParams::stokes_limit(1.0), {StringForm::closed, 16});
}

Mat3 kelvin3d(const Vec3& x, const Vec3& y, const ElasticParams& p) {
    const Vec3 r = x - y;
    const double rn = r.norm(), a = p.alpha();
    if (!(rn > 0.0)) throw KernelError("kelvin3d: coincident points");
    return ((2.0 - a) * Mat3::Identity() / rn + a * outer(r, r) / (rn * rn * rn)) / (4.0 * kPi * p.mu());
}

Mat3 kelvin3d_traction(const Vec3& x, const Vec3& n, const Vec3& y, const ElasticParams& p) {
    // sigma_ijk = (1/4pi)[2(1-a)(d_ij r_k - r_i d_jk - r_j d_ik)/r^3 - 6a r_i r_j r_k / r^5]
    const Vec3 r = x - y;
    const double rn = r.norm(), a = p.alpha(), nr = n.dot(r);
    if (!(rn > 0.0)) throw KernelError("kelvin3d_traction: coincident points");
    const double r3 = rn * rn * rn;
    return (2.0 * (1.0 - a) * (outer(n, r) - nr * Mat3::Identity() - outer(r, n)) / r3 -
            6.0 * a * nr * outer(r, r) / (r3 * rn * rn)) /
           (4.0 * kPi);
}

}  // namespace stringkern
