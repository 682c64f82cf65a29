#pragma once

#include "stringkern/kernels2d.hpp"

#include <Eigen/Dense>

namespace stringkern {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Geometry of a (target, source, direction) triple.
struct Frame3 {
    Vec3 r;          // x - y
    double rnorm;
    Vec3 v;          // unit
    Mat3 Q;          // I - v v^T
    Vec3 Qr;
    double rv;       // r . v
    double R;        // rnorm - r.v, evaluated without cancellation

    static Frame3 make(const Vec3& x, const Vec3& y, const Vec3& v);
};

Mat3 stokeslet3d(const Vec3& x, const Vec3& y, double mu);

/// order 0: G^{B,3}; order 1: v.grad_y G^{B,3}; order 2: v.grad_y v.grad_y G^{B,3}.
/// Orders 0 and 1 reject targets on the ray {y + t v, t > 0}.
Mat3 disp3d(int order, const Vec3& x, const Vec3& y, const Vec3& v, const ElasticParams& p);

/// n_x contracted with the first index of the stress of disp3d(order); entry (j, k).
Mat3 stress3d(int order, const Vec3& x, const Vec3& n_x, const Vec3& y, const Vec3& v, const ElasticParams& p);

enum class StringForm { closed, quadrature, automatic };

struct FormSpec {
    StringForm form = StringForm::automatic;
    int n = 16;  // Gauss-Legendre points for the line integral
};

/// Closed-form switch threshold for StringForm::automatic: closed below
/// 0.95 h, line integral otherwise.
constexpr double kClosedFormLimit = 0.95;

Mat3 string_kernel3d(const Vec3& x, const Vec3& y, const Vec3& v, double h, const ElasticParams& p,
                     FormSpec form = {});

Mat3 sigma_string3d(const Vec3& x, const Vec3& n_x, const Vec3& y, const Vec3& v, double h, const ElasticParams& p,
                    FormSpec form = {});

/// Incompressible-limit traction kernel: sigma_string3d at alpha = 1 (closed form),
/// i.e. the two-endpoint stresslet difference plus the endpoint dipole term.
Mat3 stokes_limit_sigma3d(const Vec3& x, const Vec3& n_x, const Vec3& y, const Vec3& v, double h);

/// (1/4 pi mu)[(2 - a) I / r + a r r^T / r^3].
Mat3 kelvin3d(const Vec3& x, const Vec3& y, const ElasticParams& p);
Mat3 kelvin3d_traction(const Vec3& x, const Vec3& n_x, const Vec3& y, const ElasticParams& p);

}  // namespace stringkern
