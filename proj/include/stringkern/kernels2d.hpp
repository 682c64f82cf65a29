#pragma once

#include "stringkern/geometry2d.hpp"

#include <limits>
#include <stdexcept>

namespace stringkern {

class KernelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lame pair. lambda = +infinity is the Stokes-limit sentinel (alpha = 1 exactly).
class ElasticParams {
public:
    ElasticParams(double lambda, double mu);
    static ElasticParams stokes_limit(double mu) { return {std::numeric_limits<double>::infinity(), mu}; }

    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    double alpha() const { return alpha_; }
    /// (1 - alpha) / alpha = mu / (lambda + mu), exactly 0 for the sentinel.
    double beta() const { return beta_; }
    bool is_stokes_limit() const { return std::isinf(lambda_); }

private:
    double lambda_, mu_, alpha_, beta_;
};

/// Argument of v + i u in (-pi, pi].
double arg2(double u, double v);

Mat2 stokeslet2d(const Vec2& x, const Vec2& y, double mu);

/// T_jk = -2 (r.n) r_j r_k / (pi r^4), r = x - y.
Mat2 stokeslet2d_traction(const Vec2& x, const Vec2& n_x, const Vec2& y);

/// Boussinesq-Cerruti kernel G^S + ((1-a)/a)/(2 pi mu) [-log r I + theta J],
/// theta = arg2(v_perp.r, -v.r), J = [[0,1],[-1,0]].
Mat2 boussinesq2d(const Vec2& x, const Vec2& y, const Vec2& v, const ElasticParams& p);

/// Telescoping sum of G^B differences over the string segments.
Mat2 string_kernel2d(const Vec2& x, const StringSpec& s, const ElasticParams& p);

/// Traction of the string kernel at x with normal n_x. When x coincides with
/// the string base, the base term is replaced by its limit -(kappa/pi) tau tau^T.
Mat2 sigma_string2d(const Vec2& x, const Vec2& n_x, double curvature_x, const StringSpec& s);

/// Elastostatic Green's function (1/2 pi mu)[-(2-a) log r I + a r r^T / r^2].
Mat2 kelvin2d(const Vec2& x, const Vec2& y, const ElasticParams& p);

/// n_x . sigma[kelvin2d(., y)](x); column k is the traction due to force e_k.
Mat2 kelvin2d_traction(const Vec2& x, const Vec2& n_x, const Vec2& y, const ElasticParams& p);

/// Traction at x (normal n_x) of the string-kernel field, i.e. sigma_string2d
/// without the diagonal special case; x must lie off the string.
Mat2 string_traction2d(const Vec2& x, const Vec2& n_x, const StringSpec& s);

}  // namespace stringkern
