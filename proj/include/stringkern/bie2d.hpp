#pragma once

#include "stringkern/geometry2d.hpp"
#include "stringkern/kernels2d.hpp"
#include "stringkern/numerics.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace stringkern {

class StringValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IncompatibleDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Discretized operator. Unknowns are node-major: index 2 j + c.
struct DenseSystem {
    DenseMatrix A;
    std::vector<double> weights;   // per node
    Eigen::MatrixXd psi;           // 2N x 3, W-orthonormal rigid fields (after deflate)
    bool deflated = false;
    bool scaled = false;
};

/// Refuses assembly (StringValidationError) if validate_strings reports violations.
DenseSystem assemble(const Panelization& p, const std::vector<StringSpec>& strings);

/// W-orthonormal discrete rigid fields {e1, e2, (x - x_c)^perp}, 2N x 3.
Eigen::MatrixXd rigid_basis(const Panelization& p);

/// A <- A + Psi Psi^T W.
DenseSystem deflate(DenseSystem s, const Panelization& p);

/// A <- D^{1/2} A D^{-1/2}, D = per-unknown weights.
DenseSystem l2_scale(DenseSystem s);

struct PointSource {
    Vec2 y;
    Vec2 strength;
};

struct Manufactured {
    Vector f;                        // traction data, node-major
    std::vector<PointSource> sources;
    ElasticParams params{1.0, 1.0};
    Vec2 exact(const Vec2& x) const;
};

/// Kelvin sources outside the domain; traction data at the nodes.
Manufactured manufacture(const Panelization& p, const std::vector<PointSource>& sources, const ElasticParams& params);

/// count sources at radius_factor * gamma(t_j), t_j = 2 pi j / count; strengths uniform in [-0.5, 0.5].
std::vector<PointSource> sources_on_scaled_curve(const Curve& c, int count, double radius_factor, std::uint64_t seed);

/// count sources at uniformly random angles and radius in [r_lo, r_hi]; strengths uniform in [-0.5, 0.5].
std::vector<PointSource> sources_in_annulus(int count, double r_lo, double r_hi, std::uint64_t seed);

struct Compatibility {
    double net_force = 0.0;
    double net_torque = 0.0;
    double scale = 0.0;  // sum_i w_i |f_i|
};
Compatibility compatibility(const Panelization& p, const Vector& f);

struct SolveResult {
    Vector rho;
    int iters = 0;
    double residual = 0.0;
    GmresStatus status = GmresStatus::converged;
};

/// GMRES on the (deflated) system; compatible f required (relative tolerance compat_tol).
SolveResult solve(const DenseSystem& s, const Panelization& p, const Vector& f, double tol = 1e-10,
                  int max_iter = 1000, double compat_tol = 1e-8);

struct NearQuadOptions {
    double far_ratio = 1.5;  // subdivide while distance < far_ratio * subpanel length
    int max_depth = 40;
};

/// u(x) = int K^{B,2}(x, y) rho(y) dS(y) with adaptive subdivision near the boundary.
std::vector<Vec2> eval_displacement(const Vector& rho, const Panelization& p, const StringRule& rule,
                                    const ElasticParams& params, const std::vector<Vec2>& targets,
                                    NearQuadOptions opt = {});

/// Traction n(x_i) . sigma[u](x_i - delta n(x_i)) of the represented field.
Vec2 offsurface_traction(const Vector& rho, const Panelization& p, const StringRule& rule, std::size_t node,
                         double delta, NearQuadOptions opt = {});

struct RigidFit {
    Vec2 v0;
    double omega = 0.0;
    std::vector<double> residuals;  // |u_exact - u - v0 - omega (x - x_c)^perp| / max_i |u_exact(x_i)|
    double max_residual() const;
};

RigidFit rigid_body_fit(const std::vector<Vec2>& u_exact, const std::vector<Vec2>& u, const std::vector<Vec2>& targets,
                        const Vec2& x_c);

/// Uniform bounding-box grid filtered to interior points outside the near-boundary margin.
/// The pitch is halved until at least min_count points survive.
std::vector<Vec2> interior_grid(const Panelization& p, int min_count);

}  // namespace stringkern
