#include "stringkern/bie2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace stringkern {

namespace {

Vec2 perp(const Vec2& x) { return Vec2(-x.y(), x.x()); }

// Barycentric weights for the Gauss-Legendre nodes of a given order.
std::vector<double> bary_weights(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 1.0);
    for (std::size_t j = 0; j < x.size(); ++j)
        for (std::size_t m = 0; m < x.size(); ++m)
            if (m != j) w[j] /= (x[j] - x[m]);
    return w;
}

// Density on panel k at reference coordinate s in [-1, 1].
Vec2 interp_density(const Vector& rho, std::size_t first, const std::vector<double>& nodes,
                    const std::vector<double>& bw, double s) {
    double den = 0.0;
    Vec2 num = Vec2::Zero();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double d = s - nodes[j];
        if (d == 0.0) return Vec2(rho(2 * (first + j)), rho(2 * (first + j) + 1));
        const double c = bw[j] / d;
        den += c;
        num += c * Vec2(rho(2 * (first + j)), rho(2 * (first + j) + 1));
    }
    return num / den;
}

// Sums int_panel k(x, y) rho(y) dS(y) for a kernel returning Mat2, refining
// the panel by bisection while the target is within far_ratio subpanel lengths
// of a node or string end.
class PanelIntegrator {
public:
    PanelIntegrator(const Vector& rho, const Panelization& p, const StringRule& rule,
                    const std::vector<StringSpec>& strings, NearQuadOptions opt)
        : rho_(rho), p_(p), rule_(rule), strings_(strings), opt_(opt), q_(gauss_legendre_cached(p.order)),
          bw_(bary_weights(q_.nodes)) {}

    template <class Kernel>
    Vec2 integrate(const Vec2& x, const Kernel& kernel) const {
        Vec2 acc = Vec2::Zero();
        const int order = p_.order;
        for (int k = 0; k < p_.n_panels; ++k) {
            const std::size_t first = static_cast<std::size_t>(k) * order;
            double len = 0.0, d = std::numeric_limits<double>::infinity();
            for (int i = 0; i < order; ++i) {
                const std::size_t j = first + i;
                len += p_.w[j];
                d = std::min({d, (x - p_.pos[j]).norm(), (x - strings_[j].vertices.back()).norm()});
            }
            if (d >= opt_.far_ratio * len) {
                for (int i = 0; i < order; ++i) {
                    const std::size_t j = first + i;
                    acc += p_.w[j] * (kernel(x, strings_[j]) * Vec2(rho_(2 * j), rho_(2 * j + 1)));
                }
            } else {
                acc += refine(x, kernel, k, -1.0, 1.0, 0);
            }
        }
        return acc;
    }

private:
    template <class Kernel>
    Vec2 refine(const Vec2& x, const Kernel& kernel, int k, double sa, double sb, int depth) const {
        const auto [t0, t1] = p_.panel_range(k);
        const double tm = 0.5 * (t0 + t1), th = 0.5 * (t1 - t0);
        const double sm = 0.5 * (sa + sb), sh = 0.5 * (sb - sa);
        const std::size_t n = q_.nodes.size();
        std::vector<CurvePoint> cps(n);
        std::vector<StringSpec> strs(n);
        double len = 0.0, d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double s = sm + sh * q_.nodes[i];
            cps[i] = p_.curve.eval(tm + th * s);
            strs[i] = make_string(rule_, cps[i].pos, cps[i].normal);
            len += q_.weights[i] * cps[i].speed * th * sh;
            d = std::min({d, (x - cps[i].pos).norm(), (x - strs[i].vertices.back()).norm()});
        }
        if (d < opt_.far_ratio * len && depth < opt_.max_depth)
            return refine(x, kernel, k, sa, sm, depth + 1) + refine(x, kernel, k, sm, sb, depth + 1);
        Vec2 acc = Vec2::Zero();
        const std::size_t first = static_cast<std::size_t>(k) * p_.order;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = sm + sh * q_.nodes[i];
            const double w = q_.weights[i] * cps[i].speed * th * sh;
            acc += w * (kernel(x, strs[i]) * interp_density(rho_, first, q_.nodes, bw_, s));
        }
        return acc;
    }

    const Vector& rho_;
    const Panelization& p_;
    const StringRule& rule_;
    const std::vector<StringSpec>& strings_;
    NearQuadOptions opt_;
    const QuadratureRule& q_;
    std::vector<double> bw_;
};

}  // namespace

DenseSystem assemble(const Panelization& p, const std::vector<StringSpec>& strings) {
    const auto rep = validate_strings(p, strings, 16);
    if (!rep.ok())
        throw StringValidationError("assemble: " + std::to_string(rep.violations.size()) +
                                    " strings re-enter the domain (first at node " +
                                    std::to_string(rep.violations.front()) + ")");
    const std::size_t n = p.size();
    DenseSystem s;
    s.A.resize(2 * n, 2 * n);
    s.weights = p.w;
    parallel_for(static_cast<int>(n), [&](int ii) {
        const std::size_t i = ii;
        for (std::size_t j = 0; j < n; ++j) {
            Mat2 b = p.w[j] * sigma_string2d(p.pos[i], p.normal[i], p.kappa[i], strings[j]);
            if (i == j) b += Mat2::Identity();
            s.A.block<2, 2>(2 * i, 2 * j) = b;
        }
    });
    return s;
}

Eigen::MatrixXd rigid_basis(const Panelization& p) {
    const std::size_t n = p.size();
    const Vec2 xc = p.centroid();
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(2 * n, 3);
    Vector wv(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        psi(2 * i, 0) = 1.0;
        psi(2 * i + 1, 1) = 1.0;
        const Vec2 r = perp(p.pos[i] - xc);
        psi(2 * i, 2) = r.x();
        psi(2 * i + 1, 2) = r.y();
        wv(2 * i) = wv(2 * i + 1) = p.w[i];
    }
    auto ip = [&](const Vector& a, const Vector& b) { return (a.array() * wv.array() * b.array()).sum(); };
    for (int k = 0; k < 3; ++k) {
        Vector c = psi.col(k);
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j < k; ++j) c -= ip(psi.col(j), c) * psi.col(j);
        psi.col(k) = c / std::sqrt(ip(c, c));
    }
    return psi;
}

DenseSystem deflate(DenseSystem s, const Panelization& p) {
    if (s.deflated) return s;
    if (s.scaled) throw NumericsError("deflate: apply before l2_scale");
    s.psi = rigid_basis(p);
    Eigen::MatrixXd psiW = s.psi.transpose();  // 3 x 2N
    for (std::size_t i = 0; i < p.size(); ++i) {
        psiW.col(2 * i) *= p.w[i];
        psiW.col(2 * i + 1) *= p.w[i];
    }
    s.A.noalias() += s.psi * psiW;
    s.deflated = true;
    return s;
}

DenseSystem l2_scale(DenseSystem s) {
    if (s.scaled) return s;
    const Eigen::Index m = s.A.rows();
    Vector d(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double w = s.weights[i / 2];
        if (!(w > 0.0)) throw NumericsError("l2_scale: weights must be positive");
        d(i) = std::sqrt(w);
    }
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) s.A(i, j) *= d(i) / d(j);
    s.scaled = true;
    return s;
}

Vec2 Manufactured::exact(const Vec2& x) const {
    Vec2 u = Vec2::Zero();
    for (const auto& src : sources) u += kelvin2d(x, src.y, params) * src.strength;
    return u;
}

Manufactured manufacture(const Panelization& p, const std::vector<PointSource>& sources, const ElasticParams& params) {
    for (const auto& src : sources)
        if (inside_polygon(p.pos, src.y)) throw GeometryError("manufacture: source inside the domain");
    Manufactured m;
    m.sources = sources;
    m.params = params;
    m.f = Vector::Zero(2 * p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        Vec2 t = Vec2::Zero();
        for (const auto& src : sources) t += kelvin2d_traction(p.pos[i], p.normal[i], src.y, params) * src.strength;
        m.f(2 * i) = t.x();
        m.f(2 * i + 1) = t.y();
    }
    return m;
}

std::vector<PointSource> sources_on_scaled_curve(const Curve& c, int count, double radius_factor, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(-0.5, 0.5);
    std::vector<PointSource> out;
    for (int j = 0; j < count; ++j) {
        const double t = 2.0 * std::numbers::pi * j / count;
        PointSource s;
        s.y = radius_factor * c.eval(t).pos;
        s.strength.x() = ud(rng);
        s.strength.y() = ud(rng);
        out.push_back(s);
    }
    return out;
}

std::vector<PointSource> sources_in_annulus(int count, double r_lo, double r_hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, 2.0 * std::numbers::pi), ur(r_lo, r_hi), ud(-0.5, 0.5);
    std::vector<PointSource> out;
    for (int j = 0; j < count; ++j) {
        const double t = ut(rng), r = ur(rng);
        PointSource s;
        s.y = Vec2(r * std::cos(t), r * std::sin(t));
        s.strength.x() = ud(rng);
        s.strength.y() = ud(rng);
        out.push_back(s);
    }
    return out;
}

Compatibility compatibility(const Panelization& p, const Vector& f) {
    const Vec2 xc = p.centroid();
    Vec2 force = Vec2::Zero();
    double torque = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2 fi(f(2 * i), f(2 * i + 1));
        force += p.w[i] * fi;
        torque += p.w[i] * perp(p.pos[i] - xc).dot(fi);
        scale += p.w[i] * fi.norm();
    }
    return {force.norm(), std::abs(torque), scale};
}

SolveResult solve(const DenseSystem& s, const Panelization& p, const Vector& f, double tol, int max_iter,
                  double compat_tol) {
    if (f.size() != s.A.rows()) throw NumericsError("solve: dimension mismatch");
    const auto c = compatibility(p, f);
    double radius = 0.0;
    const Vec2 xc = p.centroid();
    for (const auto& x : p.pos) radius = std::max(radius, (x - xc).norm());
    if (c.net_force > compat_tol * c.scale || c.net_torque > compat_tol * c.scale * radius)
        throw IncompatibleDataError("solve: traction data has nonzero net force or torque");
    Vector rhs = f;
    Vector d;
    if (s.scaled) {
        d.resize(f.size());
        for (Eigen::Index i = 0; i < f.size(); ++i) d(i) = std::sqrt(s.weights[i / 2]);
        rhs = (d.array() * f.array()).matrix();
    }
    const LinearOperator op = [&](const Vector& x, Vector& y) { matvec(s.A, x, y); };
    const auto g = gmres(op, rhs, tol, max_iter);
    SolveResult r;
    r.rho = s.scaled ? Vector((g.x.array() / d.array()).matrix()) : g.x;
    r.iters = g.iters;
    r.residual = g.residual;
    r.status = g.status;
    return r;
}

std::vector<Vec2> eval_displacement(const Vector& rho, const Panelization& p, const StringRule& rule,
                                    const ElasticParams& params, const std::vector<Vec2>& targets,
                                    NearQuadOptions opt) {
    if (rho.size() != static_cast<Eigen::Index>(2 * p.size())) throw NumericsError("eval_displacement: size mismatch");
    for (const auto& x : targets)
        if (point_in_domain(p, x) != Location::inside)
            throw GeometryError("eval_displacement: target outside the domain or inside the near-boundary margin");
    const auto strings = make_strings(p, rule);
    const PanelIntegrator integ(rho, p, rule, strings, opt);
    std::vector<Vec2> out(targets.size());
    parallel_for(static_cast<int>(targets.size()), [&](int i) {
        out[i] = integ.integrate(targets[i], [&](const Vec2& x, const StringSpec& s) { return string_kernel2d(x, s, params); });
    });
    return out;
}

Vec2 offsurface_traction(const Vector& rho, const Panelization& p, const StringRule& rule, std::size_t node,
                         double delta, NearQuadOptions opt) {
    if (node >= p.size()) throw NumericsError("offsurface_traction: node out of range");
    const int k = p.panel[node];
    double panel_len = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (p.panel[j] == k) panel_len += p.w[j];
    if (!(delta >= 1e-8) || !(delta < panel_len)) throw NumericsError("offsurface_traction: delta out of range");
    const auto strings = make_strings(p, rule);
    const PanelIntegrator integ(rho, p, rule, strings, opt);
    const Vec2 n = p.normal[node];
    const Vec2 z = p.pos[node] - delta * n;
    return integ.integrate(z, [&](const Vec2& x, const StringSpec& s) { return string_traction2d(x, n, s); });
}

double RigidFit::max_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, r);
    return m;
}

RigidFit rigid_body_fit(const std::vector<Vec2>& u_exact, const std::vector<Vec2>& u, const std::vector<Vec2>& targets,
                        const Vec2& x_c) {
    const std::size_t m = targets.size();
    if (m < 3 || u_exact.size() != m || u.size() != m) throw NumericsError("rigid_body_fit: need >= 3 matching targets");
    DenseMatrix A(2 * m, 3);
    Vector b(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 r = perp(targets[i] - x_c);
        A.row(2 * i) << 1.0, 0.0, r.x();
        A.row(2 * i + 1) << 0.0, 1.0, r.y();
        const Vec2 e = u_exact[i] - u[i];
        b(2 * i) = e.x();
        b(2 * i + 1) = e.y();
    }
    Vector c;
    try {
        c = lstsq(A, b);
    } catch (const NumericsError&) {
        throw NumericsError("rigid_body_fit: degenerate target set");
    }
    RigidFit fit;
    fit.v0 = Vec2(c(0), c(1));
    fit.omega = c(2);
    double scale = 0.0;
    for (const auto& v : u_exact) scale = std::max(scale, v.norm());
    if (!(scale > 0.0)) scale = 1.0;
    fit.residuals.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 e = u_exact[i] - u[i] - fit.v0 - fit.omega * perp(targets[i] - x_c);
        fit.residuals[i] = e.norm() / scale;
    }
    return fit;
}

std::vector<Vec2> interior_grid(const Panelization& p, int min_count) {
    Vec2 lo = p.pos.front(), hi = p.pos.front();
    for (const auto& x : p.pos) {
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
    }
    for (int n = 16; n <= 4096; n *= 2) {
        std::vector<Vec2> pts;
        const double dx = (hi.x() - lo.x()) / n, dy = (hi.y() - lo.y()) / n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Vec2 x(lo.x() + (i + 0.5) * dx, lo.y() + (j + 0.5) * dy);
                if (point_in_domain(p, x) == Location::inside) pts.push_back(x);
            }
        if (static_cast<int>(pts.size()) >= min_count) return pts;
    }
    throw GeometryError("interior_grid: could not place enough targets");
}

}  // namespace stringkern
