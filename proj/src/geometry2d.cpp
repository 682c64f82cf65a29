#include "stringkern/geometry2d.hpp"

#include "stringkern/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace stringkern {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CurvePoint finish(const Vec2& p, const Vec2& d1, const Vec2& d2) {
    CurvePoint c;
    c.pos = p;
    c.d1 = d1;
    c.d2 = d2;
    c.speed = d1.norm();
    c.tangent = d1 / c.speed;
    c.normal = Vec2(c.tangent.y(), -c.tangent.x());
    c.curvature = (d1.x() * d2.y() - d1.y() * d2.x()) / (c.speed * c.speed * c.speed);
    return c;
}

struct RadialValue {
    double r, dr, ddr;
};

RadialValue radial(const RadialFourierShape& s, double t) {
    RadialValue v{s.base, 0.0, 0.0};
    for (std::size_t k = 0; k < s.a.size(); ++k) {
        const double i = static_cast<double>(k + 1);
        const double c = std::cos(i * t), sn = std::sin(i * t);
        const double a = s.a[k], b = k < s.b.size() ? s.b[k] : 0.0;
        v.r += a * c + b * sn;
        v.dr += i * (-a * sn + b * c);
        v.ddr += -i * i * (a * c + b * sn);
    }
    return v;
}

bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    };
    const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

int sample_count(std::size_t modes) { return static_cast<int>(std::max<std::size_t>(1024, 64 * modes)); }

}  // namespace

Curve::Curve(std::string kind, Shape shape) : kind_(std::move(kind)), shape_(std::move(shape)) {}

Curve Curve::circle(double radius) {
    if (!(radius > 0.0)) throw GeometryError("circle: radius must be positive");
    Curve c("circle", CircleShape{radius});
    c.validate();
    return c;
}

Curve Curve::star() {
    RadialFourierShape s;
    s.base = 1.0;
    s.a.assign(5, 0.0);
    s.b.assign(5, 0.0);
    s.a[4] = 0.3;
    Curve c("star", s);
    c.validate();
    return c;
}

Curve Curve::fourier(double base, std::vector<double> a, std::vector<double> b) {
    b.resize(a.size(), 0.0);
    a.resize(b.size(), 0.0);
    Curve c("fourier", RadialFourierShape{base, std::move(a), std::move(b)});
    c.validate();
    return c;
}

Curve Curve::cavity(double a, double b, double zeta) {
    if (!(a > 0 && b > 0 && zeta > 0 && a < 20.0)) throw GeometryError("cavity: invalid parameters");
    // max over c = cos t of |z|^2 = (20 + a c)^2 + b^2 (1 - c^2)
    auto mod2 = [&](double c) { return (20.0 + a * c) * (20.0 + a * c) + b * b * (1.0 - c * c); };
    double best = std::max(mod2(-1.0), mod2(1.0));
    if (b * b != a * a) {
        const double cs = 20.0 * a / (b * b - a * a);
        if (cs > -1.0 && cs < 1.0) best = std::max(best, mod2(cs));
    }
    CavityShape s{a, b, zeta, std::pow(best, zeta)};  // (|z|^2)^zeta = |z|^{2 zeta}
    Curve c("cavity", s);
    c.validate();
    return c;
}

Curve Curve::random_star(std::uint64_t seed, int m, double amplitude) {
    if (m < 1) throw GeometryError("random_star: m must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double scale = amplitude / m;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        RadialFourierShape s;
        s.base = 1.0;
        s.a.resize(m);
        s.b.resize(m);
        for (int i = 0; i < m; ++i) {
            s.a[i] = scale * nd(rng);
            s.b[i] = scale * nd(rng);
        }
        const int ns = sample_count(m);
        bool ok = true;
        for (int j = 0; j < ns && ok; ++j) ok = radial(s, kTwoPi * j / ns).r > 0.05;
        if (!ok) continue;
        Curve c("random_star", s);
        try {
            c.validate();
        } catch (const GeometryError&) {
            continue;
        }
        return c;
    }
    throw GeometryError("random_star: no valid draw found");
}

CurvePoint Curve::eval(double t) const {
    return std::visit(
        [t](const auto& s) -> CurvePoint {
            using S = std::decay_t<decltype(s)>;
            const double c = std::cos(t), sn = std::sin(t);
            if constexpr (std::is_same_v<S, CircleShape>) {
                return finish(s.radius * Vec2(c, sn), s.radius * Vec2(-sn, c), -s.radius * Vec2(c, sn));
            } else if constexpr (std::is_same_v<S, RadialFourierShape>) {
                const auto v = radial(s, t);
                const Vec2 e(c, sn), ep(-sn, c);
                return finish(v.r * e, v.dr * e + v.r * ep, v.ddr * e + 2.0 * v.dr * ep - v.r * e);
            } else {
                using cd = std::complex<double>;
                const double p = 2.0 * s.zeta;
                const cd z(20.0 + s.a * c, s.b * sn);
                const cd z1(-s.a * sn, s.b * c);
                const cd z2(-s.a * c, -s.b * sn);
                const cd zp = std::pow(z, p);
                const cd w = zp / s.scale;
                const cd w1 = p * zp / z * z1 / s.scale;
                const cd w2 = p * ((p - 1.0) * zp / (z * z) * z1 * z1 + zp / z * z2) / s.scale;
                return finish(Vec2(w.real(), w.imag()), Vec2(w1.real(), w1.imag()), Vec2(w2.real(), w2.imag()));
            }
        },
        shape_);
}

double Curve::max_radius() const {
    std::size_t modes = 1;
    if (auto* s = std::get_if<RadialFourierShape>(&shape_)) modes = s->a.size();
    const int ns = sample_count(modes);
    double r = 0.0;
    for (int j = 0; j < ns; ++j) r = std::max(r, eval(kTwoPi * j / ns).pos.norm());
    return r;
}

void Curve::validate() const {
    std::size_t modes = 1;
    if (auto* s = std::get_if<RadialFourierShape>(&shape_)) modes = s->a.size();
    const int ns = sample_count(modes);
    std::vector<Vec2> pts(ns);
    double area = 0.0;
    for (int j = 0; j < ns; ++j) {
        const auto cp = eval(kTwoPi * j / ns);
        if (!cp.pos.allFinite() || !(cp.speed > 0.0) || !std::isfinite(cp.curvature))
            throw GeometryError("curve: degenerate parametrization");
        pts[j] = cp.pos;
    }
    for (int j = 0; j < ns; ++j) {
        const Vec2& p = pts[j];
        const Vec2& q = pts[(j + 1) % ns];
        area += 0.5 * (p.x() * q.y() - p.y() * q.x());
    }
    if (!(area > 0.0)) throw GeometryError("curve: not positively oriented");
    for (int i = 0; i < ns; ++i) {
        const Vec2 &a = pts[i], &b = pts[(i + 1) % ns];
        for (int j = i + 2; j < ns; ++j) {
            if (i == 0 && j == ns - 1) continue;
            if (segments_cross(a, b, pts[j], pts[(j + 1) % ns])) throw GeometryError("curve: self-intersection");
        }
    }
}

double Panelization::perimeter() const {
    double s = 0.0;
    for (double wi : w) s += wi;
    return s;
}

Vec2 Panelization::centroid() const {
    Vec2 c = Vec2::Zero();
    for (std::size_t i = 0; i < size(); ++i) c += w[i] * pos[i];
    return c / perimeter();
}

std::pair<double, double> Panelization::panel_range(int p) const {
    return {kTwoPi * p / n_panels, kTwoPi * (p + 1) / n_panels};
}

double Panelization::local_spacing(std::size_t i) const {
    const std::size_t n = size();
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    return std::max((pos[ip] - pos[i]).norm(), (pos[i] - pos[im]).norm());
}

Panelization build_panels(const Curve& curve, int n_panels, int order) {
    if (n_panels < 4) throw GeometryError("build_panels: n_panels must be >= 4");
    if (order < 4 || order > 32) throw GeometryError("build_panels: order must be in [4, 32]");
    const auto& q = gauss_legendre_cached(order);
    Panelization p;
    p.curve = curve;
    p.n_panels = n_panels;
    p.order = order;
    const std::size_t n = static_cast<std::size_t>(n_panels) * order;
    p.pos.reserve(n);
    for (int k = 0; k < n_panels; ++k) {
        const auto [t0, t1] = p.panel_range(k);
        const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
        for (int i = 0; i < order; ++i) {
            const double t = mid + half * q.nodes[i];
            const auto cp = curve.eval(t);
            p.pos.push_back(cp.pos);
            p.tangent.push_back(cp.tangent);
            p.normal.push_back(cp.normal);
            p.kappa.push_back(cp.curvature);
            p.speed.push_back(cp.speed);
            p.w.push_back(q.weights[i] * cp.speed * half);
            p.t.push_back(t);
            p.panel.push_back(k);
        }
    }
    return p;
}

bool inside_polygon(const std::vector<Vec2>& poly, const Vec2& x) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 &a = poly[i], &b = poly[j];
        if ((a.y() > x.y()) != (b.y() > x.y())) {
            const double xc = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (x.x() < xc) inside = !inside;
        }
    }
    return inside;
}

Location point_in_domain(const Panelization& p, const Vec2& x) {
    double dmin = std::numeric_limits<double>::infinity();
    std::size_t imin = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = (p.pos[i] - x).norm();
        if (d < dmin) {
            dmin = d;
            imin = i;
        }
    }
    if (dmin < 2.0 * p.local_spacing(imin)) return Location::near_boundary;
    return inside_polygon(p.pos, x) ? Location::inside : Location::outside;
}

StringSpec make_string(const StringRule& rule, const Vec2& base, const Vec2& n) {
    if (!(rule.h > 0.0)) throw GeometryError("make_string: h must be positive");
    StringSpec s;
    s.mode = rule.mode;
    s.vertices.push_back(base);
    switch (rule.mode) {
        case StringMode::normal:
            s.vertices.push_back(base + rule.h * n);
            break;
        case StringMode::radial: {
            const double r = base.norm();
            if (!(r > 1e-14)) throw GeometryError("make_string: zero radial direction");
            s.vertices.push_back(base + rule.h * base / r);
            break;
        }
        case StringMode::polyline:
            s.vertices.push_back(base + rule.h * n);
            for (const auto& v : rule.waypoints) s.vertices.push_back(v);
            break;
    }
    for (std::size_t i = 1; i < s.vertices.size(); ++i) {
        const double l = (s.vertices[i] - s.vertices[i - 1]).norm();
        if (!(l > 0.0)) throw GeometryError("make_string: repeated vertex");
        s.length += l;
    }
    return s;
}

std::vector<StringSpec> make_strings(const Panelization& p, const StringRule& rule) {
    std::vector<StringSpec> out;
    out.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out.push_back(make_string(rule, p.pos[i], p.normal[i]));
    return out;
}

StringReport validate_strings(const Panelization& p, const std::vector<StringSpec>& strings, int samples_per_segment) {
    if (samples_per_segment < 8) throw GeometryError("validate_strings: samples_per_segment must be >= 8");
    if (strings.size() != p.size()) throw GeometryError("validate_strings: one string per node required");
    StringReport rep;
    rep.min_clearance = std::numeric_limits<double>::infinity();
    const std::size_t n = p.size();
    std::vector<char> bad(n, 0);
    parallel_for(static_cast<int>(n), [&](int i) {
        const auto& s = strings[i];
        bool violated = s.vertices.size() < 2 || (s.vertices[0] - p.pos[i]).norm() > 0.0;
        for (std::size_t k = 0; k + 1 < s.vertices.size() && !violated; ++k) {
            const Vec2 a = s.vertices[k], b = s.vertices[k + 1];
            for (int j = 1; j <= samples_per_segment && !violated; ++j) {
                const Vec2 x = a + (b - a) * (static_cast<double>(j) / samples_per_segment);
                if (inside_polygon(p.pos, x)) violated = true;
            }
            // Exact crossings with polygon edges not incident to the base node.
            for (std::size_t e = 0; e < n && !violated; ++e) {
                const std::size_t f = (e + 1) % n;
                if (k == 0 && (e == static_cast<std::size_t>(i) || f == static_cast<std::size_t>(i))) continue;
                if (segments_cross(a, b, p.pos[e], p.pos[f])) violated = true;
            }
        }
        bad[i] = violated;
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (bad[i]) rep.violations.push_back(static_cast<int>(i));
        const auto& s = strings[i];
        for (std::size_t k = 0; k + 1 < s.vertices.size(); ++k) {
            const Vec2 a = s.vertices[k], b = s.vertices[k + 1];
            for (int j = 1; j <= samples_per_segment; ++j) {
                const Vec2 x = a + (b - a) * (static_cast<double>(j) / samples_per_segment);
                for (std::size_t m = 0; m < n; ++m) rep.min_clearance = std::min(rep.min_clearance, (p.pos[m] - x).norm());
            }
        }
    }
    return rep;
}

std::string export_geometry_csv(const Panelization& p, const std::vector<StringSpec>& strings) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "x,y,nx,ny,kappa,w,string\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        os << p.pos[i].x() << ',' << p.pos[i].y() << ',' << p.normal[i].x() << ',' << p.normal[i].y() << ','
           << p.kappa[i] << ',' << p.w[i] << ',';
        if (i < strings.size()) {
            bool first = true;
            for (const auto& v : strings[i].vertices) {
                os << (first ? "" : " ") << v.x() << ' ' << v.y();
                first = false;
            }
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace stringkern
