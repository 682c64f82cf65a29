#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace stringkern {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CurvePoint {
    Vec2 pos;
    Vec2 d1;       // gamma'(t)
    Vec2 d2;       // gamma''(t)
    Vec2 tangent;  // unit
    Vec2 normal;   // unit, tangent rotated by -pi/2 (outward for positive orientation)
    double speed = 0.0;
    double curvature = 0.0;
};

struct CircleShape {
    double radius = 1.0;
};

// Radius function r(t) = base + sum_i a_i cos(i t) + b_i sin(i t), i = 1..m.
struct RadialFourierShape {
    double base = 1.0;
    std::vector<double> a, b;
};

// gamma = z^{2 zeta} / max|z|^{2 zeta}, z(t) = 20 + a cos t + i b sin t.
struct CavityShape {
    double a = 0.397, b = 8.02, zeta = 3.965;
    double scale = 1.0;  // max_t |z|^{2 zeta}
};

/// Smooth, simple, positively oriented, 2*pi-periodic closed curve.
class Curve {
public:
    static Curve circle(double radius);
    static Curve star();  // (1 + 0.3 cos 5t)(cos t, sin t)
    static Curve fourier(double base, std::vector<double> a, std::vector<double> b);
    static Curve cavity(double a = 0.397, double b = 8.02, double zeta = 3.965);
    /// Radius 1 + (amplitude/m) sum_{i<=m} (a_i cos it + b_i sin it) with standard
    /// Gaussian a_i, b_i; coefficient sets failing validation are redrawn.
    static Curve random_star(std::uint64_t seed, int m = 25, double amplitude = 1.5);

    CurvePoint eval(double t) const;
    const std::string& kind() const { return kind_; }
    /// Largest |gamma(t)| over a dense sample.
    double max_radius() const;

private:
    using Shape = std::variant<CircleShape, RadialFourierShape, CavityShape>;
    Curve(std::string kind, Shape shape);
    void validate() const;
    std::string kind_;
    Shape shape_;
};

/// eval_curve as a free function.
inline CurvePoint eval_curve(const Curve& c, double t) { return c.eval(t); }

struct Panelization {
    Curve curve = Curve::circle(1.0);
    int n_panels = 0;
    int order = 0;
    std::vector<Vec2> pos, tangent, normal;
    std::vector<double> kappa, w, t, speed;
    std::vector<int> panel;

    std::size_t size() const { return pos.size(); }
    double perimeter() const;
    /// Weight-normalized boundary average.
    Vec2 centroid() const;
    /// Parameter interval [t0, t1] of panel p.
    std::pair<double, double> panel_range(int p) const;
    /// Largest and local (neighbor) node spacing.
    double local_spacing(std::size_t i) const;
};

Panelization build_panels(const Curve& curve, int n_panels, int order);

enum class Location { inside, outside, near_boundary };

/// Crossing-number test against the node polygon; near_boundary when the
/// nearest node is closer than twice its local node spacing.
Location point_in_domain(const Panelization& p, const Vec2& x);

/// Pure inside test against the node polygon (no margin).
bool inside_polygon(const std::vector<Vec2>& poly, const Vec2& x);

enum class StringMode { normal, radial, polyline };

struct StringRule {
    StringMode mode = StringMode::normal;
    double h = 0.1;
    /// polyline: vertices after node + h*normal (default shape: {y*}).
    std::vector<Vec2> waypoints;

    static StringRule normal_rule(double h) { return {StringMode::normal, h, {}}; }
    static StringRule radial_rule(double h) { return {StringMode::radial, h, {}}; }
    static StringRule polyline_to(const Vec2& ystar, double h) { return {StringMode::polyline, h, {ystar}}; }
};

struct StringSpec {
    std::vector<Vec2> vertices;  // p0 = boundary node
    StringMode mode = StringMode::normal;
    double length = 0.0;
};

/// String based at a boundary point with outward normal n.
StringSpec make_string(const StringRule& rule, const Vec2& base, const Vec2& n);
std::vector<StringSpec> make_strings(const Panelization& p, const StringRule& rule);

struct StringReport {
    std::vector<int> violations;   // node indices
    double min_clearance = 0.0;    // min distance from sampled string points (excluding p0) to the node set
    bool ok() const { return violations.empty(); }
};

StringReport validate_strings(const Panelization& p, const std::vector<StringSpec>& strings, int samples_per_segment = 16);

/// CSV debug export: x, y, nx, ny, kappa, w, then flattened string vertices.
std::string export_geometry_csv(const Panelization& p, const std::vector<StringSpec>& strings);

}  // namespace stringkern
