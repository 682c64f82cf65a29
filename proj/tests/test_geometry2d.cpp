#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stringkern/geometry2d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

using namespace stringkern;

namespace {

constexpr double kPi = std::numbers::pi;

// Adaptive Simpson, independent of the panel machinery.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 50);
}

double star_speed(double t) {
    // gamma = r(t)(cos t, sin t), r = 1 + 0.3 cos 5t
    const double r = 1 + 0.3 * std::cos(5 * t), dr = -1.5 * std::sin(5 * t);
    return std::sqrt(r * r + dr * dr);
}

double max_panel_length(const Panelization& p) {
    double m = 0.0;
    for (int k = 0; k < p.n_panels; ++k) {
        double len = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p.panel[i] == k) len += p.w[i];
        m = std::max(m, len);
    }
    return m;
}

double signed_area(const Panelization& p) {
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) a += 0.5 * p.w[i] * p.pos[i].dot(p.normal[i]);
    return a;
}

}  // namespace

TEST_CASE("eval_curve on the unit circle and the star") {
    const auto c = Curve::circle(1.0).eval(0.0);
    CHECK((c.pos - Vec2(1, 0)).norm() <= 1e-15);
    CHECK((c.normal - Vec2(1, 0)).norm() <= 1e-15);
    CHECK(c.curvature == doctest::Approx(1.0));

    const auto s = Curve::star().eval(0.0);
    CHECK((s.pos - Vec2(1.3, 0)).norm() <= 1e-15);
}

TEST_CASE("zero Fourier perturbation is the unit circle") {
    const Curve c = Curve::fourier(1.0, std::vector<double>(25, 0.0), std::vector<double>(25, 0.0));
    for (double t = 0.0; t < 2 * kPi; t += 0.1) {
        const auto p = c.eval(t);
        CHECK(std::abs(p.pos.norm() - 1.0) <= 1e-15);
        CHECK(p.curvature == doctest::Approx(1.0));
    }
}

TEST_CASE("curve derivatives match finite differences") {
    for (const Curve& c : {Curve::star(), Curve::cavity(), Curve::random_star(3)}) {
        for (double t : {0.3, 1.7, 4.0}) {
            const double e = 1e-6;
            const auto p = c.eval(t), pp = c.eval(t + e), pm = c.eval(t - e);
            CHECK((p.d1 - (pp.pos - pm.pos) / (2 * e)).norm() <= 1e-6 * p.d1.norm());
            CHECK((p.d2 - (pp.d1 - pm.d1) / (2 * e)).norm() <= 1e-6 * std::max(1.0, p.d2.norm()));
            // normal = tangent rotated by -pi/2
            CHECK((p.normal - Vec2(p.tangent.y(), -p.tangent.x())).norm() <= 1e-15);
        }
    }
}

TEST_CASE("random_star is reproducible and valid") {
    const Curve a = Curve::random_star(42), b = Curve::random_star(42), c = Curve::random_star(43);
    CHECK((a.eval(1.0).pos - b.eval(1.0).pos).norm() == 0.0);
    CHECK((a.eval(1.0).pos - c.eval(1.0).pos).norm() > 0.0);
    for (double t = 0.0; t < 2 * kPi; t += 0.01) CHECK(a.eval(t).pos.norm() > 0.05);
}

TEST_CASE("invalid curves are rejected") {
    CHECK_THROWS_AS(Curve::circle(-1.0), GeometryError);
    CHECK_THROWS_AS(Curve::fourier(0.5, {1.0}, {0.0}), GeometryError);  // radius goes negative
}

TEST_CASE("build_panels on the circle") {
    for (int n : {4, 8, 17}) {
        const auto p = build_panels(Curve::circle(1.0), n, 16);
        CHECK(p.size() == static_cast<std::size_t>(16 * n));
        CHECK(std::abs(p.perimeter() - 2 * kPi) <= 1e-12);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p.kappa[i] - 1.0) <= 1e-12);
    }
    const auto p3 = build_panels(Curve::circle(3.0), 8, 16);
    for (double k : p3.kappa) CHECK(std::abs(k - 1.0 / 3.0) <= 1e-12);
}

TEST_CASE("build_panels argument checks") {
    CHECK_THROWS_AS(build_panels(Curve::star(), 3, 16), GeometryError);
    CHECK_THROWS_AS(build_panels(Curve::star(), 10, 3), GeometryError);
    CHECK_THROWS_AS(build_panels(Curve::star(), 10, 33), GeometryError);
}

TEST_CASE("doubling panels halves the max panel length") {
    const Curve c = Curve::star();
    const double l1 = max_panel_length(build_panels(c, 30, 16));
    const double l2 = max_panel_length(build_panels(c, 60, 16));
    CHECK(l2 / l1 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("star perimeter against adaptive arclength") {
    const double oracle = adaptive(star_speed, 0.0, 2 * kPi, 1e-14);
    const auto p = build_panels(Curve::star(), 60, 16);
    CHECK(std::abs(p.perimeter() - oracle) <= 1e-10 * oracle);
}

TEST_CASE("closed-curve identities for every kind") {
    for (const Curve& c : {Curve::circle(2.0), Curve::star(), Curve::cavity(), Curve::random_star(7),
                           Curve::fourier(1.0, {0.1, 0.05}, {0.0, 0.08})}) {
        const int n = c.kind() == "cavity" || c.kind() == "random_star" ? 128 : 40;
        const auto p = build_panels(c, n, 16);
        Vec2 s = Vec2::Zero();
        for (std::size_t i = 0; i < p.size(); ++i) {
            s += p.w[i] * p.normal[i];
            CHECK(std::abs(p.normal[i].norm() - 1.0) <= 1e-14);
        }
        CHECK(s.norm() <= 1e-10 * p.perimeter());
        CHECK(signed_area(p) > 0.0);
        // Outward: a point just outside along the normal is outside the polygon.
        for (std::size_t i = 0; i < p.size(); i += 37) {
            const double eps = 1e-3 * p.local_spacing(i);
            CHECK_FALSE(inside_polygon(p.pos, p.pos[i] + eps * p.normal[i] + 1e-9 * p.tangent[i]));
        }
    }
}

TEST_CASE("signed area converges under refinement") {
    const double a1 = signed_area(build_panels(Curve::star(), 10, 8));
    const double a2 = signed_area(build_panels(Curve::star(), 20, 8));
    const double a3 = signed_area(build_panels(Curve::star(), 40, 8));
    // Exact area of r = 1 + 0.3 cos 5t: pi (1 + 0.3^2 / 2).
    const double exact = kPi * (1 + 0.045);
    CHECK(std::abs(a3 - exact) <= 1e-12);
    CHECK(std::abs(a2 - exact) <= std::abs(a1 - exact));
}

TEST_CASE("point_in_domain classification") {
    const auto p = build_panels(Curve::star(), 60, 16);
    CHECK(point_in_domain(p, Vec2(0, 0)) == Location::inside);
    CHECK(point_in_domain(p, Vec2(5, 5)) == Location::outside);
    CHECK(point_in_domain(p, p.pos[17]) == Location::near_boundary);
    CHECK(point_in_domain(p, p.pos[17] - 0.5 * p.local_spacing(17) * p.normal[17]) == Location::near_boundary);
}

TEST_CASE("string construction") {
    const auto p = build_panels(Curve::circle(1.0), 8, 16);
    const auto normal = make_strings(p, StringRule::normal_rule(0.1));
    const auto radial = make_strings(p, StringRule::radial_rule(0.1));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double t = p.t[i];
        CHECK((normal[i].vertices.back() - 1.1 * Vec2(std::cos(t), std::sin(t))).norm() <= 1e-14);
        CHECK((normal[i].vertices.back() - radial[i].vertices.back()).norm() <= 1e-14);
        CHECK(normal[i].vertices.front() == p.pos[i]);
        CHECK(normal[i].length == doctest::Approx(0.1));
    }

    const auto poly = make_strings(p, StringRule::polyline_to(Vec2(3, 0), 0.2));
    REQUIRE(poly[0].vertices.size() == 3);
    CHECK((poly[0].vertices[1] - (p.pos[0] + 0.2 * p.normal[0])).norm() <= 1e-15);
    CHECK((poly[0].vertices[2] - Vec2(3, 0)).norm() == 0.0);

    CHECK_THROWS_AS(make_string(StringRule::radial_rule(0.1), Vec2(0, 0), Vec2(1, 0)), GeometryError);
    CHECK_THROWS_AS(make_string(StringRule::normal_rule(-1.0), Vec2(1, 0), Vec2(1, 0)), GeometryError);
}

TEST_CASE("validate_strings") {
    const auto star = build_panels(Curve::star(), 60, 16);
    CHECK(validate_strings(star, make_strings(star, StringRule::normal_rule(0.1))).ok());

    const auto radial = make_strings(star, StringRule::radial_rule(1.5));
    CHECK(validate_strings(star, radial).ok());
    for (const auto& s : radial) CHECK(point_in_domain(star, s.vertices.back()) == Location::outside);

    const auto circle = build_panels(Curve::circle(1.0), 16, 16);
    for (double h : {0.01, 1.0, 50.0}) CHECK(validate_strings(circle, make_strings(circle, StringRule::normal_rule(h))).ok());

    const auto cavity = build_panels(Curve::cavity(), 128, 16);
    CHECK(validate_strings(cavity, make_strings(cavity, StringRule::normal_rule(0.1))).ok());
    const auto bad = validate_strings(cavity, make_strings(cavity, StringRule::normal_rule(5.0)));
    CHECK_FALSE(bad.ok());
    CHECK(bad.violations.size() > 0);

    CHECK_THROWS(validate_strings(star, make_strings(star, StringRule::normal_rule(0.1)), 4));
}

TEST_CASE("geometry CSV export") {
    const auto p = build_panels(Curve::circle(1.0), 4, 4);
    const auto csv = export_geometry_csv(p, make_strings(p, StringRule::normal_rule(0.1)));
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == 1 + 16);
    CHECK(csv.rfind("x,y,nx,ny,kappa,w", 0) == 0);
}
