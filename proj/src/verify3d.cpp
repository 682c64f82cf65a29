#include "stringkern/verify3d.hpp"

#include "stringkern/numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

namespace stringkern {

namespace {

using Hessian = std::array<std::array<Mat3, 3>, 3>;  // d_i d_j field

void check_step(const Vec3& x, double step) {
    if (!(step > 1e-10 * std::max(1.0, x.norm())) || !std::isfinite(step))
        throw NumericsError("verify3d: finite-difference step underflow");
}

Hessian fd_hessian(const MatrixField3& f, const Vec3& x, double s) {
    check_step(x, s);
    const Mat3 I = Mat3::Identity();
    const Mat3 f0 = f(x);
    Hessian H;
    for (int i = 0; i < 3; ++i) {
        const Vec3 ei = s * I.col(i);
        H[i][i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (s * s);
        for (int j = 0; j < i; ++j) {
            const Vec3 ej = s * I.col(j);
            H[i][j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * s * s);
            H[j][i] = H[i][j];
        }
    }
    return H;
}

Mat3 residual_from(const Hessian& H, const ElasticParams& p) {
    const double lam = p.lambda(), mu = p.mu();
    Mat3 res = Mat3::Zero();
    for (int k = 0; k < 3; ++k)
        for (int m = 0; m < 3; ++m) {
            double graddiv = 0.0, lap = 0.0;
            for (int j = 0; j < 3; ++j) graddiv += H[m][j](j, k);
            for (int i = 0; i < 3; ++i) lap += H[i][i](m, k);
            res(m, k) = (lam + mu) * graddiv + mu * lap;
        }
    return res;
}

double max_abs(const Hessian& H) {
    double m = 0.0;
    for (const auto& row : H)
        for (const auto& e : row) m = std::max(m, e.cwiseAbs().maxCoeff());
    return m;
}

struct Config {
    Vec3 x, y, v, n;
};

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    Vec3 unit() {
        std::normal_distribution<double> g(0.0, 1.0);
        Vec3 d;
        do d = Vec3(g(rng_), g(rng_), g(rng_));
        while (d.norm() < 1e-3);
        return d.normalized();
    }

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

    // |x - y| in [r_lo, r_hi], R >= 0.1 r.
    Config config(double r_lo, double r_hi) {
        Config c;
        c.y = Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
        c.v = unit();
        Vec3 d;
        do d = unit();
        while (d.dot(c.v) > 0.9);
        c.x = c.y + uniform(r_lo, r_hi) * d;
        c.n = unit();
        return c;
    }

private:
    std::mt19937_64 rng_;
};

double ray_distance(const Config& c) {
    const Vec3 r = c.x - c.y;
    const double t = std::max(0.0, r.dot(c.v));
    return (r - t * c.v).norm();
}

double segment_distance(const Config& c, double h) {
    const Vec3 r = c.x - c.y;
    const double t = std::clamp(r.dot(c.v), 0.0, h);
    return (r - t * c.v).norm();
}

class Tally {
public:
    void add(int index, double err) {
        errors_.push_back({index, err});
        max_ = std::max(max_, err);
    }
    double max() const { return max_; }
    std::vector<WorstSample> worst(std::size_t k = 3) const {
        auto w = errors_;
        std::stable_sort(w.begin(), w.end(), [](const auto& a, const auto& b) { return a.error > b.error; });
        if (w.size() > k) w.resize(k);
        return w;
    }

private:
    std::vector<WorstSample> errors_;
    double max_ = 0.0;
};

std::string suffix(const ElasticParams& p, bool multi) {
    if (!multi) return "";
    std::ostringstream os;
    os << "[lambda=" << p.lambda() << ",mu=" << p.mu() << "]";
    return os.str();
}

VerificationReport pde_check(const std::string& name, Sampler& rng, const ElasticParams& p, int samples,
                             const std::function<MatrixField3(const Config&)>& make,
                             const std::function<double(const Config&)>& dist) {
    constexpr double kRel = 1e-3, kTol = 1e-5;
    Tally tally;
    double coarse = 0.0, fine = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Config c = rng.config(0.5, 2.0);
        const MatrixField3 f = make(c);
        const double step = kRel * dist(c);
        const Hessian H1 = fd_hessian(f, c.x, step), H2 = fd_hessian(f, c.x, 0.5 * step);
        const double scale = (p.lambda() + 2.0 * p.mu()) * max_abs(H2);
        const double e1 = residual_from(H1, p).cwiseAbs().maxCoeff() / scale;
        const double e2 = residual_from(H2, p).cwiseAbs().maxCoeff() / scale;
        coarse += e1;
        fine += e2;
        tally.add(s, e2);
    }
    VerificationReport r;
    r.check = name;
    r.samples = samples;
    r.max_error = tally.max();
    r.tolerance = kTol;
    r.expected = "O(step^2), ratio in [3.5, 4.5]";
    r.order_ratio = fine > 0.0 ? coarse / fine : 0.0;
    r.pass = r.max_error <= kTol && r.order_ratio >= 3.5 && r.order_ratio <= 4.5;
    r.worst = tally.worst();
    return r;
}

}  // namespace

Mat3 elasto_residual(const MatrixField3& field, const Vec3& x, double step, const ElasticParams& params) {
    return residual_from(fd_hessian(field, x, step), params);
}

Mat3 fd_traction(const MatrixField3& field, const Vec3& x, const Vec3& n, double step, const ElasticParams& params) {
    check_step(x, step);
    const Mat3 I = Mat3::Identity();
    std::array<Mat3, 3> D;  // d_i field
    for (int i = 0; i < 3; ++i) D[i] = (field(x + step * I.col(i)) - field(x - step * I.col(i))) / (2.0 * step);
    Mat3 t;
    for (int k = 0; k < 3; ++k) {
        double div = 0.0;
        for (int i = 0; i < 3; ++i) div += D[i](i, k);
        for (int j = 0; j < 3; ++j) {
            double shear = 0.0;
            for (int i = 0; i < 3; ++i) shear += n(i) * (D[i](j, k) + D[j](i, k));
            t(j, k) = params.lambda() * n(j) * div + params.mu() * shear;
        }
    }
    return t;
}

std::vector<VerificationReport> run_suite(std::uint64_t seed, const std::vector<ElasticParams>& params,
                                          const SuiteOptions& opt) {
    std::vector<VerificationReport> out;
    const bool multi = params.size() > 1;
    Sampler rng(seed);
    const double h = opt.h;
    for (const auto& p : params) {
        const std::string sfx = suffix(p, multi);

        // PDE residual.
        const auto ray = [](const Config& c) { return ray_distance(c); };
        const auto point = [](const Config& c) { return (c.x - c.y).norm(); };
        const auto seg = [h](const Config& c) { return segment_distance(c, h); };
        for (int order = 0; order < 3; ++order) {
            out.push_back(pde_check(
                "pde_residual/order" + std::to_string(order) + sfx, rng, p, opt.pde_samples,
                [&p, order](const Config& c) {
                    return MatrixField3([c, &p, order](const Vec3& x) { return disp3d(order, x, c.y, c.v, p); });
                },
                order == 2 ? std::function<double(const Config&)>(point) : ray));
        }
        out.push_back(pde_check(
            "pde_residual/string_kernel" + sfx, rng, p, opt.pde_samples,
            [&p, h](const Config& c) {
                return MatrixField3([c, &p, h](const Vec3& x) { return string_kernel3d(x, c.y, c.v, h, p); });
            },
            seg));

        // Stress displays against FD stress of the displacement kernels.
        for (int order = 0; order < 3; ++order) {
            constexpr double kTol = 1e-6;
            Tally tally;
            double coarse = 0.0, fine = 0.0;
            for (int s = 0; s < opt.stress_samples; ++s) {
                const Config c = rng.config(0.5, 2.0);
                const MatrixField3 f = [&c, &p, order](const Vec3& x) { return disp3d(order, x, c.y, c.v, p); };
                const Mat3 exact = stress3d(order, c.x, c.n, c.y, c.v, p);
                const double step = 1e-4 * std::max(1.0, (c.x - c.y).norm());
                const double scale = exact.cwiseAbs().maxCoeff();
                const double e1 = (fd_traction(f, c.x, c.n, step, p) - exact).cwiseAbs().maxCoeff() / scale;
                const double e2 = (fd_traction(f, c.x, c.n, 0.5 * step, p) - exact).cwiseAbs().maxCoeff() / scale;
                coarse += e1;
                fine += e2;
                tally.add(s, e2);
            }
            VerificationReport r;
            r.check = "stress_fd/order" + std::to_string(order) + sfx;
            r.samples = opt.stress_samples;
            r.max_error = tally.max();
            r.tolerance = kTol;
            r.expected = "O(step^2), ratio in [3.5, 4.5]";
            r.order_ratio = fine > 0.0 ? coarse / fine : 0.0;
            r.pass = r.max_error <= kTol && r.order_ratio >= 3.5 && r.order_ratio <= 4.5;
            r.worst = tally.worst();
            out.push_back(r);
        }

        // Closed form against the 16-point line integral, |x - y| >= 2h.
        for (int which = 0; which < 2; ++which) {
            constexpr double kTol = 1e-11;
            Tally tally;
            for (int s = 0; s < opt.form_samples; ++s) {
                const Config c = rng.config(2.0 * h, 8.0 * h);
                Mat3 a, b;
                if (which == 0) {
                    a = string_kernel3d(c.x, c.y, c.v, h, p, {StringForm::closed, 16});
                    b = string_kernel3d(c.x, c.y, c.v, h, p, {StringForm::quadrature, 16});
                } else {
                    a = sigma_string3d(c.x, c.n, c.y, c.v, h, p, {StringForm::closed, 16});
                    b = sigma_string3d(c.x, c.n, c.y, c.v, h, p, {StringForm::quadrature, 16});
                }
                tally.add(s, (a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff());
            }
            VerificationReport r;
            r.check = std::string(which == 0 ? "closed_vs_quadrature/kernel" : "closed_vs_quadrature/traction") + sfx;
            r.samples = opt.form_samples;
            r.max_error = tally.max();
            r.tolerance = kTol;
            r.expected = "agreement to rounding";
            r.pass = r.max_error <= kTol;
            r.worst = tally.worst();
            out.push_back(r);
        }

        // (Sigma(alpha) - Sigma(1)) / (1 - alpha) constant within 10%.
        {
            const double tol = 1.1 / 0.9;
            Tally tally;
            for (int s = 0; s < opt.limit_samples; ++s) {
                const Config c = rng.config(0.5, 2.0);
                const Mat3 ref = stokes_limit_sigma3d(c.x, c.n, c.y, c.v, h);
                double lo = INFINITY, hi = 0.0;
                for (double a : {0.9, 0.99, 0.999}) {
                    const ElasticParams pa(p.mu() * (2.0 * a - 1.0) / (1.0 - a), p.mu());
                    const Mat3 sa = sigma_string3d(c.x, c.n, c.y, c.v, h, pa, {StringForm::closed, 16});
                    const double q = (sa - ref).norm() / (1.0 - a);
                    lo = std::min(lo, q);
                    hi = std::max(hi, q);
                }
                tally.add(s, hi / lo);
            }
            VerificationReport r;
            r.check = "stokes_limit_scaling" + sfx;
            r.samples = opt.limit_samples;
            r.max_error = tally.max();
            r.tolerance = tol;
            r.expected = "max/min over alpha in {0.9, 0.99, 0.999} within (1 +- 0.1) c";
            r.pass = r.max_error <= tol;
            r.worst = tally.worst();
            out.push_back(r);
        }

        // Zero traction of G^{B,3} on the flat boundary.
        {
            constexpr double kTol = 1e-13;
            const Vec3 e3(0.0, 0.0, 1.0);
            Tally tally;
            for (int s = 0; s < opt.flat_samples; ++s) {
                const Vec3 y(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0);
                Vec3 x;
                do x = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0);
                while ((x - y).norm() < 0.1);
                const double r2 = (x - y).squaredNorm();
                tally.add(s, stress3d(0, x, e3, y, e3, p).cwiseAbs().maxCoeff() * r2);
            }
            VerificationReport r;
            r.check = "flat_half_space" + sfx;
            r.samples = opt.flat_samples;
            r.max_error = tally.max();
            r.tolerance = kTol;
            r.expected = "zero traction, |T| r^2";
            r.pass = r.max_error <= kTol;
            r.worst = tally.worst();
            out.push_back(r);
        }
    }
    return out;
}

std::string reports_json(const std::vector<VerificationReport>& reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["check"] = r.check;
        j["samples"] = r.samples;
        j["max_error"] = r.max_error;
        j["tolerance"] = r.tolerance;
        j["expected"] = r.expected;
        if (r.order_ratio > 0.0) j["order_ratio"] = r.order_ratio;
        j["pass"] = r.pass;
        nlohmann::ordered_json w = nlohmann::ordered_json::array();
        for (const auto& s : r.worst) w.push_back({{"index", s.index}, {"error", s.error}});
        j["worst"] = w;
        arr.push_back(j);
    }
    return arr.dump(2) + "\n";
}

}  // namespace stringkern
