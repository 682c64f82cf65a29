#include "stringkern/numerics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace stringkern {

namespace {

std::atomic<int> g_threads{1};

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

}  // namespace

void set_num_threads(int n) { g_threads = std::max(1, n); }
int num_threads() { return g_threads; }

void parallel_for(int n, const std::function<void(int)>& body) {
    const int nt = std::min(num_threads(), std::max(1, n));
    if (nt <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            const int lo = static_cast<int>(static_cast<long>(n) * t / nt);
            const int hi = static_cast<int>(static_cast<long>(n) * (t + 1) / nt);
            try {
                for (int i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1 || n > 64) throw NumericsError("gauss_legendre: n must be in [1, 64]");
    QuadratureRule q;
    q.nodes.resize(n);
    q.weights.resize(n);
    if (n == 1) {
        q.nodes[0] = 0.0;
        q.weights[0] = 2.0;
        return q;
    }
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Root i (descending from +1), Tricomi initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const auto [p, dp] = legendre(n, x);
        (void)p;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.nodes[n - 1 - i] = x;
        q.nodes[i] = -x;
        q.weights[n - 1 - i] = w;
        q.weights[i] = w;
    }
    if (n % 2 == 1) q.nodes[n / 2] = 0.0;
    return q;
}

const QuadratureRule& gauss_legendre_cached(int n) {
    static std::array<std::once_flag, 65> flags;
    static std::array<std::unique_ptr<QuadratureRule>, 65> rules;
    if (n < 1 || n > 64) throw NumericsError("gauss_legendre: n must be in [1, 64]");
    std::call_once(flags[n], [n] { rules[n] = std::make_unique<QuadratureRule>(gauss_legendre(n)); });
    return *rules[n];
}

void matvec(const DenseMatrix& A, const Vector& x, Vector& y) {
    if (A.cols() != x.size()) throw NumericsError("matvec: dimension mismatch");
    y.resize(A.rows());
    parallel_for(static_cast<int>(A.rows()), [&](int i) { y(i) = A.row(i).dot(x); });
}

GmresResult gmres(const LinearOperator& apply, const Vector& b, double tol, int max_iter) {
    if (!(tol > 0.0)) throw NumericsError("gmres: tol must be positive");
    if (max_iter < 1) throw NumericsError("gmres: max_iter must be positive");
    const Eigen::Index n = b.size();
    GmresResult res;
    res.x = Vector::Zero(n);
    const double beta = b.norm();
    if (!std::isfinite(beta)) throw NumericsError("gmres: non-finite right-hand side");
    if (beta == 0.0) {
        res.status = GmresStatus::converged;
        return res;
    }
    const int m = static_cast<int>(std::min<Eigen::Index>(max_iter, n));
    std::vector<Vector> V;
    V.reserve(m + 1);
    V.push_back(b / beta);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<double> cs(m), sn(m);
    Vector g = Vector::Zero(m + 1);
    g(0) = beta;

    int k = 0;
    bool breakdown = false;
    Vector w(n);
    for (; k < m; ++k) {
        apply(V[k], w);
        const double wnorm0 = w.norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j <= k; ++j) {
                const double h = V[j].dot(w);
                H(j, k) += h;
                w -= h * V[j];
            }
        }
        const double hnext = w.norm();
        H(k + 1, k) = hnext;
        for (int j = 0; j < k; ++j) {
            const double t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
            H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
            H(j, k) = t;
        }
        const double rr = std::hypot(H(k, k), H(k + 1, k));
        if (rr == 0.0) {
            breakdown = true;
            break;
        }
        cs[k] = H(k, k) / rr;
        sn[k] = H(k + 1, k) / rr;
        H(k, k) = rr;
        H(k + 1, k) = 0.0;
        g(k + 1) = -sn[k] * g(k);
        g(k) = cs[k] * g(k);
        const double est = std::abs(g(k + 1)) / beta;
        res.history.push_back(est);
        if (est <= tol) {
            ++k;
            break;
        }
        if (hnext <= 1e-14 * std::max(wnorm0, 1e-300)) {
            // Invariant Krylov subspace without reaching tol.
            ++k;
            breakdown = true;
            break;
        }
        if (k + 1 < m + 1) V.push_back(w / hnext);
    }
    const int kk = k;
    if (kk > 0) {
        Vector yk = H.topLeftCorner(kk, kk).triangularView<Eigen::Upper>().solve(g.head(kk));
        for (int j = 0; j < kk; ++j) res.x += yk(j) * V[j];
    }
    res.iters = kk;
    Vector ax(n);
    apply(res.x, ax);
    res.residual = (b - ax).norm() / beta;
    const double last = res.history.empty() ? 1.0 : res.history.back();
    if (last <= tol)
        res.status = GmresStatus::converged;
    else if (breakdown)
        res.status = GmresStatus::breakdown;
    else
        res.status = GmresStatus::max_iter;
    return res;
}

std::vector<double> singular_values(const DenseMatrix& A) {
    if (A.rows() < 1 || A.cols() < 1) throw NumericsError("singular_values: empty matrix");
    if (!A.allFinite()) throw NumericsError("singular_values: non-finite entries");
    // Column-major working copy with at least as many rows as columns.
    Eigen::MatrixXd U = (A.rows() >= A.cols()) ? Eigen::MatrixXd(A) : Eigen::MatrixXd(A.transpose());
    const Eigen::Index n = U.cols();
    const double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double a = U.col(p).squaredNorm();
                const double b = U.col(q).squaredNorm();
                const double c = U.col(p).dot(U.col(q));
                if (std::abs(c) <= eps * std::sqrt(a * b) || c == 0.0) continue;
                rotated = true;
                const double zeta = (b - a) / (2.0 * c);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (Eigen::Index i = 0; i < U.rows(); ++i) {
                    const double up = U(i, p), uq = U(i, q);
                    U(i, p) = cs * up - sn * uq;
                    U(i, q) = sn * up + cs * uq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> s(n);
    for (Eigen::Index j = 0; j < n; ++j) s[j] = U.col(j).norm();
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

double svd_condition(const DenseMatrix& A) {
    const auto s = singular_values(A);
    if (s.back() < 1e-300) return std::numeric_limits<double>::infinity();
    return s.front() / s.back();
}

namespace {

// Largest eigenvalue of a symmetric positive operator by Lanczos with full
// reorthogonalization. Deterministic start vector.
double lanczos_max(const LinearOperator& op, Eigen::Index n, double rel_tol) {
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> nd;
    Vector q(n);
    for (Eigen::Index i = 0; i < n; ++i) q(i) = nd(rng);
    q.normalize();
    std::vector<Vector> Q{q};
    std::vector<double> alpha, beta;
    double prev = 0.0;
    const int kmax = static_cast<int>(std::min<Eigen::Index>(n, 400));
    Vector w(n);
    for (int k = 0; k < kmax; ++k) {
        op(Q[k], w);
        const double a = Q[k].dot(w);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& v : Q) w -= v.dot(w) * v;
        const double b = w.norm();
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k + 1, k + 1);
        for (int i = 0; i <= k; ++i) {
            T(i, i) = alpha[i];
            if (i < k) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        const double ritz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        if (k > 3 && std::abs(ritz - prev) <= rel_tol * ritz) return ritz;
        prev = ritz;
        if (b <= 1e-14 * std::abs(ritz)) return ritz;
        beta.push_back(b);
        Q.push_back(w / b);
    }
    return prev;
}

}  // namespace

ExtremeSingularValues extreme_singular_values(const DenseMatrix& A, double rel_tol) {
    if (A.rows() != A.cols()) throw NumericsError("extreme_singular_values: square matrix required");
    if (!A.allFinite()) throw NumericsError("extreme_singular_values: non-finite entries");
    const Eigen::Index n = A.rows();
    Vector tmp(n);
    LinearOperator ata = [&](const Vector& x, Vector& y) {
        matvec(A, x, tmp);
        y = (tmp.transpose() * A).transpose();
    };
    // In-place factorization keeps peak memory at two copies of A.
    Eigen::MatrixXd work = A;
    Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(work);
    LinearOperator inv = [&](const Vector& x, Vector& y) {
        // (A^T A)^{-1} x = A^{-1} A^{-T} x
        const Vector z = lu.transpose().solve(x);
        y = lu.solve(z);
    };
    ExtremeSingularValues out;
    out.sigma_max = std::sqrt(lanczos_max(ata, n, rel_tol));
    const double inv_max = lanczos_max(inv, n, rel_tol);
    out.sigma_min = (std::isfinite(inv_max) && inv_max > 0.0) ? 1.0 / std::sqrt(inv_max) : 0.0;
    return out;
}

double condition_number(const DenseMatrix& A, int jacobi_limit) {
    if (A.rows() <= jacobi_limit && A.cols() <= jacobi_limit) return svd_condition(A);
    const auto s = extreme_singular_values(A);
    if (s.sigma_min < 1e-300) return std::numeric_limits<double>::infinity();
    return s.sigma_max / s.sigma_min;
}

Vector lstsq(const DenseMatrix& A, const Vector& b) {
    const Eigen::Index m = A.rows(), n = A.cols();
    if (m < n) throw NumericsError("lstsq: rows must be >= cols");
    if (b.size() != m) throw NumericsError("lstsq: dimension mismatch");
    Eigen::MatrixXd R = A;
    Vector y = b;
    // Householder QR applied to R and y in place.
    for (Eigen::Index k = 0; k < n; ++k) {
        Vector v = R.col(k).tail(m - k);
        const double alpha = -std::copysign(v.norm(), v(0));
        if (alpha == 0.0) continue;
        v(0) -= alpha;
        const double vn = v.squaredNorm();
        if (vn == 0.0) continue;
        for (Eigen::Index j = k; j < n; ++j) {
            const double s = 2.0 * v.dot(R.col(j).tail(m - k)) / vn;
            R.col(j).tail(m - k) -= s * v;
        }
        const double s = 2.0 * v.dot(y.tail(m - k)) / vn;
        y.tail(m - k) -= s * v;
    }
    double dmax = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) dmax = std::max(dmax, std::abs(R(k, k)));
    for (Eigen::Index k = 0; k < n; ++k)
        if (!(std::abs(R(k, k)) > 1e-12 * dmax)) throw NumericsError("lstsq: rank-deficient matrix");
    return R.topLeftCorner(n, n).triangularView<Eigen::Upper>().solve(y.head(n));
}

}  // namespace stringkern
