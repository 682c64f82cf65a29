#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stringkern {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class NumericsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadratureRule {
    std::vector<double> nodes;    // increasing, in [-1, 1]
    std::vector<double> weights;  // positive, sum to 2
};

/// n-point Gauss-Legendre rule on [-1, 1], 1 <= n <= 64.
QuadratureRule gauss_legendre(int n);

/// Shared immutable copy of gauss_legendre(n); thread-safe.
const QuadratureRule& gauss_legendre_cached(int n);

enum class GmresStatus { converged, max_iter, breakdown };

struct GmresResult {
    Vector x;
    int iters = 0;
    double residual = 0.0;          // true relative residual ||b - A x|| / ||b||
    GmresStatus status = GmresStatus::converged;
    std::vector<double> history;    // estimated relative residual after each iteration
};

using LinearOperator = std::function<void(const Vector& in, Vector& out)>;

/// Unrestarted GMRES, modified Gram-Schmidt with one reorthogonalization pass.
/// Zero initial guess. A zero right-hand side returns x = 0 after 0 iterations.
GmresResult gmres(const LinearOperator& apply, const Vector& b, double tol, int max_iter);

/// Singular values (descending) by one-sided Jacobi.
std::vector<double> singular_values(const DenseMatrix& A);

/// sigma_max / sigma_min from one-sided Jacobi; +infinity if sigma_min < 1e-300.
double svd_condition(const DenseMatrix& A);

/// Extreme singular values of a square matrix via Lanczos on A^T A and on
/// (A^T A)^{-1} (LU-based). Intended for matrices too large for Jacobi.
struct ExtremeSingularValues {
    double sigma_max = 0.0;
    double sigma_min = 0.0;
};
ExtremeSingularValues extreme_singular_values(const DenseMatrix& A, double rel_tol = 1e-10);

/// svd_condition for n <= jacobi_limit, the Lanczos estimate otherwise.
double condition_number(const DenseMatrix& A, int jacobi_limit = 600);

/// Least squares via Householder QR. Throws on numerical rank deficiency.
Vector lstsq(const DenseMatrix& A, const Vector& b);

/// y = A x, parallel over row blocks. Each row is an independent dot product,
/// so the result does not depend on the thread count.
void matvec(const DenseMatrix& A, const Vector& x, Vector& y);

/// Number of worker threads used by parallel loops (default 1).
void set_num_threads(int n);
int num_threads();

/// Runs body(i) for i in [0, n) over contiguous blocks on num_threads() threads.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace stringkern
