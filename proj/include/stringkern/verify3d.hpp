#pragma once

#include "stringkern/kernels3d.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stringkern {

struct WorstSample {
    int index = 0;
    double error = 0.0;
};

struct VerificationReport {
    std::string check;
    int samples = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    std::string expected;          // expected order or scaling, human readable
    double order_ratio = 0.0;      // error(step) / error(step / 2); 0 when not applicable
    bool pass = false;
    std::vector<WorstSample> worst;  // largest errors, descending
};

using MatrixField3 = std::function<Mat3(const Vec3&)>;

/// (lambda + mu) grad div u + mu lap u for each column of field, by central
/// second differences with spacing step.
Mat3 elasto_residual(const MatrixField3& field, const Vec3& x, double step, const ElasticParams& params);

/// Traction n . sigma of each column of field by central first differences.
Mat3 fd_traction(const MatrixField3& field, const Vec3& x, const Vec3& n, double step, const ElasticParams& params);

struct SuiteOptions {
    double h = 0.25;
    int pde_samples = 100;
    int stress_samples = 50;
    int form_samples = 100;
    int limit_samples = 20;
    int flat_samples = 50;
};

/// PDE residual, stress-vs-FD, closed-vs-quadrature, Stokes-limit scaling and
/// flat half-space checks for each parameter set.
std::vector<VerificationReport> run_suite(std::uint64_t seed, const std::vector<ElasticParams>& params,
                                          const SuiteOptions& opt = {});

/// JSON array of reports.
std::string reports_json(const std::vector<VerificationReport>& reports);

}  // namespace stringkern
