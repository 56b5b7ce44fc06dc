#pragma once

#include <functional>
#include <vector>

namespace lobq {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b]. Bisects
/// the worst interval until the summed error estimate falls under
/// max(abs_tol, rel_tol * |integral|) or max_intervals is reached; in the
/// latter case converged is false and the caller decides whether to accept.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol = 1e-10,
                           int max_intervals = 2000, double rel_tol = 1e-12);

/// Same scheme for a vector-valued integrand (shared nodes across
/// components); refinement is driven by the worst component error.
struct VectorQuadratureResult {
    std::vector<double> values;
    double error_estimate = 0.0;
    int evaluations = 0;
    bool converged = false;
};

VectorQuadratureResult integrate_vector(
    const std::function<void(double, std::vector<double>&)>& f, std::size_t dim,
    double a, double b, double abs_tol = 1e-10, int max_intervals = 4000,
    double rel_tol = 1e-12);

}  // namespace lobq
