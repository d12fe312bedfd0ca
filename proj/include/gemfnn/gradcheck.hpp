#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gemfnn/datagen.hpp"
#include "gemfnn/models.hpp"

namespace gemfnn {

/// Outcome of one finite-difference verification sweep.
struct CheckResult {
    std::string name;
    bool passed = true;
    double worst_err = 0.0;  // |a-b| scaled by max(|a|,|b|,1e-300)
    double tolerance = 0.0;
    std::string worst_detail;  // which component was worst
};

struct GradCheckOptions {
    double rel_tol = 1e-5;
    double abs_floor = 1e-8;
    double fd_step = 1e-5;
    int trials = 20;
    std::uint64_t seed = 42;
};

/// Agreement test: |a-b| <= max(rel_tol * max(|a|,|b|), abs_floor).
bool fd_close(double a, double b, double rel_tol, double abs_floor);
double fd_error(double a, double b);

/// Central difference of a scalar function, component by component.
Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                        double step);

/// Fourth-order central stencil, for functions whose higher derivatives are
/// large enough to dominate the 3-point truncation error.
Vector central_gradient4(const std::function<double(const Vector&)>& f, const Vector& x,
                         double step);

// Each check draws `trials` random configurations and compares analytic
// derivatives against central finite differences.
CheckResult check_layer_tangents(const GradCheckOptions& opt);
CheckResult check_input_jacobians(const GradCheckOptions& opt);
CheckResult check_loss_gradient(ModelVariant variant, const GradCheckOptions& opt);
CheckResult check_prediction_gradient(ModelVariant variant, const GradCheckOptions& opt);
CheckResult check_benchmark_gradients(const BenchmarkCase& bench, Fidelity fidelity,
                                      int n_points, double rel_tol, std::uint64_t seed);
/// The case's printed LF/HF algebraic relation, as an absolute residual.
CheckResult check_benchmark_identity(const BenchmarkCase& bench, int n_points, double tol,
                                     std::uint64_t seed);

/// The full battery the `verify-grads` command runs.
std::vector<CheckResult> run_all_gradient_checks(const GradCheckOptions& opt);

}  // namespace gemfnn
