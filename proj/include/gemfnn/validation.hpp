#pragma once

#include <utility>
#include <vector>

#include "gemfnn/common.hpp"

namespace gemfnn {

/// Coefficient of determination, 1 - SS_res/SS_tot. May be negative for
/// models worse than the mean predictor; never exceeds 1.
double r_squared(const Vector& y_true, const Vector& y_pred);

/// Mean and population standard deviation (divide by n, not n-1) of a set of
/// per-dataset R^2 values.
std::pair<double, double> aggregate(const std::vector<double>& r2_values);

struct ValidationReport {
    std::vector<double> r2_values;
    double mu_r2 = 0.0;
    double sigma_r2 = 0.0;
    int n_t = 0;
    Index N_t = 0;
};

ValidationReport make_report(std::vector<double> r2_values, Index test_size);

}  // namespace gemfnn
