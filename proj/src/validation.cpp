#include "gemfnn/validation.hpp"

#include <cmath>

namespace gemfnn {

double r_squared(const Vector& y_true, const Vector& y_pred) {
    if (y_true.size() != y_pred.size())
        throw ShapeError("r_squared: length mismatch (" + std::to_string(y_true.size()) +
                         " vs " + std::to_string(y_pred.size()) + ")");
    if (y_true.size() < 2) throw DataError("r_squared: need at least 2 samples");
    const double mean = y_true.mean();
    const double ss_tot = (y_true.array() - mean).square().sum();
    if (ss_tot == 0.0)
        throw DataError("r_squared: y_true is constant, denominator undefined");
    const double ss_res = (y_true - y_pred).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

std::pair<double, double> aggregate(const std::vector<double>& r2_values) {
    if (r2_values.empty()) throw DataError("aggregate: empty R^2 list");
    const double n = static_cast<double>(r2_values.size());
    double mu = 0.0;
    for (double v : r2_values) mu += v;
    mu /= n;
    double var = 0.0;
    for (double v : r2_values) var += (v - mu) * (v - mu);
    var /= n;  // population divisor
    return {mu, std::sqrt(var)};
}

ValidationReport make_report(std::vector<double> r2_values, Index test_size) {
    ValidationReport rep;
    rep.n_t = static_cast<int>(r2_values.size());
    rep.N_t = test_size;
    auto [mu, sigma] = aggregate(r2_values);
    rep.mu_r2 = mu;
    rep.sigma_r2 = sigma;
    rep.r2_values = std::move(r2_values);
    return rep;
}

}  // namespace gemfnn
