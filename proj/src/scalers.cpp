#include "gemfnn/scalers.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace gemfnn {

namespace {

// Population statistics; std clamped to 1 for constant columns.
void column_stats(const Matrix& x, Vector& mean, Vector& std_dev) {
    mean = x.colwise().mean();
    std_dev.resize(x.cols());
    for (Index k = 0; k < x.cols(); ++k) {
        const double var = (x.col(k).array() - mean(k)).square().mean();
        const double sd = std::sqrt(var);
        std_dev(k) = sd > 0.0 ? sd : 1.0;
    }
}

void scalar_stats(const Vector& y, double& mean, double& std_dev) {
    mean = y.mean();
    const double var = (y.array() - mean).square().mean();
    const double sd = std::sqrt(var);
    std_dev = sd > 0.0 ? sd : 1.0;
}

}  // namespace

Matrix NormalizationScalers::transform_x(const Matrix& x) const {
    return (x.rowwise() - x_mean.transpose()).array().rowwise() /
           x_std.transpose().array();
}

Matrix NormalizationScalers::inverse_x(const Matrix& xn) const {
    return (xn.array().rowwise() * x_std.transpose().array()).matrix().rowwise() +
           x_mean.transpose();
}

Matrix NormalizationScalers::transform_grad_H(const Matrix& g) const {
    return (g.array().rowwise() * x_std.transpose().array()) / yH_std;
}

Matrix NormalizationScalers::inverse_grad_H(const Matrix& gn) const {
    return (gn.array() * yH_std).rowwise() / x_std.transpose().array();
}

Matrix NormalizationScalers::transform_grad_L(const Matrix& g) const {
    return (g.array().rowwise() * x_std.transpose().array()) / yL_std;
}

NormalizationScalers NormalizationScalers::identity(Index dim) {
    NormalizationScalers s;
    s.x_mean = Vector::Zero(dim);
    s.x_std = Vector::Ones(dim);
    return s;
}

NormalizationScalers fit_scalers(const MultiFidelityDataset& data) {
    if (data.x_H.rows() == 0) throw DataError("fit_scalers: empty high-fidelity training set");
    NormalizationScalers s;
    if (data.has_low()) {
        Matrix all(data.x_H.rows() + data.x_L.rows(), data.x_H.cols());
        all << data.x_H, data.x_L;
        column_stats(all, s.x_mean, s.x_std);
        scalar_stats(data.y_L, s.yL_mean, s.yL_std);
        s.has_low = true;
    } else {
        column_stats(data.x_H, s.x_mean, s.x_std);
    }
    scalar_stats(data.y_H, s.yH_mean, s.yH_std);
    return s;
}

void write_scalers(const NormalizationScalers& s, std::ostream& out) {
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << " " << buf;
    };
    out << "scalers " << s.x_mean.size() << " " << (s.has_low ? 1 : 0);
    for (Index k = 0; k < s.x_mean.size(); ++k) put(s.x_mean(k));
    for (Index k = 0; k < s.x_std.size(); ++k) put(s.x_std(k));
    put(s.yH_mean);
    put(s.yH_std);
    if (s.has_low) {
        put(s.yL_mean);
        put(s.yL_std);
    }
    out << "\n";
}

NormalizationScalers read_scalers(std::istream& in) {
    std::string tag;
    Index dim = 0;
    int has_low = 0;
    if (!(in >> tag >> dim >> has_low) || tag != "scalers")
        throw IoError("malformed scaler serialization");
    NormalizationScalers s;
    s.x_mean.resize(dim);
    s.x_std.resize(dim);
    for (Index k = 0; k < dim; ++k)
        if (!(in >> s.x_mean(k))) throw IoError("truncated scaler data");
    for (Index k = 0; k < dim; ++k)
        if (!(in >> s.x_std(k))) throw IoError("truncated scaler data");
    if (!(in >> s.yH_mean >> s.yH_std)) throw IoError("truncated scaler data");
    s.has_low = has_low != 0;
    if (s.has_low && !(in >> s.yL_mean >> s.yL_std)) throw IoError("truncated scaler data");
    return s;
}

}  // namespace gemfnn
