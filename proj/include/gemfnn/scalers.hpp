#pragma once

#include <iosfwd>

#include "gemfnn/datagen.hpp"

namespace gemfnn {

/// Z-score statistics for inputs and per-fidelity outputs. Degenerate
/// (zero-variance) columns clamp std to 1. Normalized gradient targets are
/// raw gradient * x_std_k / y_std per dimension (chain rule).
struct NormalizationScalers {
    Vector x_mean, x_std;
    double yH_mean = 0.0, yH_std = 1.0;
    double yL_mean = 0.0, yL_std = 1.0;
    bool has_low = false;

    Matrix transform_x(const Matrix& x) const;
    Matrix inverse_x(const Matrix& xn) const;
    Vector transform_yH(const Vector& y) const { return (y.array() - yH_mean) / yH_std; }
    Vector inverse_yH(const Vector& yn) const { return (yn.array() * yH_std) + yH_mean; }
    Vector transform_yL(const Vector& y) const { return (y.array() - yL_mean) / yL_std; }
    Vector inverse_yL(const Vector& yn) const { return (yn.array() * yL_std) + yL_mean; }
    Matrix transform_grad_H(const Matrix& g) const;
    Matrix inverse_grad_H(const Matrix& gn) const;
    Matrix transform_grad_L(const Matrix& g) const;

    /// Identity scalers (mean 0, std 1) for a given input dimension.
    static NormalizationScalers identity(Index dim);
};

/// x statistics over the union of HF and LF training inputs; yH over HF
/// outputs; yL over LF outputs when present.
NormalizationScalers fit_scalers(const MultiFidelityDataset& data);

void write_scalers(const NormalizationScalers& s, std::ostream& out);
NormalizationScalers read_scalers(std::istream& in);

}  // namespace gemfnn
