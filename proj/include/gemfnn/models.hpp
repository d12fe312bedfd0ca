#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include "gemfnn/diffengine.hpp"
#include "gemfnn/scalers.hpp"

namespace gemfnn {

enum class ModelVariant { NN, GENN, MFNN, GEMFNN };

ModelVariant variant_from_string(const std::string& s);
std::string to_string(ModelVariant v);
bool is_multifidelity(ModelVariant v);
bool uses_gradients(ModelVariant v);

/// Hidden-layer widths of the three constituent networks. Activations are
/// fixed by role: NN_L and NN_H2 hidden layers are tanh, NN_H1 hidden layers
/// are linear, every output layer is linear with a single unit.
struct Architecture {
    std::vector<int> nn_l{20};
    std::vector<int> nn_h1{10};
    std::vector<int> nn_h2{10};
};

/// The composite model. Single-fidelity variants (NN, GENN) carry only
/// nn_H2 applied directly to x; multifidelity variants feed [x, y_L_hat]
/// into both heads and mix them as omega*y_lin + (1-omega)*y_nonlin.
struct CompositeSurrogate {
    ModelVariant variant = ModelVariant::NN;
    int input_dim = 0;
    std::optional<Mlp> nn_L;
    std::optional<Mlp> nn_H1;
    Mlp nn_H2;
    double omega = 0.5;
    NormalizationScalers scalers;
};

CompositeSurrogate make_surrogate(ModelVariant variant, int input_dim,
                                  const Architecture& arch, std::uint64_t seed);

/// A training mini-batch in normalized space. grad is empty when the batch
/// carries no gradient targets.
struct Batch {
    Matrix x;
    Vector y;
    Matrix grad;
    bool has_gradients() const { return grad.rows() > 0; }
};

// Physical-space prediction API. Inputs are raw x; scalers are applied on
// the way in and inverted on the way out.
Vector predict_low(const CompositeSurrogate& model, const Matrix& x);
Vector predict_high(const CompositeSurrogate& model, const Matrix& x);
std::pair<Vector, Matrix> predict_high_with_gradient(const CompositeSurrogate& model,
                                                     const Matrix& x);

// Normalized-space core, used by the losses and by tests.
Vector predict_low_normalized(const CompositeSurrogate& model, const Matrix& xn);
Vector predict_high_normalized(const CompositeSurrogate& model, const Matrix& xn);
std::pair<Vector, Matrix> predict_high_normalized_with_gradient(
    const CompositeSurrogate& model, const Matrix& xn);

/// The additive pieces of the variant losses. Terms not used by the variant
/// stay zero, so total() is always the variant's own loss: NN keeps only
/// hf_value, GENN adds hf_gradient, MFNN adds lf_value, GEMFNN uses all four.
struct LossTerms {
    double hf_value = 0.0;
    double hf_gradient = 0.0;
    double lf_value = 0.0;
    double lf_gradient = 0.0;
    double total() const { return hf_value + hf_gradient + lf_value + lf_gradient; }
};

LossTerms loss_terms(const CompositeSurrogate& model, const Batch& hf, const Batch* lf);
double compute_loss(const CompositeSurrogate& model, const Batch& hf, const Batch* lf);

struct CompositeGradient {
    std::optional<MlpGradient> nn_L;
    std::optional<MlpGradient> nn_H1;
    MlpGradient nn_H2;
    double omega = 0.0;

    bool all_finite() const;
};

/// Loss value and its exact gradient with respect to every weight, bias and
/// omega. Input-gradient terms are exact because input tangents propagate as
/// primal quantities through the extended graph.
std::pair<double, CompositeGradient> loss_and_gradient(const CompositeSurrogate& model,
                                                       const Batch& hf, const Batch* lf);

// Flat parameter pack (per-net layer order, omega last for multifidelity
// variants); used by the optimizer tests and finite-difference oracles.
Vector pack_parameters(const CompositeSurrogate& model);
void unpack_parameters(CompositeSurrogate& model, const Vector& theta);
Vector pack_gradient(const CompositeSurrogate& model, const CompositeGradient& grad);

void write_model(const CompositeSurrogate& model, std::ostream& out);
void write_model(const CompositeSurrogate& model, const std::string& path);
CompositeSurrogate read_model(std::istream& in);
CompositeSurrogate read_model(const std::string& path);

}  // namespace gemfnn
