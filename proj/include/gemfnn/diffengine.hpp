#pragma once

#include <vector>

#include "gemfnn/network.hpp"

namespace gemfnn {

/// A batch of values and, alongside each value, its exact derivative with
/// respect to every network input. Tangent slabs are stacked vertically:
/// rows [d*batch, (d+1)*batch) hold d(value)/d(input_d) for the whole batch,
/// so one GEMM advances all slabs through a layer.
struct DualBatch {
    Matrix values;    // batch x width
    Matrix tangents;  // (n_tangents*batch) x width, empty when tangent-free
    Index batch = 0;
    int n_tangents = 0;

    Eigen::Block<Matrix> tangent(int d) {
        return tangents.middleRows(static_cast<Index>(d) * batch, batch);
    }
    Eigen::Block<const Matrix> tangent(int d) const {
        return tangents.middleRows(static_cast<Index>(d) * batch, batch);
    }

    /// Input-layer batch: values = x, tangents = identity replicated per row
    /// (or no tangents at all, for value-only propagation).
    static DualBatch from_input(const Matrix& x, bool with_identity_tangents);
};

/// One dual-mode layer application: values = act(W v + b) rowwise, tangents
/// advanced by the chain rule act'(pre) o (tangent W^T). When save_pre_tangents
/// is given, the pre-activation tangent slabs are stored for the reverse sweep.
DualBatch propagate_layer(const DualBatch& input, const Matrix& weights,
                          const Vector& bias, Activation activation,
                          Matrix* save_pre_tangents = nullptr);

/// Everything the reverse sweep needs, captured layer by layer during a dual
/// forward pass. inputs[i] is the DualBatch fed to layer i; activations[i]
/// its post-activation values; pre_tangents[i] the tangent slabs before the
/// act' scaling.
struct MlpDualTrace {
    std::vector<DualBatch> inputs;
    std::vector<Matrix> activations;
    std::vector<Matrix> pre_tangents;
};

DualBatch mlp_forward_dual(const Mlp& net, DualBatch input, MlpDualTrace* trace = nullptr);
DualBatch mlp_forward_dual(const Mlp& net, const Matrix& x, bool with_input_tangents,
                           MlpDualTrace* trace = nullptr);

/// Per-parameter loss gradient, congruent in shape with the Mlp it
/// differentiates.
struct MlpGradient {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    void scale(double s);
    double squared_norm() const;
    bool all_finite() const;
};

MlpGradient zero_gradient(const Mlp& net);

/// Reverse sweep over the tangent-extended graph. out_bar carries the loss
/// cotangents of the network's output values and output tangents; parameter
/// gradients accumulate into grad and the returned DualBatch carries the
/// cotangents of the layer-0 input (values and tangent slabs), which is how
/// gradients chain through a network feeding another network's input.
DualBatch mlp_backward_dual(const Mlp& net, const MlpDualTrace& trace,
                            const DualBatch& out_bar, MlpGradient& grad);

}  // namespace gemfnn
