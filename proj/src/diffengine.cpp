#include "gemfnn/diffengine.hpp"

#include <cmath>

namespace gemfnn {

DualBatch DualBatch::from_input(const Matrix& x, bool with_identity_tangents) {
    DualBatch d;
    d.values = x;
    d.batch = x.rows();
    if (with_identity_tangents) {
        const int dim = static_cast<int>(x.cols());
        d.n_tangents = dim;
        d.tangents = Matrix::Zero(static_cast<Index>(dim) * d.batch, x.cols());
        for (int k = 0; k < dim; ++k) d.tangent(k).col(k).setOnes();
    }
    return d;
}

DualBatch propagate_layer(const DualBatch& input, const Matrix& weights,
                          const Vector& bias, Activation activation,
                          Matrix* save_pre_tangents) {
    if (input.values.cols() != weights.cols())
        throw ShapeError("propagate_layer: input width " + std::to_string(input.values.cols()) +
                         " does not match weight columns " + std::to_string(weights.cols()));
    if (weights.rows() != bias.size())
        throw ShapeError("propagate_layer: bias length " + std::to_string(bias.size()) +
                         " does not match weight rows " + std::to_string(weights.rows()));

    DualBatch out;
    out.batch = input.batch;
    out.n_tangents = input.n_tangents;

    // Values and tangents use separate GEMMs so the value path is bit-identical
    // with and without tangent propagation.
    Matrix z = input.values * weights.transpose();
    z.rowwise() += bias.transpose();
    out.values = (activation == Activation::Tanh) ? z.array().tanh().matrix() : std::move(z);

    if (input.n_tangents > 0) {
        Matrix pre = input.tangents * weights.transpose();
        if (activation == Activation::Tanh) {
            const Eigen::ArrayXXd sprime = 1.0 - out.values.array().square();
            out.tangents.resize(pre.rows(), pre.cols());
            for (int d = 0; d < out.n_tangents; ++d)
                out.tangent(d) = pre.middleRows(static_cast<Index>(d) * out.batch, out.batch)
                                     .array() * sprime;
            if (save_pre_tangents) *save_pre_tangents = std::move(pre);
        } else {
            if (save_pre_tangents) *save_pre_tangents = pre;
            out.tangents = std::move(pre);
        }
    } else if (save_pre_tangents) {
        save_pre_tangents->resize(0, 0);
    }
    return out;
}

DualBatch mlp_forward_dual(const Mlp& net, DualBatch input, MlpDualTrace* trace) {
    if (input.values.cols() != net.input_dim)
        throw ShapeError("mlp_forward_dual: input has " + std::to_string(input.values.cols()) +
                         " columns, network expects " + std::to_string(net.input_dim));
    if (trace) {
        trace->inputs.clear();
        trace->activations.clear();
        trace->pre_tangents.clear();
        trace->inputs.reserve(net.layers.size());
        trace->activations.reserve(net.layers.size());
        trace->pre_tangents.reserve(net.layers.size());
    }
    DualBatch cur = std::move(input);
    for (size_t i = 0; i < net.layers.size(); ++i) {
        Matrix pre;
        DualBatch next;
        try {
            next = propagate_layer(cur, net.weights[i], net.biases[i],
                                   net.layers[i].activation, trace ? &pre : nullptr);
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + ": " + e.what());
        }
        if (trace) {
            trace->inputs.push_back(std::move(cur));
            trace->activations.push_back(next.values);
            trace->pre_tangents.push_back(std::move(pre));
        }
        cur = std::move(next);
    }
    return cur;
}

DualBatch mlp_forward_dual(const Mlp& net, const Matrix& x, bool with_input_tangents,
                           MlpDualTrace* trace) {
    return mlp_forward_dual(net, DualBatch::from_input(x, with_input_tangents), trace);
}

void MlpGradient::scale(double s) {
    for (auto& w : weights) w *= s;
    for (auto& b : biases) b *= s;
}

double MlpGradient::squared_norm() const {
    double n = 0.0;
    for (const auto& w : weights) n += w.squaredNorm();
    for (const auto& b : biases) n += b.squaredNorm();
    return n;
}

bool MlpGradient::all_finite() const {
    for (const auto& w : weights)
        if (!w.allFinite()) return false;
    for (const auto& b : biases)
        if (!b.allFinite()) return false;
    return true;
}

MlpGradient zero_gradient(const Mlp& net) {
    MlpGradient g;
    g.weights.reserve(net.weights.size());
    g.biases.reserve(net.biases.size());
    for (const auto& w : net.weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : net.biases) g.biases.push_back(Vector::Zero(b.size()));
    return g;
}

DualBatch mlp_backward_dual(const Mlp& net, const MlpDualTrace& trace,
                            const DualBatch& out_bar, MlpGradient& grad) {
    const size_t n_layers = net.layers.size();
    if (trace.inputs.size() != n_layers)
        throw ShapeError("mlp_backward_dual: trace does not match network depth");
    if (grad.weights.size() != n_layers) grad = zero_gradient(net);

    DualBatch bar = out_bar;
    for (size_t idx = n_layers; idx-- > 0;) {
        const Matrix& A = trace.activations[idx];
        const Matrix& S = trace.pre_tangents[idx];
        const DualBatch& in = trace.inputs[idx];
        const bool is_tanh = net.layers[idx].activation == Activation::Tanh;
        const Index b = bar.batch;
        const int nt = bar.n_tangents;

        // Cotangent of the pre-activation values. The tangent slabs feed back
        // into it through act'': d(tanh')/dz = -2 A tanh'.
        Matrix zbar;
        Matrix sbar;
        if (is_tanh) {
            const Eigen::ArrayXXd sprime = 1.0 - A.array().square();
            if (nt > 0) {
                sbar.resize(bar.tangents.rows(), bar.tangents.cols());
                Eigen::ArrayXXd acc = Eigen::ArrayXXd::Zero(A.rows(), A.cols());
                for (int d = 0; d < nt; ++d) {
                    const auto tb = bar.tangents.middleRows(static_cast<Index>(d) * b, b).array();
                    acc += tb * S.middleRows(static_cast<Index>(d) * b, b).array();
                    sbar.middleRows(static_cast<Index>(d) * b, b) = (tb * sprime).matrix();
                }
                zbar = ((bar.values.array() - 2.0 * A.array() * acc) * sprime).matrix();
            } else {
                zbar = (bar.values.array() * sprime).matrix();
            }
        } else {
            zbar = bar.values;
            if (nt > 0) sbar = bar.tangents;
        }

        grad.weights[idx].noalias() += zbar.transpose() * in.values;
        if (nt > 0) grad.weights[idx].noalias() += sbar.transpose() * in.tangents;
        grad.biases[idx] += zbar.colwise().sum().transpose();

        DualBatch prev_bar;
        prev_bar.batch = b;
        prev_bar.n_tangents = nt;
        prev_bar.values.noalias() = zbar * net.weights[idx];
        if (nt > 0) prev_bar.tangents.noalias() = sbar * net.weights[idx];
        bar = std::move(prev_bar);
    }
    return bar;
}

}  // namespace gemfnn
