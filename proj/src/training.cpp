#include "gemfnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gemfnn {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must be in (0,1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in (0,1)");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

namespace {

template <typename T>
void adam_update(T& theta, const T& g, T& m, T& v, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2) {
    m = beta1 * m + (1.0 - beta1) * g;
    v = (beta2 * v.array() + (1.0 - beta2) * g.array().square()).matrix();
    theta.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

void adam_update_mlp(Mlp& net, const MlpGradient& g, MlpGradient& m, MlpGradient& v,
                     const TrainConfig& cfg, double bc1, double bc2) {
    for (size_t i = 0; i < net.weights.size(); ++i) {
        adam_update(net.weights[i], g.weights[i], m.weights[i], v.weights[i],
                    cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon, bc1, bc2);
        adam_update(net.biases[i], g.biases[i], m.biases[i], v.biases[i],
                    cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon, bc1, bc2);
    }
}

}  // namespace

AdamState make_adam_state(const CompositeSurrogate& model) {
    AdamState s;
    if (model.nn_L) {
        s.m.nn_L = zero_gradient(*model.nn_L);
        s.v.nn_L = zero_gradient(*model.nn_L);
    }
    if (model.nn_H1) {
        s.m.nn_H1 = zero_gradient(*model.nn_H1);
        s.v.nn_H1 = zero_gradient(*model.nn_H1);
    }
    s.m.nn_H2 = zero_gradient(model.nn_H2);
    s.v.nn_H2 = zero_gradient(model.nn_H2);
    return s;
}

void adam_step(CompositeSurrogate& params, const CompositeGradient& grads,
               AdamState& state, const TrainConfig& cfg) {
    if (!grads.all_finite()) throw NumericError("adam_step: non-finite gradient");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    if (params.nn_L)
        adam_update_mlp(*params.nn_L, *grads.nn_L, *state.m.nn_L, *state.v.nn_L, cfg, bc1, bc2);
    if (params.nn_H1)
        adam_update_mlp(*params.nn_H1, *grads.nn_H1, *state.m.nn_H1, *state.v.nn_H1, cfg, bc1,
                        bc2);
    adam_update_mlp(params.nn_H2, grads.nn_H2, state.m.nn_H2, state.v.nn_H2, cfg, bc1, bc2);
    if (is_multifidelity(params.variant)) {
        double& m = state.m.omega;
        double& v = state.v.omega;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grads.omega;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grads.omega * grads.omega;
        params.omega -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
    }
}

std::vector<std::vector<int>> epoch_batches(int m, int batch, std::mt19937_64& rng) {
    std::vector<int> order(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<int>> batches;
    for (int start = 0; start < m; start += batch) {
        const int end = std::min(m, start + batch);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
}

namespace {

Batch gather(const Matrix& x, const Vector& y, const Matrix& g, const std::vector<int>& idx) {
    Batch b;
    b.x.resize(static_cast<Index>(idx.size()), x.cols());
    b.y.resize(static_cast<Index>(idx.size()));
    const bool has_g = g.rows() > 0;
    if (has_g) b.grad.resize(static_cast<Index>(idx.size()), g.cols());
    for (size_t i = 0; i < idx.size(); ++i) {
        b.x.row(static_cast<Index>(i)) = x.row(idx[i]);
        b.y(static_cast<Index>(i)) = y(idx[i]);
        if (has_g) b.grad.row(static_cast<Index>(i)) = g.row(idx[i]);
    }
    return b;
}

}  // namespace

TrainResult train(CompositeSurrogate& model, const MultiFidelityDataset& data,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (data.dim() != model.input_dim)
        throw ShapeError("train: dataset dimension " + std::to_string(data.dim()) +
                         " does not match model input_dim " + std::to_string(model.input_dim));
    if (uses_gradients(model.variant) && !data.has_hf_gradients())
        throw VariantError(to_string(model.variant) +
                           " training requires high-fidelity gradients block");
    if (is_multifidelity(model.variant)) {
        if (!data.has_low())
            throw VariantError(to_string(model.variant) +
                               " training requires low-fidelity samples block");
        if (model.variant == ModelVariant::GEMFNN && !data.has_lf_gradients())
            throw VariantError("GEMFNN training requires low-fidelity gradients block");
    }

    model.scalers = fit_scalers(data);
    const auto& sc = model.scalers;

    const Matrix xn_H = sc.transform_x(data.x_H);
    const Vector yn_H = sc.transform_yH(data.y_H);
    Matrix gn_H;
    if (uses_gradients(model.variant)) gn_H = sc.transform_grad_H(data.grad_H);

    Matrix xn_L;
    Vector yn_L;
    Matrix gn_L;
    const bool mf = is_multifidelity(model.variant);
    if (mf) {
        xn_L = sc.transform_x(data.x_L);
        yn_L = sc.transform_yL(data.y_L);
        if (model.variant == ModelVariant::GEMFNN) gn_L = sc.transform_grad_L(data.grad_L);
    }

    const int m_H = static_cast<int>(data.x_H.rows());
    const int m_L = mf ? static_cast<int>(data.x_L.rows()) : 0;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> lf_pick(0, std::max(0, m_L - 1));

    TrainResult result;
    result.epoch_loss.reserve(static_cast<size_t>(cfg.epochs));
    std::vector<int> lf_idx;

    AdamState adam = make_adam_state(model);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto batches = epoch_batches(m_H, cfg.batch_size, rng);
        double loss_sum = 0.0;
        for (const auto& hf_idx : batches) {
            const Batch hf = gather(xn_H, yn_H, gn_H, hf_idx);
            Batch lf;
            if (mf) {
                // LF batch matches the HF batch size, drawn with replacement.
                lf_idx.resize(hf_idx.size());
                for (auto& id : lf_idx) id = lf_pick(rng);
                lf = gather(xn_L, yn_L, gn_L, lf_idx);
            }
            auto [loss, grad] = loss_and_gradient(model, hf, mf ? &lf : nullptr);
            if (!std::isfinite(loss)) throw NumericError("train: non-finite loss");
            adam_step(model, grad, adam, cfg);
            loss_sum += loss;
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(batches.size()));
    }
    return result;
}

}  // namespace gemfnn
