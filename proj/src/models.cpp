#include "gemfnn/models.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gemfnn {

ModelVariant variant_from_string(const std::string& s) {
    if (s == "NN") return ModelVariant::NN;
    if (s == "GENN") return ModelVariant::GENN;
    if (s == "MFNN") return ModelVariant::MFNN;
    if (s == "GEMFNN") return ModelVariant::GEMFNN;
    throw ConfigError("unknown model variant '" + s + "' (expected NN, GENN, MFNN, GEMFNN)");
}

std::string to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::NN: return "NN";
        case ModelVariant::GENN: return "GENN";
        case ModelVariant::MFNN: return "MFNN";
        case ModelVariant::GEMFNN: return "GEMFNN";
    }
    return "?";
}

bool is_multifidelity(ModelVariant v) {
    return v == ModelVariant::MFNN || v == ModelVariant::GEMFNN;
}

bool uses_gradients(ModelVariant v) {
    return v == ModelVariant::GENN || v == ModelVariant::GEMFNN;
}

namespace {

std::vector<LayerSpec> hidden_plus_output(const std::vector<int>& hidden, Activation act) {
    std::vector<LayerSpec> specs;
    specs.reserve(hidden.size() + 1);
    for (int w : hidden) specs.push_back({w, act});
    specs.push_back({1, Activation::Linear});  // scalar regression output
    return specs;
}

}  // namespace

CompositeSurrogate make_surrogate(ModelVariant variant, int input_dim,
                                  const Architecture& arch, std::uint64_t seed) {
    if (input_dim < 1) throw ConfigError("make_surrogate: input_dim must be >= 1");
    CompositeSurrogate m;
    m.variant = variant;
    m.input_dim = input_dim;
    m.scalers = NormalizationScalers::identity(input_dim);
    if (is_multifidelity(variant)) {
        // Heads see x concatenated with y_L_hat.
        m.nn_L = init_mlp(input_dim, hidden_plus_output(arch.nn_l, Activation::Tanh),
                          mix_seed(seed, 10));
        m.nn_H1 = init_mlp(input_dim + 1, hidden_plus_output(arch.nn_h1, Activation::Linear),
                           mix_seed(seed, 11));
        m.nn_H2 = init_mlp(input_dim + 1, hidden_plus_output(arch.nn_h2, Activation::Tanh),
                           mix_seed(seed, 12));
        m.omega = 0.5;
    } else {
        m.nn_H2 = init_mlp(input_dim, hidden_plus_output(arch.nn_h2, Activation::Tanh),
                           mix_seed(seed, 12));
    }
    return m;
}

namespace {

// One normalized-space pass through the composite, with optional traces for
// the reverse sweep.
struct CompositeForward {
    DualBatch out_L;   // nn_L output on the same batch (multifidelity only)
    DualBatch out_H1;
    DualBatch out_H2;
    Vector values;     // mixed prediction
    Matrix tangents;   // batch x D, empty when tangents were not requested
    MlpDualTrace trace_L, trace_H1, trace_H2;
};

DualBatch augment_input(const Matrix& xn, const DualBatch& out_L, bool with_tangents) {
    const Index b = xn.rows();
    const Index d = xn.cols();
    DualBatch u;
    u.batch = b;
    u.values.resize(b, d + 1);
    u.values << xn, out_L.values;
    if (with_tangents) {
        u.n_tangents = static_cast<int>(d);
        u.tangents = Matrix::Zero(d * b, d + 1);
        for (int k = 0; k < static_cast<int>(d); ++k) {
            u.tangent(k).col(k).setOnes();
            u.tangent(k).col(d) = out_L.tangent(k).col(0);
        }
    }
    return u;
}

void composite_forward(const CompositeSurrogate& model, const Matrix& xn,
                       bool with_tangents, bool with_trace, CompositeForward& fwd) {
    if (xn.cols() != model.input_dim)
        throw ShapeError("composite forward: input has " + std::to_string(xn.cols()) +
                         " columns, model expects " + std::to_string(model.input_dim));
    const Index b = xn.rows();
    if (is_multifidelity(model.variant)) {
        fwd.out_L = mlp_forward_dual(*model.nn_L, xn, with_tangents,
                                     with_trace ? &fwd.trace_L : nullptr);
        DualBatch u = augment_input(xn, fwd.out_L, with_tangents);
        fwd.out_H1 = mlp_forward_dual(*model.nn_H1, u, with_trace ? &fwd.trace_H1 : nullptr);
        fwd.out_H2 = mlp_forward_dual(model.nn_H2, std::move(u),
                                      with_trace ? &fwd.trace_H2 : nullptr);
        const double w = model.omega;
        fwd.values = w * fwd.out_H1.values.col(0) + (1.0 - w) * fwd.out_H2.values.col(0);
        if (with_tangents) {
            fwd.tangents.resize(b, xn.cols());
            for (int k = 0; k < static_cast<int>(xn.cols()); ++k)
                fwd.tangents.col(k) = w * fwd.out_H1.tangent(k).col(0) +
                                      (1.0 - w) * fwd.out_H2.tangent(k).col(0);
        }
    } else {
        fwd.out_H2 = mlp_forward_dual(model.nn_H2, xn, with_tangents,
                                      with_trace ? &fwd.trace_H2 : nullptr);
        fwd.values = fwd.out_H2.values.col(0);
        if (with_tangents) {
            fwd.tangents.resize(b, xn.cols());
            for (int k = 0; k < static_cast<int>(xn.cols()); ++k)
                fwd.tangents.col(k) = fwd.out_H2.tangent(k).col(0);
        }
    }
}

// Reverse sweep through the composite given cotangents of the mixed
// prediction values (ybar) and tangents (tbar, may be empty).
void composite_backward(const CompositeSurrogate& model, const CompositeForward& fwd,
                        const Vector& ybar, const Matrix& tbar, CompositeGradient& grad) {
    const Index b = ybar.size();
    const int nt = tbar.size() > 0 ? static_cast<int>(tbar.cols()) : 0;

    auto head_bar = [&](double scale) {
        DualBatch bar;
        bar.batch = b;
        bar.n_tangents = nt;
        bar.values = scale * ybar;
        if (nt > 0) {
            bar.tangents.resize(static_cast<Index>(nt) * b, 1);
            for (int k = 0; k < nt; ++k) bar.tangent(k).col(0) = scale * tbar.col(k);
        }
        return bar;
    };

    if (is_multifidelity(model.variant)) {
        const double w = model.omega;
        grad.omega += ybar.dot(fwd.out_H1.values.col(0) - fwd.out_H2.values.col(0));
        for (int k = 0; k < nt; ++k)
            grad.omega += tbar.col(k).dot(fwd.out_H1.tangent(k).col(0) -
                                          fwd.out_H2.tangent(k).col(0));

        DualBatch u_bar1 = mlp_backward_dual(*model.nn_H1, fwd.trace_H1, head_bar(w), *grad.nn_H1);
        DualBatch u_bar2 =
            mlp_backward_dual(model.nn_H2, fwd.trace_H2, head_bar(1.0 - w), grad.nn_H2);

        // Only the y_L_hat column of the augmented input chains back into
        // nn_L; the x columns are data.
        const Index d = model.input_dim;
        DualBatch l_bar;
        l_bar.batch = b;
        l_bar.n_tangents = nt;
        l_bar.values = u_bar1.values.col(d) + u_bar2.values.col(d);
        if (nt > 0) {
            l_bar.tangents.resize(static_cast<Index>(nt) * b, 1);
            for (int k = 0; k < nt; ++k)
                l_bar.tangent(k).col(0) =
                    u_bar1.tangent(k).col(d) + u_bar2.tangent(k).col(d);
        }
        mlp_backward_dual(*model.nn_L, fwd.trace_L, l_bar, *grad.nn_L);
    } else {
        mlp_backward_dual(model.nn_H2, fwd.trace_H2, head_bar(1.0), grad.nn_H2);
    }
}

CompositeGradient zero_composite_gradient(const CompositeSurrogate& model) {
    CompositeGradient g;
    if (model.nn_L) g.nn_L = zero_gradient(*model.nn_L);
    if (model.nn_H1) g.nn_H1 = zero_gradient(*model.nn_H1);
    g.nn_H2 = zero_gradient(model.nn_H2);
    return g;
}

void check_batches(const CompositeSurrogate& model, const Batch& hf, const Batch* lf) {
    if (hf.x.rows() == 0) throw DataError("loss: empty high-fidelity batch");
    if (hf.y.size() != hf.x.rows())
        throw ShapeError("loss: high-fidelity batch x/y row mismatch");
    if (uses_gradients(model.variant)) {
        if (!hf.has_gradients())
            throw VariantError(to_string(model.variant) +
                               " requires high-fidelity gradients, none in batch");
        if (hf.grad.rows() != hf.x.rows() || hf.grad.cols() != hf.x.cols())
            throw ShapeError("loss: high-fidelity gradient block shape mismatch");
    }
    if (is_multifidelity(model.variant)) {
        if (lf == nullptr || lf->x.rows() == 0)
            throw VariantError(to_string(model.variant) +
                               " requires a low-fidelity batch, none given");
        if (lf->y.size() != lf->x.rows())
            throw ShapeError("loss: low-fidelity batch x/y row mismatch");
        if (model.variant == ModelVariant::GEMFNN) {
            if (!lf->has_gradients())
                throw VariantError("GEMFNN requires low-fidelity gradients, none in batch");
            if (lf->grad.rows() != lf->x.rows() || lf->grad.cols() != lf->x.cols())
                throw ShapeError("loss: low-fidelity gradient block shape mismatch");
        }
    }
}

void check_term(double v, const char* term) {
    if (!std::isfinite(v))
        throw NumericError(std::string("non-finite ") + term + " term in loss");
}

// Shared core of compute_loss and loss_and_gradient.
LossTerms evaluate_loss(const CompositeSurrogate& model, const Batch& hf, const Batch* lf,
                        CompositeGradient* grad) {
    check_batches(model, hf, lf);
    const bool hf_tangents = uses_gradients(model.variant);
    const bool lf_tangents = model.variant == ModelVariant::GEMFNN;
    const bool mf = is_multifidelity(model.variant);
    const double n_hf = static_cast<double>(hf.x.rows());

    LossTerms terms;

    CompositeForward fwd;
    composite_forward(model, hf.x, hf_tangents, grad != nullptr, fwd);
    const Vector value_residual = fwd.values - hf.y;
    terms.hf_value = value_residual.squaredNorm() / n_hf;
    check_term(terms.hf_value, "high-fidelity value");

    Matrix tangent_residual;
    if (hf_tangents) {
        tangent_residual = fwd.tangents - hf.grad;
        terms.hf_gradient = tangent_residual.squaredNorm() / n_hf;
        check_term(terms.hf_gradient, "high-fidelity gradient");
    }

    DualBatch lf_out;
    MlpDualTrace lf_trace;
    Vector lf_value_residual;
    Matrix lf_tangent_residual;
    double n_lf = 0.0;
    if (mf) {
        n_lf = static_cast<double>(lf->x.rows());
        lf_out = mlp_forward_dual(*model.nn_L, lf->x, lf_tangents,
                                  grad ? &lf_trace : nullptr);
        lf_value_residual = lf_out.values.col(0) - lf->y;
        terms.lf_value = lf_value_residual.squaredNorm() / n_lf;
        check_term(terms.lf_value, "low-fidelity value");
        if (lf_tangents) {
            lf_tangent_residual.resize(lf->x.rows(), lf->x.cols());
            for (int k = 0; k < static_cast<int>(lf->x.cols()); ++k)
                lf_tangent_residual.col(k) = lf_out.tangent(k).col(0) - lf->grad.col(k);
            terms.lf_gradient = lf_tangent_residual.squaredNorm() / n_lf;
            check_term(terms.lf_gradient, "low-fidelity gradient");
        }
    }

    if (grad) {
        *grad = zero_composite_gradient(model);
        const Vector ybar = (2.0 / n_hf) * value_residual;
        Matrix tbar;
        if (hf_tangents) tbar = (2.0 / n_hf) * tangent_residual;
        composite_backward(model, fwd, ybar, tbar, *grad);

        if (mf) {
            DualBatch bar;
            bar.batch = lf->x.rows();
            bar.n_tangents = lf_tangents ? static_cast<int>(lf->x.cols()) : 0;
            bar.values = (2.0 / n_lf) * lf_value_residual;
            if (lf_tangents) {
                bar.tangents.resize(static_cast<Index>(bar.n_tangents) * bar.batch, 1);
                for (int k = 0; k < bar.n_tangents; ++k)
                    bar.tangent(k).col(0) = (2.0 / n_lf) * lf_tangent_residual.col(k);
            }
            mlp_backward_dual(*model.nn_L, lf_trace, bar, *grad->nn_L);
        }
    }
    return terms;
}

}  // namespace

bool CompositeGradient::all_finite() const {
    if (nn_L && !nn_L->all_finite()) return false;
    if (nn_H1 && !nn_H1->all_finite()) return false;
    if (!nn_H2.all_finite()) return false;
    return std::isfinite(omega);
}

LossTerms loss_terms(const CompositeSurrogate& model, const Batch& hf, const Batch* lf) {
    return evaluate_loss(model, hf, lf, nullptr);
}

double compute_loss(const CompositeSurrogate& model, const Batch& hf, const Batch* lf) {
    return evaluate_loss(model, hf, lf, nullptr).total();
}

std::pair<double, CompositeGradient> loss_and_gradient(const CompositeSurrogate& model,
                                                       const Batch& hf, const Batch* lf) {
    CompositeGradient grad;
    const LossTerms terms = evaluate_loss(model, hf, lf, &grad);
    return {terms.total(), std::move(grad)};
}

Vector predict_low_normalized(const CompositeSurrogate& model, const Matrix& xn) {
    if (!is_multifidelity(model.variant))
        throw VariantError("predict_low: variant " + to_string(model.variant) +
                           " has no low-fidelity network");
    return mlp_forward_dual(*model.nn_L, xn, false).values.col(0);
}

Vector predict_high_normalized(const CompositeSurrogate& model, const Matrix& xn) {
    CompositeForward fwd;
    composite_forward(model, xn, false, false, fwd);
    return fwd.values;
}

std::pair<Vector, Matrix> predict_high_normalized_with_gradient(
    const CompositeSurrogate& model, const Matrix& xn) {
    CompositeForward fwd;
    composite_forward(model, xn, true, false, fwd);
    return {std::move(fwd.values), std::move(fwd.tangents)};
}

Vector predict_low(const CompositeSurrogate& model, const Matrix& x) {
    return model.scalers.inverse_yL(predict_low_normalized(model, model.scalers.transform_x(x)));
}

Vector predict_high(const CompositeSurrogate& model, const Matrix& x) {
    return model.scalers.inverse_yH(predict_high_normalized(model, model.scalers.transform_x(x)));
}

std::pair<Vector, Matrix> predict_high_with_gradient(const CompositeSurrogate& model,
                                                     const Matrix& x) {
    auto [yn, gn] = predict_high_normalized_with_gradient(model, model.scalers.transform_x(x));
    return {model.scalers.inverse_yH(yn), model.scalers.inverse_grad_H(gn)};
}

namespace {

void pack_mlp(const Mlp& net, Vector& out, Index& pos) {
    for (size_t i = 0; i < net.weights.size(); ++i) {
        const Matrix& w = net.weights[i];
        for (Index r = 0; r < w.rows(); ++r)
            for (Index c = 0; c < w.cols(); ++c) out(pos++) = w(r, c);
        for (Index r = 0; r < net.biases[i].size(); ++r) out(pos++) = net.biases[i](r);
    }
}

void unpack_mlp(Mlp& net, const Vector& in, Index& pos) {
    for (size_t i = 0; i < net.weights.size(); ++i) {
        Matrix& w = net.weights[i];
        for (Index r = 0; r < w.rows(); ++r)
            for (Index c = 0; c < w.cols(); ++c) w(r, c) = in(pos++);
        for (Index r = 0; r < net.biases[i].size(); ++r) net.biases[i](r) = in(pos++);
    }
}

void pack_mlp_gradient(const MlpGradient& g, Vector& out, Index& pos) {
    for (size_t i = 0; i < g.weights.size(); ++i) {
        const Matrix& w = g.weights[i];
        for (Index r = 0; r < w.rows(); ++r)
            for (Index c = 0; c < w.cols(); ++c) out(pos++) = w(r, c);
        for (Index r = 0; r < g.biases[i].size(); ++r) out(pos++) = g.biases[i](r);
    }
}

Index total_parameters(const CompositeSurrogate& m) {
    Index n = m.nn_H2.parameter_count();
    if (m.nn_L) n += m.nn_L->parameter_count();
    if (m.nn_H1) n += m.nn_H1->parameter_count();
    if (is_multifidelity(m.variant)) n += 1;  // omega
    return n;
}

}  // namespace

Vector pack_parameters(const CompositeSurrogate& model) {
    Vector theta(total_parameters(model));
    Index pos = 0;
    if (model.nn_L) pack_mlp(*model.nn_L, theta, pos);
    if (model.nn_H1) pack_mlp(*model.nn_H1, theta, pos);
    pack_mlp(model.nn_H2, theta, pos);
    if (is_multifidelity(model.variant)) theta(pos++) = model.omega;
    return theta;
}

void unpack_parameters(CompositeSurrogate& model, const Vector& theta) {
    if (theta.size() != total_parameters(model))
        throw ShapeError("unpack_parameters: length mismatch");
    Index pos = 0;
    if (model.nn_L) unpack_mlp(*model.nn_L, theta, pos);
    if (model.nn_H1) unpack_mlp(*model.nn_H1, theta, pos);
    unpack_mlp(model.nn_H2, theta, pos);
    if (is_multifidelity(model.variant)) model.omega = theta(pos++);
}

Vector pack_gradient(const CompositeSurrogate& model, const CompositeGradient& grad) {
    Vector g(total_parameters(model));
    Index pos = 0;
    if (grad.nn_L) pack_mlp_gradient(*grad.nn_L, g, pos);
    if (grad.nn_H1) pack_mlp_gradient(*grad.nn_H1, g, pos);
    pack_mlp_gradient(grad.nn_H2, g, pos);
    if (is_multifidelity(model.variant)) g(pos++) = grad.omega;
    return g;
}

void write_model(const CompositeSurrogate& model, std::ostream& out) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", model.omega);
    out << "gemfnn-model 1\n"
        << "variant " << to_string(model.variant) << "\n"
        << "input_dim " << model.input_dim << "\n"
        << "omega " << buf << "\n";
    write_scalers(model.scalers, out);
    out << "nn_L " << (model.nn_L ? 1 : 0) << "\n";
    if (model.nn_L) write_mlp(*model.nn_L, out);
    out << "nn_H1 " << (model.nn_H1 ? 1 : 0) << "\n";
    if (model.nn_H1) write_mlp(*model.nn_H1, out);
    out << "nn_H2 1\n";
    write_mlp(model.nn_H2, out);
}

void write_model(const CompositeSurrogate& model, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    write_model(model, f);
    if (!f) throw IoError("failed writing model to '" + path + "'");
}

CompositeSurrogate read_model(std::istream& in) {
    std::string tag, variant;
    int version = 0;
    if (!(in >> tag >> version) || tag != "gemfnn-model" || version != 1)
        throw IoError("not a gemfnn model file");
    CompositeSurrogate m;
    int input_dim = 0;
    double omega = 0.0;
    if (!(in >> tag >> variant) || tag != "variant") throw IoError("model file: missing variant");
    if (!(in >> tag >> input_dim) || tag != "input_dim")
        throw IoError("model file: missing input_dim");
    if (!(in >> tag >> omega) || tag != "omega") throw IoError("model file: missing omega");
    m.variant = variant_from_string(variant);
    m.input_dim = input_dim;
    m.omega = omega;
    m.scalers = read_scalers(in);
    int present = 0;
    if (!(in >> tag >> present) || tag != "nn_L") throw IoError("model file: missing nn_L block");
    if (present) m.nn_L = read_mlp(in);
    if (!(in >> tag >> present) || tag != "nn_H1") throw IoError("model file: missing nn_H1 block");
    if (present) m.nn_H1 = read_mlp(in);
    if (!(in >> tag >> present) || tag != "nn_H2" || !present)
        throw IoError("model file: missing nn_H2 block");
    m.nn_H2 = read_mlp(in);
    if (is_multifidelity(m.variant) && (!m.nn_L || !m.nn_H1))
        throw DataError("model file: multifidelity variant lacks nn_L or nn_H1");
    return m;
}

CompositeSurrogate read_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open model file '" + path + "'");
    return read_model(f);
}

}  // namespace gemfnn
