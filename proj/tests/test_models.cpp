#include <doctest.h>

#include <random>
#include <sstream>

#include "gemfnn/gradcheck.hpp"
#include "gemfnn/models.hpp"

using namespace gemfnn;

namespace {

Architecture small_arch() {
    Architecture a;
    a.nn_l = {5, 4};
    a.nn_h1 = {3};
    a.nn_h2 = {5};
    return a;
}

// Heads whose outputs are the constants y_lin and y_nonlin regardless of x.
CompositeSurrogate constant_head_model(double y_lin, double y_nonlin, double omega) {
    CompositeSurrogate m = make_surrogate(ModelVariant::MFNN, 1, small_arch(), 3);
    for (Mlp* net : {&*m.nn_H1, &m.nn_H2}) {
        for (auto& w : net->weights) w.setZero();
        for (auto& b : net->biases) b.setZero();
    }
    m.nn_H1->biases.back()(0) = y_lin;
    m.nn_H2.biases.back()(0) = y_nonlin;
    m.omega = omega;
    return m;
}

}  // namespace

TEST_SUITE_BEGIN("models");

TEST_CASE("construction wires the variants correctly") {
    const Architecture arch = small_arch();
    for (ModelVariant v : {ModelVariant::NN, ModelVariant::GENN}) {
        const CompositeSurrogate m = make_surrogate(v, 3, arch, 1);
        CHECK(!m.nn_L.has_value());
        CHECK(!m.nn_H1.has_value());
        CHECK(m.nn_H2.input_dim == 3);
        for (size_t i = 0; i + 1 < m.nn_H2.layers.size(); ++i)
            CHECK(m.nn_H2.layers[i].activation == Activation::Tanh);
        CHECK(m.nn_H2.layers.back().activation == Activation::Linear);
    }
    for (ModelVariant v : {ModelVariant::MFNN, ModelVariant::GEMFNN}) {
        const CompositeSurrogate m = make_surrogate(v, 3, arch, 1);
        REQUIRE(m.nn_L.has_value());
        REQUIRE(m.nn_H1.has_value());
        CHECK(m.nn_L->input_dim == 3);
        CHECK(m.nn_H1->input_dim == 4);  // x plus y_L_hat
        CHECK(m.nn_H2.input_dim == 4);
        for (size_t i = 0; i + 1 < m.nn_H1->layers.size(); ++i)
            CHECK(m.nn_H1->layers[i].activation == Activation::Linear);
        for (size_t i = 0; i + 1 < m.nn_H2.layers.size(); ++i)
            CHECK(m.nn_H2.layers[i].activation == Activation::Tanh);
        CHECK(m.omega == 0.5);
    }
}

TEST_CASE("predict_low rejects single-fidelity variants") {
    const CompositeSurrogate m = make_surrogate(ModelVariant::NN, 2, small_arch(), 1);
    CHECK_THROWS_AS(predict_low(m, Matrix::Random(3, 2)), VariantError);
}

TEST_CASE("zero low-fidelity network predicts zero") {
    CompositeSurrogate m = make_surrogate(ModelVariant::MFNN, 2, small_arch(), 1);
    for (auto& w : m.nn_L->weights) w.setZero();
    for (auto& b : m.nn_L->biases) b.setZero();
    const Vector y = predict_low(m, Matrix::Random(4, 2));
    CHECK((y.array() == 0.0).all());
}

TEST_CASE("NN prediction equals the raw nn_H2 forward") {
    const CompositeSurrogate m = make_surrogate(ModelVariant::NN, 3, small_arch(), 7);
    const Matrix x = Matrix::Random(6, 3);
    const Vector via_model = predict_high_normalized(m, x);
    const Matrix direct = forward(m.nn_H2, x);
    CHECK((via_model.array() == direct.col(0).array()).all());
    // Identity scalers: the physical-space API agrees too.
    CHECK((predict_high(m, x).array() == direct.col(0).array()).all());
}

TEST_CASE("omega endpoints select one head") {
    Matrix x(2, 1);
    x << 0.2, -0.4;
    CHECK((predict_high_normalized(constant_head_model(2.0, 4.0, 1.0), x).array() == 2.0).all());
    CHECK((predict_high_normalized(constant_head_model(2.0, 4.0, 0.0), x).array() == 4.0).all());
    CHECK((predict_high_normalized(constant_head_model(2.0, 4.0, 0.5), x).array() == 3.0).all());
}

TEST_CASE("omega perturbation shifts output by epsilon times the head gap") {
    Matrix x(1, 1);
    x << 0.3;
    const double base = predict_high_normalized(constant_head_model(2.0, 4.0, 0.5), x)(0);
    const double bumped = predict_high_normalized(constant_head_model(2.0, 4.0, 0.75), x)(0);
    CHECK(bumped - base == 0.25 * (2.0 - 4.0));
}

TEST_CASE("loss is zero for exact fits and follows the hand-computed GENN form") {
    // Constant-head model with targets matching: every term vanishes.
    const CompositeSurrogate m = constant_head_model(1.0, 1.0, 0.5);
    Batch hf;
    hf.x = Matrix::Random(4, 1);
    hf.y = Vector::Ones(4);
    Batch lf;
    lf.x = Matrix::Random(4, 1);
    lf.y = mlp_forward_dual(*m.nn_L, lf.x, false).values.col(0);
    CHECK(compute_loss(m, hf, &lf) == 0.0);

    // GENN with perfect values and every gradient component off by delta:
    // loss = D * delta^2.
    const int d = 3;
    Architecture arch;
    arch.nn_h2 = {4};
    const CompositeSurrogate genn = make_surrogate(ModelVariant::GENN, d, arch, 5);
    Batch b;
    b.x = Matrix::Random(4, d);
    auto [vals, grads] = predict_high_normalized_with_gradient(genn, b.x);
    b.y = vals;
    const double delta = 0.5;
    b.grad = grads.array() - delta;
    CHECK(compute_loss(genn, b, nullptr) == d * delta * delta);
}

TEST_CASE("GEMFNN loss equals a naive term-by-term evaluation") {
    std::mt19937_64 rng(13);
    const int d = 2;
    const CompositeSurrogate m = make_surrogate(ModelVariant::GEMFNN, d, small_arch(), rng());
    Batch hf, lf;
    hf.x = Matrix::Random(5, d);
    hf.y = Vector::Random(5);
    hf.grad = Matrix::Random(5, d);
    lf.x = Matrix::Random(7, d);
    lf.y = Vector::Random(7);
    lf.grad = Matrix::Random(7, d);

    // Naive evaluator: explicit loops straight from the printed equations.
    auto [yh, gh] = predict_high_normalized_with_gradient(m, hf.x);
    DualBatch lo = mlp_forward_dual(*m.nn_L, lf.x, true);
    double hf_val = 0, hf_grad = 0, lf_val = 0, lf_grad = 0;
    for (Index l = 0; l < hf.x.rows(); ++l) {
        hf_val += (yh(l) - hf.y(l)) * (yh(l) - hf.y(l));
        for (Index k = 0; k < d; ++k)
            hf_grad += (gh(l, k) - hf.grad(l, k)) * (gh(l, k) - hf.grad(l, k));
    }
    for (Index l = 0; l < lf.x.rows(); ++l) {
        const double r = lo.values(l, 0) - lf.y(l);
        lf_val += r * r;
        for (Index k = 0; k < d; ++k) {
            const double rg = lo.tangent(static_cast<int>(k))(l, 0) - lf.grad(l, k);
            lf_grad += rg * rg;
        }
    }
    const double naive = hf_val / 5 + hf_grad / 5 + lf_val / 7 + lf_grad / 7;
    CHECK(compute_loss(m, hf, &lf) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("loss terms nest: GEMFNN >= MFNN >= NN on identical predictions") {
    std::mt19937_64 rng(31);
    const CompositeSurrogate m = make_surrogate(ModelVariant::GEMFNN, 2, small_arch(), rng());
    Batch hf, lf;
    hf.x = Matrix::Random(4, 2);
    hf.y = Vector::Random(4);
    hf.grad = Matrix::Random(4, 2);
    lf.x = Matrix::Random(5, 2);
    lf.y = Vector::Random(5);
    lf.grad = Matrix::Random(5, 2);
    const LossTerms t = loss_terms(m, hf, &lf);
    const double l_nn = t.hf_value;
    const double l_mfnn = t.hf_value + t.lf_value;
    CHECK(l_nn <= l_mfnn);
    CHECK(l_mfnn <= t.total());

    // The MFNN-variant loss on the same nets sees the same value terms.
    CompositeSurrogate mf = m;
    mf.variant = ModelVariant::MFNN;
    CHECK(compute_loss(mf, hf, &lf) == l_mfnn);
}

TEST_CASE("loss is invariant under batch reordering") {
    std::mt19937_64 rng(41);
    const CompositeSurrogate m = make_surrogate(ModelVariant::GENN, 2, small_arch(), rng());
    Batch b;
    b.x = Matrix::Random(6, 2);
    b.y = Vector::Random(6);
    b.grad = Matrix::Random(6, 2);
    const double base = compute_loss(m, b, nullptr);
    Batch rev;
    rev.x = b.x.colwise().reverse();
    rev.y = b.y.reverse();
    rev.grad = b.grad.colwise().reverse();
    CHECK(compute_loss(m, rev, nullptr) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("missing data blocks raise variant errors") {
    const CompositeSurrogate genn = make_surrogate(ModelVariant::GENN, 2, small_arch(), 1);
    Batch b;
    b.x = Matrix::Random(3, 2);
    b.y = Vector::Random(3);
    CHECK_THROWS_AS(compute_loss(genn, b, nullptr), VariantError);

    const CompositeSurrogate mfnn = make_surrogate(ModelVariant::MFNN, 2, small_arch(), 1);
    CHECK_THROWS_AS(compute_loss(mfnn, b, nullptr), VariantError);
}

TEST_CASE("single-fidelity linear model has gradient w") {
    Architecture arch;
    arch.nn_h2 = {};
    CompositeSurrogate m = make_surrogate(ModelVariant::NN, 2, arch, 1);
    m.nn_H2.weights[0] << 1.5, -2.5;
    const Matrix x = Matrix::Random(3, 2);
    const auto [y, g] = predict_high_normalized_with_gradient(m, x);
    (void)y;
    for (Index r = 0; r < 3; ++r) {
        CHECK(g(r, 0) == 1.5);
        CHECK(g(r, 1) == -2.5);
    }
}

TEST_CASE("zero-weight y_L column reduces to the direct-path jacobian") {
    CompositeSurrogate m = make_surrogate(ModelVariant::GEMFNN, 2, small_arch(), 9);
    const Index d = 2;
    m.nn_H1->weights[0].col(d).setZero();
    m.nn_H2.weights[0].col(d).setZero();
    const Matrix x = Matrix::Random(3, d);
    const auto [y, g] = predict_high_normalized_with_gradient(m, x);
    (void)y;

    // Direct path: jacobian of the heads in their first D input columns.
    const Vector yl = predict_low_normalized(m, x);
    Matrix u(3, d + 1);
    u << x, yl;
    const auto [y1, j1] = forward_with_input_jacobian(*m.nn_H1, u);
    const auto [y2, j2] = forward_with_input_jacobian(m.nn_H2, u);
    (void)y1;
    (void)y2;
    for (Index r = 0; r < 3; ++r)
        for (Index k = 0; k < d; ++k) {
            const double expected = m.omega * j1[static_cast<size_t>(r)](0, k) +
                                    (1.0 - m.omega) * j2[static_cast<size_t>(r)](0, k);
            CHECK(g(r, k) == expected);
        }
}

TEST_CASE("composite prediction gradients match finite differences") {
    GradCheckOptions opt;
    opt.trials = 4;
    opt.seed = 61;
    for (ModelVariant v : {ModelVariant::GENN, ModelVariant::MFNN, ModelVariant::GEMFNN}) {
        const CheckResult r = check_prediction_gradient(v, opt);
        INFO(r.name, " worst ", r.worst_err, " at ", r.worst_detail);
        CHECK(r.passed);
    }
}

TEST_CASE("physical-space gradients apply the scaler chain rule") {
    std::mt19937_64 rng(71);
    CompositeSurrogate m = make_surrogate(ModelVariant::GEMFNN, 2, small_arch(), rng());
    m.scalers.x_mean << 1.0, -2.0;
    m.scalers.x_std << 0.5, 3.0;
    m.scalers.yH_mean = 4.0;
    m.scalers.yH_std = 7.0;
    m.scalers.yL_mean = -1.0;
    m.scalers.yL_std = 2.0;
    m.scalers.has_low = true;
    const Matrix x = Matrix::Random(3, 2);
    const auto [y, g] = predict_high_with_gradient(m, x);
    (void)y;
    for (Index r = 0; r < 3; ++r) {
        const Vector fd = central_gradient(
            [&](const Vector& xi) { return predict_high(m, xi.transpose())(0); },
            x.row(r).transpose(), 1e-6);
        for (Index k = 0; k < 2; ++k) CHECK(fd_error(g(r, k), fd(k)) < 1e-6);
    }
}

TEST_CASE("model serialization round trips bit-exactly") {
    std::mt19937_64 rng(81);
    CompositeSurrogate m = make_surrogate(ModelVariant::GEMFNN, 3, small_arch(), rng());
    m.omega = 0.371;
    m.scalers.x_mean.setRandom();
    m.scalers.x_std << 0.7, 1.3, 2.1;
    m.scalers.yH_mean = 0.123456789012345;
    m.scalers.yH_std = 9.87;
    m.scalers.yL_mean = -3.2;
    m.scalers.yL_std = 0.44;
    m.scalers.has_low = true;

    std::stringstream buf;
    write_model(m, buf);
    const CompositeSurrogate back = read_model(buf);
    CHECK(back.variant == m.variant);
    CHECK(back.omega == m.omega);
    CHECK((pack_parameters(back).array() == pack_parameters(m).array()).all());
    CHECK((back.scalers.x_mean.array() == m.scalers.x_mean.array()).all());
    CHECK(back.scalers.yL_std == m.scalers.yL_std);

    std::stringstream again;
    write_model(back, again);
    CHECK(buf.str() == again.str());
}

TEST_SUITE_END();
