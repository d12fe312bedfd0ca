#include "gemfnn/gradcheck.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace gemfnn {

bool fd_close(double a, double b, double rel_tol, double abs_floor) {
    const double diff = std::abs(a - b);
    return diff <= std::max(rel_tol * std::max(std::abs(a), std::abs(b)), abs_floor);
}

double fd_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                        double step) {
    Vector g(x.size());
    Vector p = x;
    for (Index i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x(i)));
        const double orig = p(i);
        p(i) = orig + h;
        const double fp = f(p);
        p(i) = orig - h;
        const double fm = f(p);
        p(i) = orig;
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

Vector central_gradient4(const std::function<double(const Vector&)>& f, const Vector& x,
                         double step) {
    Vector g(x.size());
    Vector p = x;
    for (Index i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x(i)));
        const double orig = p(i);
        auto at = [&](double v) {
            p(i) = v;
            return f(p);
        };
        const double f2p = at(orig + 2.0 * h);
        const double f1p = at(orig + h);
        const double f1m = at(orig - h);
        const double f2m = at(orig - 2.0 * h);
        p(i) = orig;
        g(i) = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h);
    }
    return g;
}

namespace {

struct WorstTracker {
    CheckResult result;
    double rel_tol;
    double abs_floor;

    WorstTracker(std::string name, double rel, double floor) {
        result.name = std::move(name);
        result.tolerance = rel;
        rel_tol = rel;
        abs_floor = floor;
    }

    void observe(double analytic, double reference, const std::string& detail) {
        if (!fd_close(analytic, reference, rel_tol, abs_floor)) result.passed = false;
        // Scaled so that worst_err <= rel_tol iff every component passed.
        const double scale = std::max({std::abs(analytic), std::abs(reference),
                                       abs_floor / rel_tol});
        const double err = std::abs(analytic - reference) / scale;
        if (err > result.worst_err) {
            result.worst_err = err;
            result.worst_detail = detail;
        }
    }
};

Mlp random_mlp(std::mt19937_64& rng, int input_dim, int max_hidden_layers, int max_width,
               bool tanh_hidden = true) {
    std::uniform_int_distribution<int> n_layers(1, max_hidden_layers);
    std::uniform_int_distribution<int> width(2, max_width);
    std::vector<LayerSpec> specs;
    const int hidden = n_layers(rng);
    for (int i = 0; i < hidden; ++i)
        specs.push_back({width(rng), tanh_hidden ? Activation::Tanh : Activation::Linear});
    specs.push_back({1, Activation::Linear});
    return init_mlp(input_dim, specs, rng());
}

Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = u(rng);
    return m;
}

CompositeSurrogate random_surrogate(std::mt19937_64& rng, ModelVariant variant, int dim) {
    std::uniform_int_distribution<int> width(2, 6);
    Architecture arch;
    arch.nn_l = {width(rng), width(rng)};
    arch.nn_h1 = {width(rng)};
    arch.nn_h2 = {width(rng), width(rng)};
    return make_surrogate(variant, dim, arch, rng());
}

// Random normalized-space batches with targets detached from the model, so
// loss residuals and their gradients are generic.
void random_batches(std::mt19937_64& rng, int dim, Batch& hf, Batch& lf, bool hf_grads,
                    bool lf_grads) {
    std::uniform_int_distribution<int> rows(2, 5);
    const Index n_hf = rows(rng);
    hf.x = random_matrix(rng, n_hf, dim, 1.5);
    hf.y = random_matrix(rng, n_hf, 1, 2.0).col(0);
    if (hf_grads) hf.grad = random_matrix(rng, n_hf, dim, 2.0);
    const Index n_lf = rows(rng);
    lf.x = random_matrix(rng, n_lf, dim, 1.5);
    lf.y = random_matrix(rng, n_lf, 1, 2.0).col(0);
    if (lf_grads) lf.grad = random_matrix(rng, n_lf, dim, 2.0);
}

}  // namespace

CheckResult check_layer_tangents(const GradCheckOptions& opt) {
    // Tangents of a single layer against finite differences of its value map,
    // seeded with identity tangents.
    WorstTracker w("layer tangent propagation", 1e-6, opt.abs_floor);
    std::mt19937_64 rng(mix_seed(opt.seed, 0xA1));
    std::uniform_int_distribution<int> dims(1, 6);
    for (int trial = 0; trial < opt.trials; ++trial) {
        const int n_in = dims(rng);
        const int n_out = dims(rng);
        const Matrix W = random_matrix(rng, n_out, n_in, 1.0);
        const Vector b = random_matrix(rng, n_out, 1, 0.5).col(0);
        const Activation act = (trial % 2 == 0) ? Activation::Tanh : Activation::Linear;
        const Matrix x = random_matrix(rng, 3, n_in, 1.0);

        DualBatch out = propagate_layer(DualBatch::from_input(x, true), W, b, act);
        for (Index r = 0; r < x.rows(); ++r) {
            for (int o = 0; o < n_out; ++o) {
                auto value_of = [&](const Vector& xi) {
                    DualBatch v = propagate_layer(DualBatch::from_input(xi.transpose(), false),
                                                  W, b, act);
                    return v.values(0, o);
                };
                const Vector fd = central_gradient(value_of, x.row(r).transpose(), opt.fd_step);
                for (int d = 0; d < n_in; ++d) {
                    std::ostringstream detail;
                    detail << "trial " << trial << " row " << r << " out " << o << " dim " << d;
                    w.observe(out.tangent(d)(r, o), fd(d), detail.str());
                }
            }
        }
    }
    return w.result;
}

CheckResult check_input_jacobians(const GradCheckOptions& opt) {
    WorstTracker w("network input jacobian", 1e-6, opt.abs_floor);
    std::mt19937_64 rng(mix_seed(opt.seed, 0xA2));
    std::uniform_int_distribution<int> dims(1, 20);
    for (int trial = 0; trial < opt.trials; ++trial) {
        const int d = dims(rng);
        const Mlp net = random_mlp(rng, d, 3, 8);
        const Matrix x = random_matrix(rng, 2, d, 1.5);
        const auto [values, jac] = forward_with_input_jacobian(net, x);
        (void)values;
        for (Index r = 0; r < x.rows(); ++r) {
            auto value_of = [&](const Vector& xi) {
                return forward(net, xi.transpose())(0, 0);
            };
            const Vector fd = central_gradient(value_of, x.row(r).transpose(), opt.fd_step);
            for (int k = 0; k < d; ++k) {
                std::ostringstream detail;
                detail << "trial " << trial << " row " << r << " dim " << k;
                w.observe(jac[static_cast<size_t>(r)](0, k), fd(k), detail.str());
            }
        }
    }
    return w.result;
}

CheckResult check_loss_gradient(ModelVariant variant, const GradCheckOptions& opt) {
    WorstTracker w("loss parameter gradient (" + to_string(variant) + ")", opt.rel_tol,
                   opt.abs_floor);
    std::mt19937_64 rng(mix_seed(opt.seed, 0xB0 + static_cast<std::uint64_t>(variant)));
    std::uniform_int_distribution<int> dims(1, 4);
    for (int trial = 0; trial < opt.trials; ++trial) {
        const int d = dims(rng);
        CompositeSurrogate model = random_surrogate(rng, variant, d);
        Batch hf, lf;
        random_batches(rng, d, hf, lf, uses_gradients(variant),
                       variant == ModelVariant::GEMFNN);
        const Batch* lf_ptr = is_multifidelity(variant) ? &lf : nullptr;

        const auto [loss, grad] = loss_and_gradient(model, hf, lf_ptr);
        (void)loss;
        const Vector analytic = pack_gradient(model, grad);
        const Vector theta0 = pack_parameters(model);
        auto loss_of = [&](const Vector& theta) {
            CompositeSurrogate probe = model;
            unpack_parameters(probe, theta);
            return compute_loss(probe, hf, lf_ptr);
        };
        const Vector fd = central_gradient(loss_of, theta0, opt.fd_step);
        for (Index i = 0; i < analytic.size(); ++i) {
            std::ostringstream detail;
            detail << "trial " << trial << " theta[" << i << "]";
            w.observe(analytic(i), fd(i), detail.str());
        }
    }
    return w.result;
}

CheckResult check_prediction_gradient(ModelVariant variant, const GradCheckOptions& opt) {
    WorstTracker w("prediction gradient (" + to_string(variant) + ")", 1e-6, opt.abs_floor);
    std::mt19937_64 rng(mix_seed(opt.seed, 0xC0 + static_cast<std::uint64_t>(variant)));
    std::uniform_int_distribution<int> dims(1, 4);
    for (int trial = 0; trial < opt.trials; ++trial) {
        const int d = dims(rng);
        const CompositeSurrogate model = random_surrogate(rng, variant, d);
        const Matrix x = random_matrix(rng, 3, d, 1.5);
        const auto [values, grads] = predict_high_normalized_with_gradient(model, x);
        (void)values;
        for (Index r = 0; r < x.rows(); ++r) {
            auto value_of = [&](const Vector& xi) {
                return predict_high_normalized(model, xi.transpose())(0);
            };
            const Vector fd = central_gradient(value_of, x.row(r).transpose(), opt.fd_step);
            for (int k = 0; k < d; ++k) {
                std::ostringstream detail;
                detail << "trial " << trial << " row " << r << " dim " << k;
                w.observe(grads(r, k), fd(k), detail.str());
            }
        }
    }
    return w.result;
}

namespace {

Matrix random_interior_points(const Domain& dom, int n, std::mt19937_64& rng) {
    // Stay slightly inside the box so central differences do not step out.
    std::uniform_real_distribution<double> u(0.01, 0.99);
    Matrix x(n, dom.dim());
    for (int i = 0; i < n; ++i)
        for (Index k = 0; k < dom.dim(); ++k)
            x(i, k) = dom.lower(k) + u(rng) * (dom.upper(k) - dom.lower(k));
    return x;
}

}  // namespace

CheckResult check_benchmark_gradients(const BenchmarkCase& bench, Fidelity fidelity,
                                      int n_points, double rel_tol, std::uint64_t seed) {
    const std::string fid = fidelity == Fidelity::High ? "HF" : "LF";
    WorstTracker w("benchmark gradient " + bench.name + " " + fid, rel_tol, 1e-8);
    std::mt19937_64 rng(mix_seed(seed, 0xD0 + (fidelity == Fidelity::High ? 0 : 1)));
    const Matrix x = random_interior_points(bench.domain, n_points, rng);
    Vector y;
    Matrix g;
    eval_case(bench, x, fidelity, y, g);
    for (Index r = 0; r < x.rows(); ++r) {
        auto value_of = [&](const Vector& xi) {
            Vector yv;
            Matrix gv;
            eval_case(bench, xi.transpose(), fidelity, yv, gv);
            return yv(0);
        };
        const Vector fd = central_gradient4(value_of, x.row(r).transpose(), 1e-4);
        for (Index k = 0; k < x.cols(); ++k) {
            std::ostringstream detail;
            detail << "point " << r << " dim " << k;
            w.observe(g(r, k), fd(k), detail.str());
        }
    }
    return w.result;
}

CheckResult check_benchmark_identity(const BenchmarkCase& bench, int n_points, double tol,
                                     std::uint64_t seed) {
    CheckResult res;
    res.name = "LF/HF identity " + bench.name;
    res.tolerance = tol;
    std::mt19937_64 rng(mix_seed(seed, 0xE0));
    const Matrix x = random_interior_points(bench.domain, n_points, rng);
    Vector y_hf, y_lf;
    Matrix g_hf, g_lf;
    eval_case(bench, x, Fidelity::High, y_hf, g_hf);
    eval_case(bench, x, Fidelity::Low, y_lf, g_lf);
    for (Index r = 0; r < x.rows(); ++r) {
        double residual = 0.0;
        if (bench.name == "forrester1d") {
            residual = y_lf(r) - 0.5 * y_hf(r) - 10.0 * (x(r, 0) - 0.5) + 5.0;
        } else if (bench.name == "rastrigin2d") {
            residual = y_lf(r) - 0.5 * y_hf(r) - (x(r, 0) - 0.5) - (x(r, 1) - 0.5);
        } else if (bench.name == "f20d") {
            double cross = 0.0;
            for (Index k = 0; k + 1 < x.cols(); ++k) cross += x(r, k) * x(r, k + 1);
            residual = y_lf(r) - 0.8 * y_hf(r) + 0.4 * cross + 50.0;
        } else {
            throw ConfigError("no identity known for case '" + bench.name + "'");
        }
        const double err = std::abs(residual);
        if (err > res.worst_err) {
            res.worst_err = err;
            std::ostringstream detail;
            detail << "point " << r;
            res.worst_detail = detail.str();
        }
        if (err > tol) res.passed = false;
    }
    return res;
}

std::vector<CheckResult> run_all_gradient_checks(const GradCheckOptions& opt) {
    std::vector<CheckResult> results;
    results.push_back(check_layer_tangents(opt));
    results.push_back(check_input_jacobians(opt));
    for (ModelVariant v :
         {ModelVariant::NN, ModelVariant::GENN, ModelVariant::MFNN, ModelVariant::GEMFNN}) {
        results.push_back(check_loss_gradient(v, opt));
        results.push_back(check_prediction_gradient(v, opt));
    }
    for (const auto& name : case_names()) {
        const BenchmarkCase bench = make_case(name);
        results.push_back(check_benchmark_gradients(bench, Fidelity::High, 100, 1e-6, opt.seed));
        results.push_back(check_benchmark_gradients(bench, Fidelity::Low, 100, 1e-6, opt.seed));
        results.push_back(check_benchmark_identity(bench, 100, 1e-12, opt.seed));
    }
    return results;
}

}  // namespace gemfnn
