#include "gemfnn/network.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>

#include "gemfnn/diffengine.hpp"

namespace gemfnn {

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "linear") return Activation::Linear;
    throw ConfigError("unknown activation '" + s + "' (expected tanh or linear)");
}

std::string to_string(Activation a) {
    return a == Activation::Tanh ? "tanh" : "linear";
}

Index Mlp::parameter_count() const {
    Index n = 0;
    for (size_t i = 0; i < weights.size(); ++i)
        n += weights[i].size() + biases[i].size();
    return n;
}

Mlp init_mlp(int input_dim, const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    if (input_dim < 1) throw ConfigError("init_mlp: input_dim must be >= 1");
    if (specs.empty()) throw ConfigError("init_mlp: layer list must be nonempty");
    for (const auto& s : specs)
        if (s.width < 1) throw ConfigError("init_mlp: zero-width layer");

    Mlp net;
    net.input_dim = input_dim;
    net.layers = specs;
    net.weights.reserve(specs.size());
    net.biases.reserve(specs.size());

    std::mt19937_64 rng(seed);
    int fan_in = input_dim;
    for (const auto& s : specs) {
        const int fan_out = s.width;
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-bound, bound);
        Matrix w(fan_out, fan_in);
        for (Index r = 0; r < w.rows(); ++r)
            for (Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Vector::Zero(fan_out));
        fan_in = fan_out;
    }
    return net;
}

Matrix forward(const Mlp& net, const Matrix& x) {
    if (!x.allFinite()) throw NumericError("forward: non-finite input");
    return mlp_forward_dual(net, x, /*with_input_tangents=*/false).values;
}

std::pair<Matrix, std::vector<Matrix>> forward_with_input_jacobian(const Mlp& net,
                                                                   const Matrix& x) {
    DualBatch out = mlp_forward_dual(net, x, /*with_input_tangents=*/true);
    std::vector<Matrix> jac(static_cast<size_t>(x.rows()));
    const int out_dim = net.output_dim();
    for (Index b = 0; b < x.rows(); ++b) {
        Matrix j(out_dim, x.cols());
        for (int d = 0; d < out.n_tangents; ++d) j.col(d) = out.tangent(d).row(b).transpose();
        jac[static_cast<size_t>(b)] = std::move(j);
    }
    return {std::move(out.values), std::move(jac)};
}

void write_mlp(const Mlp& net, std::ostream& out) {
    out << "mlp " << net.input_dim << " " << net.layers.size() << "\n";
    for (const auto& l : net.layers)
        out << "layer " << l.width << " " << to_string(l.activation) << "\n";
    char buf[40];
    for (size_t i = 0; i < net.weights.size(); ++i) {
        const Matrix& w = net.weights[i];
        for (Index r = 0; r < w.rows(); ++r)
            for (Index c = 0; c < w.cols(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", w(r, c));
                out << buf << "\n";
            }
        for (Index r = 0; r < net.biases[i].size(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.17g", net.biases[i](r));
            out << buf << "\n";
        }
    }
}

Mlp read_mlp(std::istream& in) {
    std::string tag;
    int input_dim = 0;
    size_t n_layers = 0;
    if (!(in >> tag >> input_dim >> n_layers) || tag != "mlp")
        throw IoError("malformed network serialization: expected 'mlp <input_dim> <layers>'");
    std::vector<LayerSpec> specs;
    specs.reserve(n_layers);
    for (size_t i = 0; i < n_layers; ++i) {
        std::string act;
        int width = 0;
        if (!(in >> tag >> width >> act) || tag != "layer")
            throw IoError("malformed network serialization: bad layer header");
        specs.push_back({width, activation_from_string(act)});
    }
    Mlp net;
    net.input_dim = input_dim;
    net.layers = specs;
    int fan_in = input_dim;
    for (const auto& s : specs) {
        Matrix w(s.width, fan_in);
        for (Index r = 0; r < w.rows(); ++r)
            for (Index c = 0; c < w.cols(); ++c)
                if (!(in >> w(r, c))) throw IoError("truncated network weights");
        Vector b(s.width);
        for (Index r = 0; r < b.size(); ++r)
            if (!(in >> b(r))) throw IoError("truncated network biases");
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
        fan_in = s.width;
    }
    return net;
}

}  // namespace gemfnn
