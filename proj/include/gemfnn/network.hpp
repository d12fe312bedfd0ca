#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gemfnn/common.hpp"

namespace gemfnn {

enum class Activation { Tanh, Linear };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

struct LayerSpec {
    int width = 0;
    Activation activation = Activation::Tanh;
};

/// Plain feed-forward network. Weight matrix i has shape
/// (layers[i].width x previous width); the final layer is the output layer.
struct Mlp {
    int input_dim = 0;
    std::vector<LayerSpec> layers;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    int output_dim() const { return layers.empty() ? 0 : layers.back().width; }
    Index parameter_count() const;
};

/// Glorot-uniform weights (bounds +-sqrt(6/(fan_in+fan_out))), zero biases.
/// Deterministic given seed.
Mlp init_mlp(int input_dim, const std::vector<LayerSpec>& specs, std::uint64_t seed);

Matrix forward(const Mlp& net, const Matrix& x);

/// Values plus the exact Jacobian of each output with respect to the input:
/// jacobians[b] has shape (out_dim x input_dim).
std::pair<Matrix, std::vector<Matrix>> forward_with_input_jacobian(const Mlp& net,
                                                                   const Matrix& x);

// Textual parameter serialization, 17 significant digits per entry: layer
// shapes first, then per layer the row-major weights and the biases.
// Round-trips losslessly in double precision.
void write_mlp(const Mlp& net, std::ostream& out);
Mlp read_mlp(std::istream& in);

}  // namespace gemfnn
