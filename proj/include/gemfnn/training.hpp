#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gemfnn/models.hpp"

namespace gemfnn {

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 1000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Bias-corrected ADAM accumulators, congruent with the composite's
/// parameter set; t counts completed updates.
struct AdamState {
    CompositeGradient m;
    CompositeGradient v;
    long t = 0;
};

AdamState make_adam_state(const CompositeSurrogate& model);

/// One standard bias-corrected ADAM update, in place. Deterministic.
void adam_step(CompositeSurrogate& params, const CompositeGradient& grads,
               AdamState& state, const TrainConfig& cfg);

/// Shuffled partition of {0..m-1} into batches of size batch (last one may
/// be smaller). Every index appears exactly once.
std::vector<std::vector<int>> epoch_batches(int m, int batch, std::mt19937_64& rng);

struct TrainResult {
    /// Mean per-batch training loss, one entry per epoch.
    std::vector<double> epoch_loss;
};

/// Fits scalers, normalizes the data, and runs epochs of mini-batched ADAM
/// on the variant's loss. Each step pairs one HF mini-batch (epoch
/// partition) with one LF mini-batch of equal size drawn uniformly with
/// replacement. Bit-reproducible given (seed, data, config).
TrainResult train(CompositeSurrogate& model, const MultiFidelityDataset& data,
                  const TrainConfig& cfg);

}  // namespace gemfnn
