#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gemfnn/common.hpp"

namespace gemfnn {

/// Axis-aligned box the benchmark is sampled on.
struct Domain {
    Vector lower;
    Vector upper;

    Index dim() const { return lower.size(); }
    void validate() const;
};

enum class Fidelity { High, Low };

/// One benchmark problem: a high-fidelity function, a cheap low-fidelity
/// companion, and closed-form gradients for both. Evaluators are vectorized
/// over the rows of x.
struct BenchmarkCase {
    std::string name;
    int dim = 0;
    Domain domain;
    std::function<void(const Matrix& x, Vector& y, Matrix& grad)> hf;
    std::function<void(const Matrix& x, Vector& y, Matrix& grad)> lf;
};

/// Known case names: forrester1d, rastrigin2d, f20d.
BenchmarkCase make_case(const std::string& name);
const std::vector<std::string>& case_names();

/// Cartesian grid with endpoints included and uniform spacing per axis.
/// Row-major ordering: the last dimension varies fastest.
Matrix full_factorial(const Domain& domain, const std::vector<int>& points_per_dim);

/// Latin hypercube: per dimension, each of the m strata holds exactly one
/// sample at a uniformly random position; stratum assignment is an
/// independent random permutation per dimension.
Matrix lhs(const Domain& domain, int m, std::uint64_t seed);

void eval_case(const BenchmarkCase& bench, const Matrix& x, Fidelity fidelity,
               Vector& values, Matrix& gradients);

enum class SamplingPlan { FullFactorial, Lhs };

SamplingPlan sampling_plan_from_string(const std::string& s);
std::string to_string(SamplingPlan plan);

struct MultiFidelityDataset {
    Matrix x_H;
    Vector y_H;
    Matrix grad_H;  // 0x0 when gradients are absent
    Matrix x_L;
    Vector y_L;
    Matrix grad_L;
    Matrix test_x;
    Vector test_y;
    Matrix test_grad;

    Index dim() const { return x_H.cols(); }
    bool has_low() const { return x_L.rows() > 0; }
    bool has_hf_gradients() const { return grad_H.rows() > 0; }
    bool has_lf_gradients() const { return grad_L.rows() > 0; }
};

/// Samples training inputs for both fidelities plus a held-out HF test set,
/// then evaluates the case's closed forms (values and gradients) everywhere.
/// m_L = 0 builds a single-fidelity dataset. Grid plans require the sample
/// count to be a perfect per-dimension power.
MultiFidelityDataset build_dataset(const BenchmarkCase& bench,
                                   SamplingPlan plan_train, int m_H, int m_L,
                                   SamplingPlan plan_test, int m_test,
                                   std::uint64_t seed);

/// Training blocks only (empty test block); draws the same training inputs
/// as build_dataset would for the same seed.
MultiFidelityDataset build_training_set(const BenchmarkCase& bench,
                                        SamplingPlan plan_train, int m_H, int m_L,
                                        std::uint64_t seed);

// Delimited-text export: header x_1..x_D,y,dy_1..dy_D,fidelity with one
// sample per row at 17 significant digits. Fidelity tags: high, low, test.
void write_dataset_csv(const MultiFidelityDataset& data, std::ostream& out,
                       bool include_gradients = true);
void write_dataset_csv(const MultiFidelityDataset& data, const std::string& path,
                       bool include_gradients = true);
MultiFidelityDataset read_dataset_csv(std::istream& in);
MultiFidelityDataset read_dataset_csv(const std::string& path);

}  // namespace gemfnn
