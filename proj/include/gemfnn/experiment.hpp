#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gemfnn/training.hpp"

namespace gemfnn {

/// High-fidelity evaluations charged to a model: gradient-enhanced variants
/// pay one extra unit per sample for the gradient evaluation. Low-fidelity
/// cost is tracked separately and never folded in.
long modeling_cost(ModelVariant variant, int m_H);

struct StudyConfig {
    std::string case_name;
    std::vector<ModelVariant> variants{ModelVariant::NN, ModelVariant::GENN,
                                       ModelVariant::MFNN, ModelVariant::GEMFNN};
    std::vector<int> hf_schedule;
    /// Optional per-variant schedule replacing hf_schedule.
    std::map<ModelVariant, std::vector<int>> hf_schedule_overrides;
    int m_L = 0;
    int m_test = 0;
    SamplingPlan plan_train = SamplingPlan::Lhs;
    SamplingPlan plan_test = SamplingPlan::Lhs;
    int n_t = 10;
    Architecture arch;
    TrainConfig train;
    std::uint64_t base_seed = 0;
    double target_r2 = 0.99;
    /// When set, a variant's schedule walk stops at the first size whose
    /// mean R^2 reaches target_r2 (the construction loop's termination
    /// criterion). Off by default: the full schedule is swept.
    bool stop_at_target = false;
    int workers = 0;  // 0: hardware concurrency

    const std::vector<int>& schedule_for(ModelVariant v) const;
    void validate() const;
};

/// Preset settings for a case: architecture, optimizer, sampling plans,
/// LF/test sizes, and a default HF schedule spanning the range where the
/// variants reach the target accuracy.
StudyConfig default_study_config(const std::string& case_name);

struct StudyRow {
    ModelVariant variant = ModelVariant::NN;
    int m_H = 0;
    long cost = 0;
    double mu_r2 = 0.0;
    double sigma_r2 = 0.0;
    double wall_s = 0.0;
    std::vector<double> r2_values;  // successful repetitions only
    int n_failed = 0;
    bool valid = true;
};

struct CostToTarget {
    ModelVariant variant = ModelVariant::NN;
    bool reached = false;
    long cost = 0;
};

struct StudyResult {
    std::string case_name;
    double target_r2 = 0.99;
    std::vector<StudyRow> rows;
    std::vector<CostToTarget> cost_to_target;

    const StudyRow* find(ModelVariant v, int m_H) const;
    const CostToTarget* find_cost(ModelVariant v) const;
};

/// Sweeps the (variant x m_H x repetition) grid. Each repetition redraws
/// training inputs (dataset seed = base_seed + repetition index) and trains a
/// freshly initialized model; the test set is drawn once and shared. Failed
/// repetitions are recorded and the study continues; a cell with more than
/// half its repetitions failed is marked invalid. Deterministic given
/// base_seed, regardless of worker count.
StudyResult run_study(const StudyConfig& cfg, std::ostream* progress = nullptr);

/// Delimited-text table (case, variant, m_hf, cost, mu_r2, sigma_r2,
/// wall_time_s) followed by a '#'-prefixed summary block with the
/// cost-to-target per variant.
void emit_results(const StudyResult& result, std::ostream& out);
void emit_results(const StudyResult& result, const std::string& path);
StudyResult parse_results(std::istream& in);
StudyResult parse_results(const std::string& path);

}  // namespace gemfnn
