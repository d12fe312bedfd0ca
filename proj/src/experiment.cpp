#include "gemfnn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <semaphore>
#include <sstream>
#include <thread>

#include "gemfnn/validation.hpp"

namespace gemfnn {

long modeling_cost(ModelVariant variant, int m_H) {
    if (m_H < 1) throw ConfigError("modeling_cost: m_H must be >= 1");
    return uses_gradients(variant) ? 2L * m_H : static_cast<long>(m_H);
}

const std::vector<int>& StudyConfig::schedule_for(ModelVariant v) const {
    auto it = hf_schedule_overrides.find(v);
    return it != hf_schedule_overrides.end() ? it->second : hf_schedule;
}

void StudyConfig::validate() const {
    if (variants.empty()) throw ConfigError("study: variant list is empty");
    if (n_t < 1) throw ConfigError("study: n_t must be >= 1");
    if (m_test < 1) throw ConfigError("study: m_test must be >= 1");
    train.validate();
    for (ModelVariant v : variants) {
        const auto& sched = schedule_for(v);
        if (sched.empty())
            throw ConfigError("study: empty HF schedule for variant " + to_string(v));
        for (size_t i = 0; i < sched.size(); ++i) {
            if (sched[i] < 1) throw ConfigError("study: HF sample counts must be >= 1");
            if (i > 0 && sched[i] <= sched[i - 1])
                throw ConfigError("study: HF schedule must be strictly increasing");
        }
        if (is_multifidelity(v) && m_L < 1)
            throw ConfigError("study: variant " + to_string(v) +
                              " needs low-fidelity samples (m_L >= 1)");
    }
}

StudyConfig default_study_config(const std::string& case_name) {
    StudyConfig cfg;
    cfg.case_name = case_name;
    if (case_name == "forrester1d") {
        cfg.arch.nn_l = {20};
        cfg.arch.nn_h1 = {10};
        cfg.arch.nn_h2 = {10};
        cfg.train.learning_rate = 1e-3;
        cfg.train.batch_size = 10;
        cfg.train.epochs = 15000;
        cfg.m_L = 50;
        cfg.m_test = 1000;
        cfg.plan_train = SamplingPlan::FullFactorial;
        cfg.plan_test = SamplingPlan::FullFactorial;
        cfg.hf_schedule = {4, 6, 8, 10, 14, 18, 24, 30, 40, 50, 60};
    } else if (case_name == "rastrigin2d") {
        cfg.arch.nn_l = {50, 50};
        cfg.arch.nn_h1 = {10};
        cfg.arch.nn_h2 = {50, 50};
        cfg.train.learning_rate = 1e-3;
        cfg.train.batch_size = 32;
        cfg.train.epochs = 10000;
        cfg.m_L = 500;
        cfg.m_test = 10000;
        cfg.plan_train = SamplingPlan::Lhs;
        cfg.plan_test = SamplingPlan::FullFactorial;
        cfg.hf_schedule = {40, 50, 60, 70, 80, 90, 100, 120, 150, 200, 250, 300};
    } else if (case_name == "f20d") {
        cfg.arch.nn_l = {128, 128, 128, 128, 128, 128};
        cfg.arch.nn_h1 = {10};
        cfg.arch.nn_h2 = {64, 64, 64, 64};
        cfg.train.learning_rate = 1e-3;
        cfg.train.batch_size = 64;
        cfg.train.epochs = 10000;
        cfg.m_L = 30000;
        cfg.m_test = 10000;
        cfg.plan_train = SamplingPlan::Lhs;
        cfg.plan_test = SamplingPlan::Lhs;
        cfg.hf_schedule = {100, 200, 300, 600, 1000};
        // The non-gradient variants need far more data on this case.
        cfg.hf_schedule_overrides[ModelVariant::NN] = {300, 600, 1000, 2500, 5000, 10000};
        cfg.hf_schedule_overrides[ModelVariant::MFNN] = {300, 600, 1000, 2500, 5000, 10000};
        cfg.hf_schedule_overrides[ModelVariant::GENN] = {300, 600, 1000, 2500, 5000};
    } else {
        throw ConfigError("unknown benchmark case '" + case_name + "'");
    }
    return cfg;
}

const StudyRow* StudyResult::find(ModelVariant v, int m_H) const {
    for (const auto& r : rows)
        if (r.variant == v && r.m_H == m_H) return &r;
    return nullptr;
}

const CostToTarget* StudyResult::find_cost(ModelVariant v) const {
    for (const auto& c : cost_to_target)
        if (c.variant == v) return &c;
    return nullptr;
}

namespace {

struct RepOutcome {
    bool ok = false;
    double r2 = 0.0;
    double wall_s = 0.0;
    std::string diagnostic;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg, std::ostream* progress) {
    cfg.validate();
    const BenchmarkCase bench = make_case(cfg.case_name);

    // One shared test set per study.
    const Matrix test_x = (cfg.plan_test == SamplingPlan::Lhs)
            ? lhs(bench.domain, cfg.m_test, mix_seed(cfg.base_seed, 0x7e57))
            : [&] {
                  const int d = bench.dim;
                  const int per = static_cast<int>(
                      std::llround(std::pow(static_cast<double>(cfg.m_test), 1.0 / d)));
                  long long total = 1;
                  for (int k = 0; k < d; ++k) total *= per;
                  if (per < 2 || total != cfg.m_test)
                      throw ConfigError("study: m_test does not tile a full factorial grid");
                  return full_factorial(bench.domain, std::vector<int>(d, per));
              }();
    Vector test_y;
    Matrix test_grad;
    eval_case(bench, test_x, Fidelity::High, test_y, test_grad);

    const unsigned hw = std::thread::hardware_concurrency();
    const int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(hw > 0 ? hw : 2);
    std::counting_semaphore<256> slots(std::min(workers, 256));
    std::mutex progress_mutex;

    auto run_repetition = [&](ModelVariant variant, int m_H, int rep) -> RepOutcome {
        slots.acquire();
        RepOutcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const std::uint64_t data_seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
            const int m_L = is_multifidelity(variant) ? cfg.m_L : 0;
            const MultiFidelityDataset ds =
                build_training_set(bench, cfg.plan_train, m_H, m_L, data_seed);
            CompositeSurrogate model = make_surrogate(
                variant, bench.dim, cfg.arch,
                mix_seed(cfg.base_seed, static_cast<std::uint64_t>(variant),
                         static_cast<std::uint64_t>(m_H) * 1000003ull +
                             static_cast<std::uint64_t>(rep)));
            TrainConfig tc = cfg.train;
            tc.seed = mix_seed(data_seed, static_cast<std::uint64_t>(variant),
                               static_cast<std::uint64_t>(m_H));
            train(model, ds, tc);
            const Vector pred = predict_high(model, test_x);
            out.r2 = r_squared(test_y, pred);
            out.ok = true;
        } catch (const std::exception& e) {
            out.diagnostic = e.what();
        }
        out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        slots.release();
        if (progress) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            *progress << "  " << to_string(variant) << " m_H=" << m_H << " rep=" << rep;
            if (out.ok)
                *progress << " r2=" << out.r2;
            else
                *progress << " FAILED: " << out.diagnostic;
            *progress << " (" << out.wall_s << " s)" << std::endl;
        }
        return out;
    };

    struct VariantRows {
        std::vector<StudyRow> rows;
    };
    std::vector<VariantRows> per_variant(cfg.variants.size());

    auto run_variant = [&](size_t vi) {
        const ModelVariant variant = cfg.variants[vi];
        for (int m_H : cfg.schedule_for(variant)) {
            std::vector<std::thread> threads;
            std::vector<RepOutcome> outcomes(static_cast<size_t>(cfg.n_t));
            for (int rep = 0; rep < cfg.n_t; ++rep)
                threads.emplace_back([&, rep] {
                    outcomes[static_cast<size_t>(rep)] = run_repetition(variant, m_H, rep);
                });
            for (auto& th : threads) th.join();

            StudyRow row;
            row.variant = variant;
            row.m_H = m_H;
            row.cost = modeling_cost(variant, m_H);
            double wall = 0.0;
            for (const auto& o : outcomes) {
                wall += o.wall_s;
                if (o.ok)
                    row.r2_values.push_back(o.r2);
                else
                    ++row.n_failed;
            }
            row.wall_s = wall / static_cast<double>(cfg.n_t);
            row.valid = row.n_failed * 2 <= cfg.n_t;
            if (!row.r2_values.empty()) {
                auto [mu, sigma] = aggregate(row.r2_values);
                row.mu_r2 = mu;
                row.sigma_r2 = sigma;
            } else {
                row.mu_r2 = std::nan("");
                row.sigma_r2 = std::nan("");
                row.valid = false;
            }
            per_variant[vi].rows.push_back(std::move(row));
            const StudyRow& done = per_variant[vi].rows.back();
            if (cfg.stop_at_target && done.valid && done.mu_r2 >= cfg.target_r2) break;
        }
    };

    std::vector<std::thread> variant_threads;
    variant_threads.reserve(cfg.variants.size());
    for (size_t vi = 0; vi < cfg.variants.size(); ++vi)
        variant_threads.emplace_back(run_variant, vi);
    for (auto& th : variant_threads) th.join();

    StudyResult result;
    result.case_name = cfg.case_name;
    result.target_r2 = cfg.target_r2;
    for (size_t vi = 0; vi < cfg.variants.size(); ++vi) {
        for (auto& row : per_variant[vi].rows) result.rows.push_back(std::move(row));
        CostToTarget ctt;
        ctt.variant = cfg.variants[vi];
        for (const auto& row : result.rows) {
            if (row.variant != ctt.variant || !row.valid) continue;
            if (row.mu_r2 >= cfg.target_r2 && (!ctt.reached || row.cost < ctt.cost)) {
                ctt.reached = true;
                ctt.cost = row.cost;
            }
        }
        result.cost_to_target.push_back(ctt);
    }
    return result;
}

void emit_results(const StudyResult& result, std::ostream& out) {
    out << "case,variant,m_hf,cost,mu_r2,sigma_r2,wall_time_s\n";
    for (const auto& r : result.rows) {
        out << result.case_name << "," << to_string(r.variant) << "," << r.m_H << ","
            << r.cost << "," << fmt17(r.mu_r2) << "," << fmt17(r.sigma_r2) << ","
            << fmt17(r.wall_s) << "\n";
    }
    if (!result.cost_to_target.empty()) {
        out << "# cost_to_target target_r2=" << fmt17(result.target_r2) << "\n";
        for (const auto& c : result.cost_to_target) {
            out << "# " << to_string(c.variant) << ",";
            if (c.reached)
                out << c.cost << "\n";
            else
                out << "not_reached\n";
        }
    }
}

void emit_results(const StudyResult& result, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    emit_results(result, f);
    if (!f) throw IoError("failed writing results to '" + path + "'");
}

StudyResult parse_results(std::istream& in) {
    StudyResult result;
    std::string line;
    if (!std::getline(in, line) ||
        line != "case,variant,m_hf,cost,mu_r2,sigma_r2,wall_time_s")
        throw DataError("results file: bad header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# cost_to_target", 0) == 0) {
            const auto eq = line.find("target_r2=");
            if (eq == std::string::npos) throw DataError("results file: bad summary header");
            result.target_r2 = std::stod(line.substr(eq + 10));
            continue;
        }
        if (line.rfind("# ", 0) == 0) {
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw DataError("results file: bad summary row");
            CostToTarget c;
            c.variant = variant_from_string(line.substr(2, comma - 2));
            const std::string rhs = line.substr(comma + 1);
            if (rhs != "not_reached") {
                c.reached = true;
                c.cost = std::stol(rhs);
            }
            result.cost_to_target.push_back(c);
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        StudyRow r;
        std::getline(ss, field, ',');
        result.case_name = field;
        std::getline(ss, field, ',');
        r.variant = variant_from_string(field);
        std::getline(ss, field, ',');
        r.m_H = std::stoi(field);
        std::getline(ss, field, ',');
        r.cost = std::stol(field);
        std::getline(ss, field, ',');
        r.mu_r2 = std::stod(field);
        std::getline(ss, field, ',');
        r.sigma_r2 = std::stod(field);
        std::getline(ss, field, ',');
        r.wall_s = std::stod(field);
        result.rows.push_back(r);
    }
    return result;
}

StudyResult parse_results(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open results file '" + path + "'");
    return parse_results(f);
}

}  // namespace gemfnn
