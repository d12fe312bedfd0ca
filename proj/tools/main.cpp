#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gemfnn/config.hpp"
#include "gemfnn/gradcheck.hpp"
#include "gemfnn/validation.hpp"

namespace {

using namespace gemfnn;

const char* category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Config: return "config";
        case ErrorCategory::Data: return "data";
        case ErrorCategory::Numeric: return "numeric";
        case ErrorCategory::Io: return "io";
    }
    return "unknown";
}

IniFile load_config_or_empty(const std::string& path) {
    if (path.empty()) {
        std::istringstream empty("");
        return IniFile::parse(empty);
    }
    return IniFile::load(path);
}

int cmd_sample(const std::string& config_path, const std::string& out_path,
               const std::string& case_override, int m_hf_override, int m_lf_override,
               int m_test_override, long long seed_override, bool no_gradients) {
    IniFile ini = load_config_or_empty(config_path);
    // Flags override config.
    if (!case_override.empty()) ini.set("case", "name", case_override);
    if (m_hf_override >= 0) ini.set("sampling", "m_hf", std::to_string(m_hf_override));
    if (m_lf_override >= 0) ini.set("sampling", "m_lf", std::to_string(m_lf_override));
    if (m_test_override >= 0) ini.set("sampling", "m_test", std::to_string(m_test_override));
    if (seed_override >= 0) ini.set("seeds", "base", std::to_string(seed_override));
    if (no_gradients) ini.set("sampling", "gradients", "false");
    const SampleSpec spec = sample_spec_from_ini(ini);

    const BenchmarkCase bench = make_case(spec.case_name);
    const MultiFidelityDataset ds = build_dataset(bench, spec.plan_train, spec.m_H, spec.m_L,
                                                  spec.plan_test, spec.m_test, spec.seed);
    write_dataset_csv(ds, out_path, spec.include_gradients);
    std::cerr << "wrote " << ds.x_H.rows() << " high, " << ds.x_L.rows() << " low, "
              << ds.test_x.rows() << " test samples to " << out_path << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& model_path, const std::string& history_path,
              const std::string& variant_override, long long seed_override,
              int epochs_override) {
    IniFile ini = load_config_or_empty(config_path);
    const MultiFidelityDataset data = read_dataset_csv(data_path);
    if (!variant_override.empty()) ini.set("model", "variant", variant_override);
    if (seed_override >= 0) ini.set("seeds", "base", std::to_string(seed_override));
    if (epochs_override >= 0) ini.set("optimizer", "epochs", std::to_string(epochs_override));
    const TrainSpec spec = train_spec_from_ini(ini, static_cast<int>(data.dim()));

    CompositeSurrogate model = make_surrogate(spec.variant, static_cast<int>(data.dim()),
                                              spec.arch, spec.init_seed);
    const TrainResult history = train(model, data, spec.train);
    write_model(model, model_path);
    std::cerr << "trained " << to_string(spec.variant) << " for " << spec.train.epochs
              << " epochs, model written to " << model_path << "\n";
    if (!history_path.empty()) {
        std::ofstream h(history_path);
        if (!h) throw IoError("cannot open '" + history_path + "' for writing");
        h << "epoch,mean_loss\n";
        char buf[40];
        for (size_t e = 0; e < history.epoch_loss.size(); ++e) {
            std::snprintf(buf, sizeof(buf), "%.17g", history.epoch_loss[e]);
            h << (e + 1) << "," << buf << "\n";
        }
    }
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& report_path) {
    const CompositeSurrogate model = read_model(model_path);
    const MultiFidelityDataset data = read_dataset_csv(data_path);
    if (data.test_x.cols() != model.input_dim)
        throw ShapeError("evaluate: dataset dimension " + std::to_string(data.test_x.cols()) +
                         " does not match model input_dim " + std::to_string(model.input_dim));
    const Vector pred = predict_high(model, data.test_x);
    const double r2 = r_squared(data.test_y, pred);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", r2);
    std::cout << "R2 " << buf << " (" << data.test_x.rows() << " test samples)\n";
    if (!report_path.empty()) {
        std::ofstream f(report_path);
        if (!f) throw IoError("cannot open '" + report_path + "' for writing");
        f << "model,data,n_test,r2\n";
        f << model_path << "," << data_path << "," << data.test_x.rows() << "," << buf << "\n";
    }
    return 0;
}

int cmd_study(const std::string& config_path, const std::string& out_dir,
              long long seed_override, int workers) {
    IniFile ini = IniFile::load(config_path);
    StudyConfig cfg = study_config_from_ini(ini);
    if (seed_override >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed_override);
    if (workers > 0) cfg.workers = workers;
    std::filesystem::create_directories(out_dir);
    std::cerr << "study: case " << cfg.case_name << ", " << cfg.variants.size()
              << " variants, n_t=" << cfg.n_t << "\n";
    const StudyResult result = run_study(cfg, &std::cerr);
    const std::string path = out_dir + "/" + cfg.case_name + "_results.csv";
    emit_results(result, path);
    std::cerr << "results written to " << path << "\n";
    return 0;
}

int cmd_verify_grads(double tol, long long seed, int trials) {
    GradCheckOptions opt;
    if (tol > 0) {
        opt.rel_tol = tol;
        opt.abs_floor = tol * 1e-3;  // keep the default 1e-5/1e-8 ratio
    }
    if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
    if (trials > 0) opt.trials = trials;
    const auto results = run_all_gradient_checks(opt);
    bool all_ok = true;
    const CheckResult* worst = nullptr;
    for (const auto& r : results) {
        std::printf("[%s] %-42s worst err %.3e (tol %.0e)%s%s\n", r.passed ? " ok " : "FAIL",
                    r.name.c_str(), r.worst_err, r.tolerance,
                    r.worst_detail.empty() ? "" : " at ", r.worst_detail.c_str());
        if (!r.passed) {
            all_ok = false;
            if (!worst || r.worst_err > worst->worst_err) worst = &r;
        }
    }
    if (!all_ok) {
        throw NumericError("gradient verification failed, worst offender: " + worst->name +
                           " (err " + std::to_string(worst->worst_err) + " at " +
                           worst->worst_detail + ")");
    }
    std::printf("all %zu gradient checks passed\n", results.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gemfnn: gradient-enhanced multifidelity neural network toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_path, model_path, history_path, report_path,
        out_dir, case_name, variant;
    int m_hf = -1, m_lf = -1, m_test = -1, epochs = -1, workers = 0, trials = 0;
    long long seed = -1;
    double tol = 0.0;
    bool no_gradients = false;

    auto* sample = app.add_subcommand("sample", "generate a benchmark dataset file");
    sample->add_option("--config", config_path, "config file (sections [case], [sampling], [seeds])");
    sample->add_option("--out", out_path, "output dataset CSV")->required();
    sample->add_option("--case", case_name, "benchmark case name");
    sample->add_option("--m-hf", m_hf, "high-fidelity training samples");
    sample->add_option("--m-lf", m_lf, "low-fidelity training samples");
    sample->add_option("--m-test", m_test, "test samples");
    sample->add_option("--seed", seed, "RNG seed");
    sample->add_flag("--no-gradients", no_gradients, "omit gradient columns");

    auto* train_cmd = app.add_subcommand("train", "train a surrogate on a dataset file");
    train_cmd->add_option("--config", config_path, "config file ([model], [architecture], [optimizer], [seeds])");
    train_cmd->add_option("--data", data_path, "dataset CSV")->required();
    train_cmd->add_option("--out", model_path, "output model file")->required();
    train_cmd->add_option("--history", history_path, "loss history CSV");
    train_cmd->add_option("--variant", variant, "model variant (NN, GENN, MFNN, GEMFNN)");
    train_cmd->add_option("--seed", seed, "RNG seed");
    train_cmd->add_option("--epochs", epochs, "override epoch count");

    auto* evaluate = app.add_subcommand("evaluate", "score a model on a dataset's test rows");
    evaluate->add_option("--model", model_path, "model file")->required();
    evaluate->add_option("--data", data_path, "dataset CSV")->required();
    evaluate->add_option("--out", report_path, "report CSV");

    auto* study = app.add_subcommand("study", "run a sample-size sweep over model variants");
    study->add_option("--config", config_path, "study config file")->required();
    study->add_option("--out-dir", out_dir, "output directory")->required();
    study->add_option("--seed", seed, "base seed override");
    study->add_option("--workers", workers, "worker threads (default: hardware)");

    auto* verify = app.add_subcommand("verify-grads", "finite-difference gradient verification");
    verify->add_option("--tol", tol, "relative tolerance for parameter-gradient checks");
    verify->add_option("--seed", seed, "RNG seed");
    verify->add_option("--trials", trials, "random configurations per check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sample->parsed())
            return cmd_sample(config_path, out_path, case_name, m_hf, m_lf, m_test, seed,
                              no_gradients);
        if (train_cmd->parsed())
            return cmd_train(config_path, data_path, model_path, history_path, variant, seed,
                             epochs);
        if (evaluate->parsed()) return cmd_evaluate(model_path, data_path, report_path);
        if (study->parsed()) return cmd_study(config_path, out_dir, seed, workers);
        if (verify->parsed()) return cmd_verify_grads(tol, seed, trials);
    } catch (const gemfnn::Error& e) {
        std::cerr << "error: [" << category_name(e.category()) << "] " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: [internal] " << e.what() << "\n";
        return 1;
    }
    return 0;
}
