#include "gemfnn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace gemfnn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Hard cap on generated sample matrices (rows * cols of doubles).
constexpr long long kMaxGridEntries = 200'000'000;

void forrester_hf(const Matrix& x, Vector& y, Matrix& grad) {
    const Index n = x.rows();
    y.resize(n);
    grad.resize(n, 1);
    for (Index i = 0; i < n; ++i) {
        const double t = 6.0 * x(i, 0) - 2.0;
        const double a = 12.0 * x(i, 0) - 4.0;
        y(i) = t * t * std::sin(a);
        grad(i, 0) = 12.0 * t * std::sin(a) + 12.0 * t * t * std::cos(a);
    }
}

void forrester_lf(const Matrix& x, Vector& y, Matrix& grad) {
    forrester_hf(x, y, grad);
    for (Index i = 0; i < x.rows(); ++i) {
        y(i) = 0.5 * y(i) + 10.0 * (x(i, 0) - 0.5) - 5.0;
        grad(i, 0) = 0.5 * grad(i, 0) + 10.0;
    }
}

void rastrigin_hf(const Matrix& x, Vector& y, Matrix& grad) {
    const Index n = x.rows();
    y.resize(n);
    grad.resize(n, 2);
    for (Index i = 0; i < n; ++i) {
        double s = 20.0;
        for (Index k = 0; k < 2; ++k) {
            const double xi = x(i, k);
            s += xi * xi - 10.0 * std::cos(2.0 * kPi * xi);
            grad(i, k) = 2.0 * xi + 20.0 * kPi * std::sin(2.0 * kPi * xi);
        }
        y(i) = s;
    }
}

void rastrigin_lf(const Matrix& x, Vector& y, Matrix& grad) {
    rastrigin_hf(x, y, grad);
    for (Index i = 0; i < x.rows(); ++i) {
        y(i) = 0.5 * y(i) + (x(i, 0) - 0.5) + (x(i, 1) - 0.5);
        grad(i, 0) = 0.5 * grad(i, 0) + 1.0;
        grad(i, 1) = 0.5 * grad(i, 1) + 1.0;
    }
}

void f20d_hf(const Matrix& x, Vector& y, Matrix& grad) {
    const Index n = x.rows();
    const Index d = 20;
    y.resize(n);
    grad.resize(n, d);
    for (Index i = 0; i < n; ++i) {
        double s = (x(i, 0) - 1.0) * (x(i, 0) - 1.0);
        for (Index k = 1; k < d; ++k) {
            const double r = 2.0 * x(i, k) * x(i, k) - x(i, k - 1);
            s += r * r;
        }
        y(i) = s;
        // Three-piece gradient: first coordinate, middle, last.
        grad(i, 0) = 2.0 * (x(i, 0) - 1.0) - 2.0 * (2.0 * x(i, 1) * x(i, 1) - x(i, 0));
        for (Index k = 1; k < d - 1; ++k) {
            grad(i, k) = 8.0 * x(i, k) * (2.0 * x(i, k) * x(i, k) - x(i, k - 1)) -
                         2.0 * (2.0 * x(i, k + 1) * x(i, k + 1) - x(i, k));
        }
        grad(i, d - 1) =
            8.0 * x(i, d - 1) * (2.0 * x(i, d - 1) * x(i, d - 1) - x(i, d - 2));
    }
}

void f20d_lf(const Matrix& x, Vector& y, Matrix& grad) {
    f20d_hf(x, y, grad);
    const Index d = 20;
    for (Index i = 0; i < x.rows(); ++i) {
        double cross = 0.0;
        for (Index k = 0; k + 1 < d; ++k) cross += x(i, k) * x(i, k + 1);
        y(i) = 0.8 * y(i) - 0.4 * cross - 50.0;
        grad(i, 0) = 0.8 * grad(i, 0) - 0.4 * x(i, 1);
        for (Index k = 1; k < d - 1; ++k)
            grad(i, k) = 0.8 * grad(i, k) - 0.4 * (x(i, k - 1) + x(i, k + 1));
        grad(i, d - 1) = 0.8 * grad(i, d - 1) - 0.4 * x(i, d - 2);
    }
}

Domain box(double lo, double hi, int d) {
    Domain dom;
    dom.lower = Vector::Constant(d, lo);
    dom.upper = Vector::Constant(d, hi);
    return dom;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void Domain::validate() const {
    if (lower.size() != upper.size())
        throw ConfigError("domain lower/upper length mismatch");
    for (Index k = 0; k < lower.size(); ++k)
        if (!(lower(k) < upper(k)))
            throw ConfigError("domain requires lower < upper in every dimension");
}

const std::vector<std::string>& case_names() {
    static const std::vector<std::string> names = {"forrester1d", "rastrigin2d", "f20d"};
    return names;
}

BenchmarkCase make_case(const std::string& name) {
    BenchmarkCase c;
    c.name = name;
    if (name == "forrester1d") {
        c.dim = 1;
        c.domain = box(0.0, 1.0, 1);
        c.hf = forrester_hf;
        c.lf = forrester_lf;
    } else if (name == "rastrigin2d") {
        c.dim = 2;
        c.domain = box(-1.0, 1.5, 2);
        c.hf = rastrigin_hf;
        c.lf = rastrigin_lf;
    } else if (name == "f20d") {
        c.dim = 20;
        c.domain = box(-3.0, 3.0, 20);
        c.hf = f20d_hf;
        c.lf = f20d_lf;
    } else {
        throw ConfigError("unknown benchmark case '" + name +
                          "' (expected forrester1d, rastrigin2d, or f20d)");
    }
    return c;
}

Matrix full_factorial(const Domain& domain, const std::vector<int>& points_per_dim) {
    domain.validate();
    const Index d = domain.dim();
    if (static_cast<Index>(points_per_dim.size()) != d)
        throw ConfigError("full_factorial: points_per_dim length must equal dimension");
    long long total = 1;
    for (int p : points_per_dim) {
        if (p < 2)
            throw ConfigError("full_factorial: at least 2 points per axis required");
        total *= p;
        if (total * d > kMaxGridEntries)
            throw ConfigError("full_factorial: grid exceeds memory budget");
    }
    Matrix out(total, d);
    for (long long r = 0; r < total; ++r) {
        long long rem = r;
        // Last dimension varies fastest.
        for (Index k = d - 1; k >= 0; --k) {
            const int p = points_per_dim[static_cast<size_t>(k)];
            const int idx = static_cast<int>(rem % p);
            rem /= p;
            out(r, k) = domain.lower(k) +
                        (domain.upper(k) - domain.lower(k)) * idx / (p - 1);
        }
    }
    return out;
}

Matrix lhs(const Domain& domain, int m, std::uint64_t seed) {
    domain.validate();
    if (m < 1) throw ConfigError("lhs: m must be >= 1");
    const Index d = domain.dim();
    Matrix out(m, d);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    std::vector<int> perm(static_cast<size_t>(m));
    for (Index k = 0; k < d; ++k) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const double width = (domain.upper(k) - domain.lower(k)) / m;
        for (int i = 0; i < m; ++i)
            out(i, k) = domain.lower(k) + (perm[static_cast<size_t>(i)] + jitter(rng)) * width;
    }
    return out;
}

void eval_case(const BenchmarkCase& bench, const Matrix& x, Fidelity fidelity,
               Vector& values, Matrix& gradients) {
    if (!bench.hf || !bench.lf) throw ConfigError("eval_case: uninitialized benchmark case");
    if (x.cols() != bench.dim)
        throw ShapeError("eval_case: input has " + std::to_string(x.cols()) +
                         " columns, case '" + bench.name + "' expects " +
                         std::to_string(bench.dim));
    for (Index k = 0; k < x.cols(); ++k) {
        if (x.rows() > 0 && (x.col(k).minCoeff() < bench.domain.lower(k) ||
                             x.col(k).maxCoeff() > bench.domain.upper(k))) {
            std::cerr << "warning: samples outside domain of case '" << bench.name
                      << "' in dimension " << (k + 1) << "\n";
            break;
        }
    }
    if (fidelity == Fidelity::High)
        bench.hf(x, values, gradients);
    else
        bench.lf(x, values, gradients);
}

SamplingPlan sampling_plan_from_string(const std::string& s) {
    if (s == "full_factorial") return SamplingPlan::FullFactorial;
    if (s == "lhs") return SamplingPlan::Lhs;
    throw ConfigError("unknown sampling plan '" + s + "' (expected full_factorial or lhs)");
}

std::string to_string(SamplingPlan plan) {
    return plan == SamplingPlan::FullFactorial ? "full_factorial" : "lhs";
}

namespace {

// Grid plans spread m points as an equal per-axis grid; m must be a perfect
// D-th power (trivially satisfied in 1D).
Matrix draw_plan(const BenchmarkCase& bench, SamplingPlan plan, int m, std::uint64_t seed) {
    if (plan == SamplingPlan::Lhs) return lhs(bench.domain, m, seed);
    const int d = bench.dim;
    const int per_axis = static_cast<int>(std::llround(std::pow(static_cast<double>(m), 1.0 / d)));
    long long total = 1;
    for (int k = 0; k < d; ++k) total *= per_axis;
    if (per_axis < 2 || total != m)
        throw ConfigError("full factorial plan needs a perfect per-axis grid: " +
                          std::to_string(m) + " points do not tile " +
                          std::to_string(d) + " dimensions");
    return full_factorial(bench.domain, std::vector<int>(static_cast<size_t>(d), per_axis));
}

}  // namespace

MultiFidelityDataset build_training_set(const BenchmarkCase& bench,
                                        SamplingPlan plan_train, int m_H, int m_L,
                                        std::uint64_t seed) {
    if (m_H < 1) throw DataError("build_dataset: m_H must be >= 1");
    if (m_L < 0) throw DataError("build_dataset: m_L must be >= 0");

    MultiFidelityDataset ds;
    ds.x_H = draw_plan(bench, plan_train, m_H, mix_seed(seed, 1));
    eval_case(bench, ds.x_H, Fidelity::High, ds.y_H, ds.grad_H);
    if (m_L > 0) {
        ds.x_L = draw_plan(bench, plan_train, m_L, mix_seed(seed, 2));
        eval_case(bench, ds.x_L, Fidelity::Low, ds.y_L, ds.grad_L);
    }
    return ds;
}

MultiFidelityDataset build_dataset(const BenchmarkCase& bench,
                                   SamplingPlan plan_train, int m_H, int m_L,
                                   SamplingPlan plan_test, int m_test,
                                   std::uint64_t seed) {
    if (m_test < 1) throw DataError("build_dataset: m_test must be >= 1");
    MultiFidelityDataset ds = build_training_set(bench, plan_train, m_H, m_L, seed);
    ds.test_x = draw_plan(bench, plan_test, m_test, mix_seed(seed, 3));
    eval_case(bench, ds.test_x, Fidelity::High, ds.test_y, ds.test_grad);
    return ds;
}

void write_dataset_csv(const MultiFidelityDataset& data, std::ostream& out,
                       bool include_gradients) {
    const Index d = data.dim();
    for (Index k = 0; k < d; ++k) out << "x_" << (k + 1) << ",";
    out << "y";
    if (include_gradients)
        for (Index k = 0; k < d; ++k) out << ",dy_" << (k + 1);
    out << ",fidelity\n";

    auto emit = [&](const Matrix& x, const Vector& y, const Matrix& g, const char* tag) {
        for (Index i = 0; i < x.rows(); ++i) {
            for (Index k = 0; k < d; ++k) out << fmt17(x(i, k)) << ",";
            out << fmt17(y(i));
            if (include_gradients)
                for (Index k = 0; k < d; ++k) out << "," << fmt17(g(i, k));
            out << "," << tag << "\n";
        }
    };
    if (include_gradients && (!data.has_hf_gradients() ||
                              (data.has_low() && !data.has_lf_gradients())))
        throw DataError("write_dataset_csv: dataset has no gradients to export");
    emit(data.x_H, data.y_H, data.grad_H, "high");
    if (data.has_low()) emit(data.x_L, data.y_L, data.grad_L, "low");
    emit(data.test_x, data.test_y, data.test_grad, "test");
}

void write_dataset_csv(const MultiFidelityDataset& data, const std::string& path,
                       bool include_gradients) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    write_dataset_csv(data, f, include_gradients);
    if (!f) throw IoError("failed writing dataset to '" + path + "'");
}

MultiFidelityDataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("dataset file is empty");
    const auto header = split_csv_line(line);

    Index d = 0;
    while (d < static_cast<Index>(header.size()) &&
           header[static_cast<size_t>(d)] == "x_" + std::to_string(d + 1))
        ++d;
    if (d == 0) throw DataError("dataset header must start with x_1");
    size_t col = static_cast<size_t>(d);
    if (col >= header.size() || header[col] != "y")
        throw DataError("dataset header missing 'y' column");
    ++col;
    bool has_grad = col < header.size() && header[col] == "dy_1";
    if (has_grad) {
        for (Index k = 0; k < d; ++k, ++col)
            if (col >= header.size() || header[col] != "dy_" + std::to_string(k + 1))
                throw DataError("dataset header has malformed gradient columns");
    }
    if (col >= header.size() || header[col] != "fidelity" || col + 1 != header.size())
        throw DataError("dataset header must end with 'fidelity'");

    struct Block {
        std::vector<double> x, y, g;
        Index rows = 0;
    };
    Block high, low, test;
    const size_t expect = static_cast<size_t>(d) + 1 + (has_grad ? static_cast<size_t>(d) : 0) + 1;
    Index line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != expect)
            throw DataError("dataset row " + std::to_string(line_no) + " has " +
                            std::to_string(f.size()) + " fields, expected " +
                            std::to_string(expect));
        const std::string& tag = f.back();
        Block* b = nullptr;
        if (tag == "high") b = &high;
        else if (tag == "low") b = &low;
        else if (tag == "test") b = &test;
        else throw DataError("unknown fidelity tag '" + tag + "' on row " + std::to_string(line_no));
        try {
            size_t c = 0;
            for (Index k = 0; k < d; ++k) b->x.push_back(std::stod(f[c++]));
            b->y.push_back(std::stod(f[c++]));
            if (has_grad)
                for (Index k = 0; k < d; ++k) b->g.push_back(std::stod(f[c++]));
        } catch (const std::exception&) {
            throw DataError("non-numeric field on dataset row " + std::to_string(line_no));
        }
        ++b->rows;
    }
    if (high.rows == 0) throw DataError("dataset has no high-fidelity rows");
    if (test.rows == 0) throw DataError("dataset has no test rows");

    auto to_matrix = [d](const std::vector<double>& flat, Index rows) {
        Matrix m(rows, d);
        for (Index i = 0; i < rows; ++i)
            for (Index k = 0; k < d; ++k) m(i, k) = flat[static_cast<size_t>(i * d + k)];
        return m;
    };
    auto to_vector = [](const std::vector<double>& flat) {
        return Eigen::Map<const Vector>(flat.data(), static_cast<Index>(flat.size())).eval();
    };

    MultiFidelityDataset ds;
    ds.x_H = to_matrix(high.x, high.rows);
    ds.y_H = to_vector(high.y);
    if (has_grad) ds.grad_H = to_matrix(high.g, high.rows);
    if (low.rows > 0) {
        ds.x_L = to_matrix(low.x, low.rows);
        ds.y_L = to_vector(low.y);
        if (has_grad) ds.grad_L = to_matrix(low.g, low.rows);
    }
    ds.test_x = to_matrix(test.x, test.rows);
    ds.test_y = to_vector(test.y);
    if (has_grad) ds.test_grad = to_matrix(test.g, test.rows);
    return ds;
}

MultiFidelityDataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open dataset file '" + path + "'");
    return read_dataset_csv(f);
}

}  // namespace gemfnn
