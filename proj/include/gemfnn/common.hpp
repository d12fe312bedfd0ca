#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gemfnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Error taxonomy. The CLI maps each category to a process exit code.
enum class ErrorCategory : int { Config = 2, Data = 3, Numeric = 4, Io = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& msg)
        : std::runtime_error(msg), category_(cat) {}
    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorCategory::Config, m) {}
};
struct DataError : Error {
    explicit DataError(const std::string& m) : Error(ErrorCategory::Data, m) {}
};
// Dimension mismatches surface as data errors at the CLI boundary.
struct ShapeError : DataError {
    explicit ShapeError(const std::string& m) : DataError(m) {}
};
// A model variant was asked to do something its data or wiring cannot support.
struct VariantError : DataError {
    explicit VariantError(const std::string& m) : DataError(m) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& m) : Error(ErrorCategory::Numeric, m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorCategory::Io, m) {}
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives independent RNG streams from one base seed. All randomness in the
/// toolkit fans out from explicit seeds through this mix.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ull));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

}  // namespace gemfnn
