#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gemfnn/experiment.hpp"

namespace gemfnn {

/// Sectioned key-value configuration ([section] headers, key = value lines,
/// '#' or ';' comments). Lookups that fail name the offending field as
/// 'section.key'.
class IniFile {
public:
    static IniFile parse(std::istream& in);
    static IniFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    /// Inserts or overwrites a value; how CLI flags override config files.
    void set(const std::string& section, const std::string& key, const std::string& value);
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

    int get_int(const std::string& section, const std::string& key) const;
    int get_int_or(const std::string& section, const std::string& key, int fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
    std::uint64_t get_seed_or(const std::string& section, const std::string& key,
                              std::uint64_t fallback) const;
    /// Comma-separated value list.
    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
    std::vector<int> get_int_list(const std::string& section, const std::string& key) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Sampling request for the `sample` command.
struct SampleSpec {
    std::string case_name;
    int m_H = 0;
    int m_L = 0;
    int m_test = 0;
    SamplingPlan plan_train = SamplingPlan::Lhs;
    SamplingPlan plan_test = SamplingPlan::Lhs;
    std::uint64_t seed = 0;
    bool include_gradients = true;
};

/// Training request for the `train` command (dataset comes from a file).
struct TrainSpec {
    ModelVariant variant = ModelVariant::NN;
    Architecture arch;
    TrainConfig train;
    std::uint64_t init_seed = 0;
};

// Schema mapping. Sections: [case], [sampling], [model], [architecture],
// [optimizer], [variants], [schedule], [seeds]. Missing keys fall back to
// the named case's defaults where such defaults exist.
SampleSpec sample_spec_from_ini(const IniFile& ini);
TrainSpec train_spec_from_ini(const IniFile& ini, int input_dim);
StudyConfig study_config_from_ini(const IniFile& ini);

}  // namespace gemfnn
