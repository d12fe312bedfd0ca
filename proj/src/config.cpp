#include "gemfnn/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gemfnn {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

IniFile IniFile::parse(std::istream& in) {
    IniFile ini;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            ini.sections_[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        ini.sections_[section][key] = value;
    }
    return ini;
}

IniFile IniFile::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file '" + path + "'");
    return parse(f);
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

void IniFile::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}

std::string IniFile::get(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s != sections_.end()) {
        const auto k = s->second.find(key);
        if (k != s->second.end()) return k->second;
    }
    throw ConfigError("missing required config field '" + section + "." + key + "'");
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

namespace {

int parse_int(const std::string& v, const std::string& field) {
    try {
        size_t pos = 0;
        const int r = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + field + "': '" + v + "' is not an integer");
    }
}

double parse_double(const std::string& v, const std::string& field) {
    try {
        size_t pos = 0;
        const double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + field + "': '" + v + "' is not a number");
    }
}

}  // namespace

int IniFile::get_int(const std::string& section, const std::string& key) const {
    return parse_int(get(section, key), section + "." + key);
}

int IniFile::get_int_or(const std::string& section, const std::string& key, int fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

double IniFile::get_double(const std::string& section, const std::string& key) const {
    return parse_double(get(section, key), section + "." + key);
}

double IniFile::get_double_or(const std::string& section, const std::string& key,
                              double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

bool IniFile::get_bool_or(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config field '" + section + "." + key + "': '" + v +
                      "' is not a boolean");
}

std::uint64_t IniFile::get_seed_or(const std::string& section, const std::string& key,
                                   std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    try {
        size_t pos = 0;
        const std::uint64_t r = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + section + "." + key + "': '" + v +
                          "' is not a seed");
    }
}

std::vector<std::string> IniFile::get_list(const std::string& section,
                                           const std::string& key) const {
    const std::string v = get(section, key);
    std::vector<std::string> items;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    if (items.empty())
        throw ConfigError("config field '" + section + "." + key + "' is an empty list");
    return items;
}

std::vector<int> IniFile::get_int_list(const std::string& section, const std::string& key) const {
    std::vector<int> out;
    for (const auto& s : get_list(section, key))
        out.push_back(parse_int(s, section + "." + key));
    return out;
}

namespace {

// Architecture/optimizer keys shared by train and study configs.
void apply_arch_and_optimizer(const IniFile& ini, Architecture& arch, TrainConfig& train) {
    if (ini.has("architecture", "nn_l")) arch.nn_l = ini.get_int_list("architecture", "nn_l");
    if (ini.has("architecture", "nn_h1")) arch.nn_h1 = ini.get_int_list("architecture", "nn_h1");
    if (ini.has("architecture", "nn_h2")) arch.nn_h2 = ini.get_int_list("architecture", "nn_h2");
    train.learning_rate = ini.get_double_or("optimizer", "learning_rate", train.learning_rate);
    train.batch_size = ini.get_int_or("optimizer", "batch_size", train.batch_size);
    train.epochs = ini.get_int_or("optimizer", "epochs", train.epochs);
    train.beta1 = ini.get_double_or("optimizer", "beta1", train.beta1);
    train.beta2 = ini.get_double_or("optimizer", "beta2", train.beta2);
    train.epsilon = ini.get_double_or("optimizer", "epsilon", train.epsilon);
}

}  // namespace

SampleSpec sample_spec_from_ini(const IniFile& ini) {
    SampleSpec spec;
    spec.case_name = ini.get("case", "name");
    const StudyConfig defaults = default_study_config(spec.case_name);
    spec.m_H = ini.get_int("sampling", "m_hf");
    spec.m_L = ini.get_int_or("sampling", "m_lf", defaults.m_L);
    spec.m_test = ini.get_int_or("sampling", "m_test", defaults.m_test);
    spec.plan_train = sampling_plan_from_string(
        ini.get_or("sampling", "plan_train", to_string(defaults.plan_train)));
    spec.plan_test = sampling_plan_from_string(
        ini.get_or("sampling", "plan_test", to_string(defaults.plan_test)));
    spec.seed = ini.get_seed_or("seeds", "base", 0);
    spec.include_gradients = ini.get_bool_or("sampling", "gradients", true);
    return spec;
}

TrainSpec train_spec_from_ini(const IniFile& ini, int input_dim) {
    TrainSpec spec;
    spec.variant = variant_from_string(ini.get("model", "variant"));
    if (ini.has("case", "name")) {
        const StudyConfig defaults = default_study_config(ini.get("case", "name"));
        spec.arch = defaults.arch;
        spec.train = defaults.train;
    }
    apply_arch_and_optimizer(ini, spec.arch, spec.train);
    spec.train.seed = ini.get_seed_or("seeds", "base", 0);
    spec.init_seed = mix_seed(spec.train.seed, 0x1417);
    (void)input_dim;
    return spec;
}

StudyConfig study_config_from_ini(const IniFile& ini) {
    const std::string case_name = ini.get("case", "name");
    StudyConfig cfg = default_study_config(case_name);
    cfg.m_L = ini.get_int_or("case", "m_lf", cfg.m_L);
    cfg.m_test = ini.get_int_or("case", "m_test", cfg.m_test);
    if (ini.has("case", "plan_train"))
        cfg.plan_train = sampling_plan_from_string(ini.get("case", "plan_train"));
    if (ini.has("case", "plan_test"))
        cfg.plan_test = sampling_plan_from_string(ini.get("case", "plan_test"));

    if (ini.has("variants", "list")) {
        cfg.variants.clear();
        for (const auto& v : ini.get_list("variants", "list"))
            cfg.variants.push_back(variant_from_string(v));
    }
    apply_arch_and_optimizer(ini, cfg.arch, cfg.train);

    if (ini.has("schedule", "hf")) {
        cfg.hf_schedule = ini.get_int_list("schedule", "hf");
        cfg.hf_schedule_overrides.clear();
    }
    for (ModelVariant v :
         {ModelVariant::NN, ModelVariant::GENN, ModelVariant::MFNN, ModelVariant::GEMFNN}) {
        const std::string key = "hf_" + to_string(v);
        if (ini.has("schedule", key))
            cfg.hf_schedule_overrides[v] = ini.get_int_list("schedule", key);
    }
    cfg.n_t = ini.get_int_or("schedule", "n_t", cfg.n_t);
    cfg.target_r2 = ini.get_double_or("schedule", "target_r2", cfg.target_r2);
    cfg.stop_at_target = ini.get_bool_or("schedule", "stop_at_target", cfg.stop_at_target);
    cfg.base_seed = ini.get_seed_or("seeds", "base", 0);
    return cfg;
}

}  // namespace gemfnn
