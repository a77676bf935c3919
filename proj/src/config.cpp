#include "trophic/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace trophic {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument("config: malformed section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
        if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
        cfg.values_[key] = value;
    }
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("override must look like section.key=value: '" + assignment + "'");
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: key '" + key + "' is not a number: '" + it->second + "'");
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return static_cast<int>(v);
    } catch (...) {
        throw std::invalid_argument("config: key '" + key + "' is not an integer: '" + it->second + "'");
    }
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: key '" + key + "' is not an unsigned integer: '" + it->second + "'");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: key '" + key + "' is not a boolean: '" + it->second + "'");
}

void Config::validate_keys(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : values_)
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string Config::canonical() const {
    std::ostringstream out;
    for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
    return out.str();
}

std::uint64_t Config::hash() const {
    // FNV-1a over the canonical text
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : canonical()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string Config::hash_hex() const {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = hash();
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

const std::set<std::string>& config_schema() {
    static const std::set<std::string> allowed = {
        "run.experiment", "run.seed",
        "network.blocks", "network.block_size", "network.max_row_blocks", "network.init_row_blocks",
        "network.init_gain", "network.w_in_scale", "network.bias_init", "network.fb_init",
        "dynamics.tau_fast", "dynamics.noise_sigma",
        "rates.eta_h", "rates.eta_o", "rates.eta_d", "rates.eta_b", "rates.eta_out", "rates.eta_fb",
        "rates.p_star", "rates.eps_small", "rates.norm_cap", "rates.nlms", "rates.norm_projection",
        "structure.alpha", "structure.base_percentile", "structure.density_gain", "structure.error_gain",
        "structure.grow_count_max", "structure.init_scale", "structure.period", "structure.admit_quantile",
        "structure.enabled", "structure.baseline_mse",
        "task.kind", "task.period", "task.sigma_step", "task.mg_tau", "task.mg_warmup", "task.seed",
        "train.replicas", "train.washout",
        "prediction.steps", "prediction.checkpoint_step", "prediction.checkpoint_path", "prediction.csv",
        "exactness.train_steps", "exactness.settle_steps", "exactness.collect_steps", "exactness.seeds",
        "alignment.steps", "alignment.eta_fb",
        "temporal.train_steps", "temporal.collect_steps",
        "ablation.steps",
        "continual.steps_a", "continual.steps_b", "continual.settle_steps", "continual.eval_window", "continual.seeds",
        "continual.switch_period", "continual.switch_count", "continual.eta_h",
        "damage.converge_steps", "damage.recover_steps", "damage.ablate_fraction", "damage.seeds",
        "criticality.steps", "criticality.measure_every",
        "memory.steps", "memory.max_delay", "memory.eval_window", "memory.sigma_step", "memory.w_in_scale",
        "rl.episodes", "rl.seeds", "rl.eta_pi", "rl.gamma", "rl.lambda", "rl.baseline_episodes", "rl.policy_cap", "rl.adv_norm", "rl.reset_state", "rl.reward_scale", "rl.plastic", "rl.w_in_scale", "rl.explore_start", "rl.explore_end", "rl.action_repeat", "rl.blocks", "rl.block_size", "rl.tau_fast",
        "capacity.blocks", "capacity.k", "capacity.ell", "capacity.c",
        "task_export.length", "task_export.file",
    };
    return allowed;
}

} // namespace trophic
