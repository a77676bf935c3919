#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace trophic {

/// Flat key=value configuration with INI-style [section] headers; a key in
/// section [a] named b is addressed as "a.b". Unknown keys are rejected at
/// load against the project schema, and every run persists its resolved
/// canonical form next to the outputs.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    void apply_override(const std::string& assignment); // "a.b=c"

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Throws std::invalid_argument naming the first key outside the schema.
    void validate_keys(const std::set<std::string>& allowed) const;

    /// Sorted "key = value" lines; the hash and persisted config use this.
    std::string canonical() const;
    std::uint64_t hash() const;
    std::string hash_hex() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Every key any experiment understands.
const std::set<std::string>& config_schema();

} // namespace trophic
