#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tmerton/model.hpp"

namespace tmerton {

// Flat "key = value" configuration with '#' comments. Keys carry their units
// (e.g. r_per_year) so times are unambiguous. Environment variables of the
// form TMERTON_<KEY> (upper-cased key) override file values.
class ConfigMap {
public:
    ConfigMap() = default;
    static ConfigMap load_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void apply_env_overrides(const std::string& prefix = "TMERTON_");

    bool has(const std::string& key) const;

    // Required accessors throw ValidationError naming the missing key.
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;

    std::optional<double> find_double(const std::string& key) const;
    std::optional<std::uint64_t> find_uint(const std::string& key) const;
    std::optional<std::vector<double>> find_double_list(const std::string& key) const;
    std::optional<std::string> find_string(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
    std::string source_ = "<memory>";
};

// Builders for the common config blocks; messages name the offending key.
ModelParams model_params_from(const ConfigMap&);
ReportSchedule schedule_from(const ConfigMap&);
DebtClaim claim_from(const ConfigMap&);

}  // namespace tmerton
