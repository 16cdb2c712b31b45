#include "tmerton/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "tmerton/csv_io.hpp"

namespace tmerton {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

ConfigMap ConfigMap::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open config file " + path);
    ConfigMap cfg;
    cfg.source_ = path;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ValidationError(path + ":" + std::to_string(line_no) + ": empty key");
        cfg.kv_[key] = value;
    }
    return cfg;
}

void ConfigMap::set(const std::string& key, const std::string& value) { kv_[key] = value; }

void ConfigMap::apply_env_overrides(const std::string& prefix) {
    for (auto& [key, value] : kv_) {
        std::string env_key = prefix;
        for (char ch : key) env_key += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (const char* env = std::getenv(env_key.c_str())) value = env;
    }
}

bool ConfigMap::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string ConfigMap::get_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end())
        throw ValidationError("config " + source_ + ": missing key '" + key + "'");
    return it->second;
}

double ConfigMap::get_double(const std::string& key) const {
    return parse_double_strict(get_string(key), "config key '" + key + "'");
}

std::uint64_t ConfigMap::get_uint(const std::string& key) const {
    const std::string text = get_string(key);
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
        throw ValidationError("config key '" + key + "': expected a nonnegative integer, got '" +
                              text + "'");
    return std::strtoull(text.c_str(), nullptr, 10);
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
    const std::string text = get_string(key);
    std::vector<double> out;
    std::string current;
    const auto flush = [&](bool final_field) {
        const std::string item = trim(current);
        current.clear();
        if (item.empty()) {
            if (final_field && out.empty()) return;  // wholly empty value
            throw ValidationError("config key '" + key + "': empty list entry");
        }
        out.push_back(parse_double_strict(item, "config key '" + key + "'"));
    };
    for (char ch : text) {
        if (ch == ',')
            flush(false);
        else
            current += ch;
    }
    flush(true);
    if (out.empty())
        throw ValidationError("config key '" + key + "': empty list");
    return out;
}

std::optional<double> ConfigMap::find_double(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get_double(key);
}

std::optional<std::uint64_t> ConfigMap::find_uint(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get_uint(key);
}

std::optional<std::vector<double>> ConfigMap::find_double_list(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get_double_list(key);
}

std::optional<std::string> ConfigMap::find_string(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get_string(key);
}

ModelParams model_params_from(const ConfigMap& cfg) {
    ModelParams p;
    p.v0 = cfg.get_double("v0");
    p.mu = cfg.get_double("mu_per_year");
    p.sigma = cfg.get_double("sigma_per_sqrt_year");
    p.r = cfg.get_double("r_per_year");
    p.rho = cfg.get_double("rho");
    p.validate();
    return p;
}

ReportSchedule schedule_from(const ConfigMap& cfg) {
    return ReportSchedule(cfg.get_double_list("schedule_years"));
}

DebtClaim claim_from(const ConfigMap& cfg) {
    DebtClaim claim;
    claim.face = cfg.get_double("face");
    claim.maturity = cfg.get_double("maturity_year");
    return claim;
}

}  // namespace tmerton
