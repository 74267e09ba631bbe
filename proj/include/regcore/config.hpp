#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace regcore {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` settings. Lines starting with '#' are comments.
class ConfigMap {
public:
    static ConfigMap parse(std::istream& in);
    static ConfigMap load_file(const std::string& path);

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::uint64_t> get_uints(const std::string& key, const std::vector<std::uint64_t>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Parses "a,b,c" lists.
std::vector<double> parse_double_list(const std::string& text);
std::vector<std::uint64_t> parse_uint_list(const std::string& text);

/// Name of the environment variable holding the data root.
inline constexpr const char* kDataRootEnv = "REGCORE_DATA_ROOT";

/// Relative paths are resolved against $REGCORE_DATA_ROOT when it is set.
std::string resolve_data_path(const std::string& path);

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::string& path);

}  // namespace regcore
