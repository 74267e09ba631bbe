#include "regcore/config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>

#include "regcore/text.hpp"

namespace regcore {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& s, const std::string& key) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(key + ": not a number: '" + s + "'");
    return v;
}

std::uint64_t to_uint(const std::string& s, const std::string& key) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError(key + ": not a non-negative integer: '" + s + "'");
    }
    return v;
}

}  // namespace

ConfigMap ConfigMap::parse(std::istream& in) {
    ConfigMap cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        auto key = trim(std::string_view(body).substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        cfg.values_[key] = trim(std::string_view(body).substr(eq + 1));
    }
    return cfg;
}

ConfigMap ConfigMap::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse(in);
}

std::optional<std::string> ConfigMap::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    return v ? to_double(*v, key) : fallback;
}

std::uint64_t ConfigMap::get_uint(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    return v ? to_uint(*v, key) : fallback;
}

std::vector<double> ConfigMap::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    auto v = get(key);
    return v ? parse_double_list(*v) : fallback;
}

std::vector<std::uint64_t> ConfigMap::get_uints(const std::string& key,
                                                const std::vector<std::uint64_t>& fallback) const {
    auto v = get(key);
    return v ? parse_uint_list(*v) : fallback;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (auto f : split(text, ',')) out.push_back(to_double(trim(f), "list"));
    return out;
}

std::vector<std::uint64_t> parse_uint_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (auto f : split(text, ',')) out.push_back(to_uint(trim(f), "list"));
    return out;
}

std::string resolve_data_path(const std::string& path) {
    namespace fs = std::filesystem;
    if (path.empty() || fs::path(path).is_absolute()) return path;
    const char* root = std::getenv(kDataRootEnv);
    if (!root || !*root) return path;
    return (fs::path(root) / path).string();
}

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xF];
        h >>= 4;
    }
    out[16] = '\0';
    return out;
}

}  // namespace regcore
