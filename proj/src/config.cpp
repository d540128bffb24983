#include "lab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lab {

namespace {
std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
} // namespace

Config parse_config_text(const std::string& text) {
    Config cfg;
    cfg.raw = text;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::domain_error("config line " + std::to_string(lineno) +
                                    ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::domain_error("config line " + std::to_string(lineno) + ": empty key or value");
        cfg.kv[key] = val;
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::domain_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    Config cfg = parse_config_text(ss.str());
    cfg.source_path = path;
    return cfg;
}

std::string Config::get_string(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::domain_error("missing required config key: " + key);
    return it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::domain_error("config key '" + key + "': bad number '" + v + "'");
    return x;
}

int Config::get_int(const std::string& key) const {
    const std::string v = get_string(key);
    std::size_t pos = 0;
    int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::domain_error("config key '" + key + "': bad integer '" + v + "'");
    return x;
}

std::uint64_t Config::get_u64(const std::string& key) const {
    const std::string v = get_string(key);
    std::size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::domain_error("config key '" + key + "': bad integer '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

std::string Config::get_string(const std::string& key, const std::string& dflt) const {
    return has(key) ? get_string(key) : dflt;
}
double Config::get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
}
int Config::get_int(const std::string& key, int dflt) const {
    return has(key) ? get_int(key) : dflt;
}
std::uint64_t Config::get_u64(const std::string& key, std::uint64_t dflt) const {
    return has(key) ? get_u64(key) : dflt;
}

std::string config_hash(const Config& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : cfg.raw) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace lab
