// Plain-text key/value experiment configuration.
//
// Format: one "key = value" per line, '#' starts a comment, blank lines
// ignored. Documented keys: d, eps, gamma OR lambda, modes_per_dim, seed,
// ensemble_size, t_final, dt; subcommands read additional keys documented in
// the README.
#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace lab {

struct Config {
    std::map<std::string, std::string> kv;
    std::string raw;        // file contents as read (hashed into the manifest)
    std::string source_path;

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    // with-default variants
    std::string get_string(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key, double dflt) const;
    int get_int(const std::string& key, int dflt) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
};

Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

// FNV-1a 64-bit hash of the raw config bytes, hex-encoded; names every output.
std::string config_hash(const Config& cfg);

} // namespace lab
