#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cml/engine.hpp"

namespace cml::cli {

using Json = nlohmann::json;

// Malformed or inconsistent configuration; the message names the key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A JSON object whose keys must all be consumed. Missing optional keys are
// written back with their defaults so the resolved config can be echoed.
class Section {
public:
    Section(Json& node, std::string path);

    const std::string& path() const noexcept { return path_; }
    bool has(std::string_view key) const;

    double number(std::string_view key, double fallback);
    double number(std::string_view key);
    long long integer(std::string_view key, long long fallback);
    long long integer(std::string_view key);
    bool boolean(std::string_view key, bool fallback);
    std::string string(std::string_view key, std::string_view fallback);
    std::string string(std::string_view key);
    Json& raw(std::string_view key);
    Json& raw(std::string_view key, Json fallback);
    Section child(std::string_view key);

    // Throws ConfigError naming the first key never read.
    void finish() const;

private:
    Json& lookup(std::string_view key);
    std::string key_path(std::string_view key) const;

    Json* node_;
    std::string path_;
    std::set<std::string, std::less<>> used_;
};

struct ExperimentConfig {
    Json resolved;             // input with defaults filled in and the effective seed
    EngineConfig engine;
    std::string probe;         // experiment.probe, may be empty
    std::uint64_t seed = 1;
    std::string output_dir;    // output.dir, may be empty
};

// Parses everything except experiment.params, which the probe reads through
// `params(config)` and must finish itself.
ExperimentConfig parse_config(Json document, std::uint64_t const* seed_override = nullptr);
ExperimentConfig load_config(const std::filesystem::path& path, std::uint64_t const* seed_override = nullptr);

Section params(ExperimentConfig& config);

// 1D: integer; 2D: [x, y].
Site parse_site(const Json& j, int dim, const std::string& where);
Json site_json(Site s, int dim);

}  // namespace cml::cli
