#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2lpp/endpoints.hpp"
#include "s2lpp/errors.hpp"

namespace s2lpp {

/// Harness configuration. Credentials never live here: endpoints carry only
/// the *name* of the environment variable that holds their key.
struct Config {
    std::vector<ModelEndpoint> endpoints;
    std::filesystem::path cache_dir;  // empty disables the response cache
    int dev_size = 100;
    int n_candidates = 10;
    std::uint64_t seed = 0;
};

/// Resolution order for the config file: explicit --config flag, then the
/// S2LPP_CONFIG environment variable.
inline std::string resolve_config_path(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("S2LPP_CONFIG"); env && *env) return env;
    throw UsageError("no config file: pass --config or set S2LPP_CONFIG");
}

inline Config config_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, 0, "", "config must be a JSON object");
    Config config;
    try {
        for (const auto& ej : j.value("endpoints", nlohmann::json::array())) {
            for (const char* forbidden : {"api_key", "apikey", "token", "secret"})
                if (ej.contains(forbidden))
                    throw SchemaError(path, 0, forbidden,
                                      "credentials must not appear in config; set "
                                      "api_key_env to the NAME of an environment variable");
            config.endpoints.push_back(endpoint_from_json(ej));
        }
        if (j.contains("cache_dir"))
            config.cache_dir = j.at("cache_dir").get<std::string>();
        config.dev_size = j.value("dev_size", 100);
        config.n_candidates = j.value("n_candidates", 10);
        config.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path, 0, "", e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path, 0, "endpoints", e.what());
    }
    if (config.dev_size < 1) throw SchemaError(path, 0, "dev_size", "must be at least 1");
    if (config.n_candidates < 1)
        throw SchemaError(path, 0, "n_candidates", "must be at least 1");

    std::set<std::string> ids;
    for (const auto& e : config.endpoints)
        if (!ids.insert(e.id).second)
            throw SchemaError(path, 0, "endpoints", "duplicate endpoint id '" + e.id + "'");
    return config;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError(path, 0, "", "invalid JSON");
    return config_from_json(j, path);
}

inline nlohmann::json to_json(const Config& config) {
    nlohmann::json endpoints = nlohmann::json::array();
    for (const auto& e : config.endpoints) endpoints.push_back(to_json(e));
    return nlohmann::json{{"schema_version", 1},
                          {"endpoints", std::move(endpoints)},
                          {"cache_dir", config.cache_dir.string()},
                          {"dev_size", config.dev_size},
                          {"n_candidates", config.n_candidates},
                          {"seed", config.seed}};
}

}  // namespace s2lpp
