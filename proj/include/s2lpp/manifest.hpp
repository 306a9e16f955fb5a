#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2lpp/cache.hpp"
#include "s2lpp/errors.hpp"
#include "s2lpp/hash.hpp"

namespace s2lpp {

/// Per-run provenance record, written next to the artifacts it describes.
/// The run_id is a deterministic function of the command, its inputs, and
/// the seed, so reruns of the same work share an identity; wall-clock fields
/// are the only nondeterministic content.
struct RunManifest {
    std::string run_id;
    std::string command;
    std::vector<std::string> args;
    std::string config_digest;                       // sha256 of the config file
    std::map<std::string, std::string> input_digests;  // input path → sha256
    std::vector<std::string> endpoint_ids;
    std::map<std::string, std::string> model_names;  // endpoint id → model name
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> artifacts;  // paths relative to the manifest
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    nlohmann::json extra = nlohmann::json::object();
};

/// UUID-shaped deterministic run identifier derived from the run's inputs.
inline std::string make_run_id(const RunManifest& m) {
    nlohmann::json identity{{"command", m.command},
                            {"args", m.args},
                            {"config_digest", m.config_digest},
                            {"input_digests", m.input_digests},
                            {"seed", m.seed}};
    std::string hex = sha256_hex(identity.dump());
    return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" +
           hex.substr(16, 4) + "-" + hex.substr(20, 12);
}

inline nlohmann::json to_json(const RunManifest& m) {
    return nlohmann::json{{"schema_version", 1},
                          {"run_id", m.run_id},
                          {"command", m.command},
                          {"args", m.args},
                          {"config_digest", m.config_digest},
                          {"input_digests", m.input_digests},
                          {"endpoint_ids", m.endpoint_ids},
                          {"model_names", m.model_names},
                          {"seed", m.seed},
                          {"started_at", m.started_at},
                          {"finished_at", m.finished_at},
                          {"artifacts", m.artifacts},
                          {"cache_hits", m.cache_hits},
                          {"cache_misses", m.cache_misses},
                          {"extra", m.extra}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j, const std::string& path) {
    RunManifest m;
    try {
        m.run_id = j.at("run_id").get<std::string>();
        m.command = j.at("command").get<std::string>();
        m.args = j.value("args", std::vector<std::string>{});
        m.config_digest = j.value("config_digest", std::string{});
        m.input_digests =
            j.value("input_digests", std::map<std::string, std::string>{});
        m.endpoint_ids = j.value("endpoint_ids", std::vector<std::string>{});
        m.model_names = j.value("model_names", std::map<std::string, std::string>{});
        m.seed = j.value("seed", std::uint64_t{0});
        m.started_at = j.value("started_at", std::string{});
        m.finished_at = j.value("finished_at", std::string{});
        m.artifacts = j.value("artifacts", std::vector<std::string>{});
        m.cache_hits = j.value("cache_hits", std::uint64_t{0});
        m.cache_misses = j.value("cache_misses", std::uint64_t{0});
        m.extra = j.value("extra", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path, 0, "", e.what());
    }
    return m;
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError(path.string(), 0, "", "invalid JSON");
    return manifest_from_json(j, path.string());
}

/// Marks a run as started: a `manifest.partial` file that survives a crash
/// so interrupted runs are detectable.
inline void begin_manifest(const std::filesystem::path& out_dir, RunManifest& m) {
    std::filesystem::create_directories(out_dir);
    m.started_at = utc_timestamp_now();
    if (m.run_id.empty()) m.run_id = make_run_id(m);
    std::ofstream out(out_dir / "manifest.partial");
    if (!out) throw CacheIoError("cannot write " + (out_dir / "manifest.partial").string());
    out << to_json(m).dump(2) << "\n";
}

/// Seals the run: writes `manifest.json` and removes the partial marker.
inline void finalize_manifest(const std::filesystem::path& out_dir, RunManifest& m) {
    m.finished_at = utc_timestamp_now();
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw CacheIoError("cannot write " + (out_dir / "manifest.json").string());
    out << to_json(m).dump(2) << "\n";
    std::filesystem::remove(out_dir / "manifest.partial");
}

}  // namespace s2lpp
