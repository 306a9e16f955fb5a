#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "s2lpp/endpoints.hpp"
#include "s2lpp/errors.hpp"
#include "s2lpp/hash.hpp"
#include "s2lpp/log.hpp"

namespace s2lpp {

struct CacheKey {
    std::string digest;  // 64 hex chars, SHA-256 of the canonical request

    bool operator==(const CacheKey&) const = default;
};

struct TokenCounts {
    int prompt = 0;
    int completion = 0;
};

/// Immutable record of one completed request. request_canonical is the exact
/// string whose SHA-256 is the key, so every entry is self-verifying.
struct CacheEntry {
    CacheKey key;
    std::string request_canonical;
    std::string response_text;
    TokenCounts tokens;
    std::string created_at;  // UTC, e.g. "2026-08-26T12:00:00Z"
};

inline std::string utc_timestamp_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Canonical request encoding: a JSON object with sorted keys covering
/// (endpoint kind, model name, ordered messages, effective temperature,
/// effective max_tokens). Message content is encoded verbatim — no
/// whitespace normalization — so byte-different prompts never collide.
inline std::string canonical_request(const ChatRequest& request, const ModelEndpoint& endpoint) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"content", m.content},
                            {"role", m.role == Role::system ? "system" : "user"}});
    nlohmann::json j{
        {"kind", to_string(endpoint.kind)},
        {"max_tokens", request.max_tokens.value_or(endpoint.max_tokens)},
        {"messages", messages},
        {"model", endpoint.model_name},
        {"temperature", request.temperature.value_or(endpoint.temperature)},
    };
    return j.dump();
}

inline CacheKey cache_key(const ChatRequest& request, const ModelEndpoint& endpoint) {
    return CacheKey{sha256_hex(canonical_request(request, endpoint))};
}

/// One-file-per-entry persistent cache under dir/<first 2 hex>/<digest>.json.
/// Writers stage to a temp file and rename, so readers never observe a
/// partial entry; concurrent same-key writers are idempotent because entries
/// are deterministic.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw CacheIoError("cannot create cache directory " + dir_.string() + ": " +
                                   ec.message());
    }

    const std::filesystem::path& dir() const { return dir_; }

    std::optional<CacheEntry> get(const CacheKey& key) const {
        auto path = entry_path(key);
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
        nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            warn("corrupt cache entry (bad JSON), treating as miss: " + path.string());
            return std::nullopt;
        }
        CacheEntry entry;
        try {
            entry.key.digest = j.at("digest").get<std::string>();
            entry.request_canonical = j.at("request").get<std::string>();
            entry.response_text = j.at("response_text").get<std::string>();
            entry.tokens.prompt = j.value("prompt_tokens", 0);
            entry.tokens.completion = j.value("completion_tokens", 0);
            entry.created_at = j.value("created_at", "");
        } catch (const nlohmann::json::exception&) {
            warn("corrupt cache entry (missing fields), treating as miss: " + path.string());
            return std::nullopt;
        }
        if (entry.key != key || sha256_hex(entry.request_canonical) != key.digest) {
            warn("corrupt cache entry (checksum mismatch), treating as miss: " + path.string());
            return std::nullopt;
        }
        return entry;
    }

    void put(const CacheEntry& entry) const {
        if (sha256_hex(entry.request_canonical) != entry.key.digest)
            throw CacheIoError("cache entry key does not match its request content");
        auto path = entry_path(entry.key);
        if (std::filesystem::exists(path)) return;  // entries are immutable

        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw CacheIoError("cannot create cache shard: " + ec.message());

        nlohmann::json j{
            {"schema_version", 1},
            {"digest", entry.key.digest},
            {"request", entry.request_canonical},
            {"response_text", entry.response_text},
            {"prompt_tokens", entry.tokens.prompt},
            {"completion_tokens", entry.tokens.completion},
            {"created_at", entry.created_at},
        };

        auto tmp = path;
        tmp += ".tmp." + std::to_string(tmp_counter().fetch_add(1)) + "." +
               std::to_string(::getpid());
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw CacheIoError("cannot write cache entry: " + tmp.string());
            out << j.dump(2) << '\n';
            out.flush();
            if (!out) throw CacheIoError("short write on cache entry: " + tmp.string());
        }
        std::filesystem::rename(tmp, path, ec);
        if (ec) {
            std::filesystem::remove(tmp, ec);
            throw CacheIoError("cannot commit cache entry " + path.string());
        }
    }

    /// Deletes entries whose created_at is older than max_age; corrupt
    /// entries fall back to file mtime. Returns the number removed.
    std::size_t gc_older_than(std::chrono::seconds max_age) const {
        std::size_t removed = 0;
        auto now = std::chrono::system_clock::now();
        std::error_code ec;
        for (auto it = std::filesystem::recursive_directory_iterator(dir_, ec);
             it != std::filesystem::recursive_directory_iterator(); ++it) {
            if (!it->is_regular_file() || it->path().extension() != ".json") continue;
            auto age = entry_age(it->path(), now);
            if (age && *age > max_age) {
                std::filesystem::remove(it->path(), ec);
                if (!ec) ++removed;
            }
        }
        return removed;
    }

private:
    static std::atomic<std::uint64_t>& tmp_counter() {
        static std::atomic<std::uint64_t> counter{0};
        return counter;
    }

    std::filesystem::path entry_path(const CacheKey& key) const {
        return dir_ / key.digest.substr(0, 2) / (key.digest + ".json");
    }

    static std::optional<std::chrono::seconds> entry_age(
        const std::filesystem::path& path, std::chrono::system_clock::time_point now) {
        std::ifstream in(path, std::ios::binary);
        if (in) {
            nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
            if (j.is_object() && j.contains("created_at")) {
                std::tm tm{};
                if (strptime(j["created_at"].get<std::string>().c_str(), "%Y-%m-%dT%H:%M:%SZ",
                             &tm) != nullptr) {
                    auto created = std::chrono::system_clock::from_time_t(timegm(&tm));
                    return std::chrono::duration_cast<std::chrono::seconds>(now - created);
                }
            }
        }
        std::error_code ec;
        auto mtime = std::filesystem::last_write_time(path, ec);
        if (ec) return std::nullopt;
        auto sys_mtime = std::chrono::file_clock::to_sys(mtime);
        return std::chrono::duration_cast<std::chrono::seconds>(now - sys_mtime);
    }

    std::filesystem::path dir_;
};

}  // namespace s2lpp
