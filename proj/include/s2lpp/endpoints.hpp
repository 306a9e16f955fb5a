#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace s2lpp {

enum class EndpointKind { remote, scripted };

inline const char* to_string(EndpointKind k) {
    return k == EndpointKind::remote ? "remote" : "scripted";
}

struct RetryPolicy {
    int max_attempts = 4;
    int backoff_base_ms = 500;
};

enum class Role { system, user };

struct ChatMessage {
    Role role = Role::user;
    std::string content;
};

/// One chat completion request. Temperature and max_tokens default to the
/// endpoint's values when unset.
struct ChatRequest {
    std::string endpoint_id;
    std::vector<ChatMessage> messages;
    std::optional<double> temperature;
    std::optional<int> max_tokens;

    static ChatRequest user_message(std::string endpoint_id, std::string content) {
        ChatRequest r;
        r.endpoint_id = std::move(endpoint_id);
        r.messages.push_back({Role::user, std::move(content)});
        return r;
    }
};

struct ModelResponse {
    std::string text;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    int latency_ms = 0;
    bool from_cache = false;
    int attempt_count = 0;  // transport attempts; 0 when served from cache
};

/// Deterministic offline stand-in for a model. The first matching rule wins;
/// no match falls through to default_reply. A rule with fail=true simulates
/// a permanent backend failure. Regex replies support $1..$9 capture groups;
/// exact/substring replies support an {input} placeholder.
struct ScriptedRule {
    enum class Match { exact, substring, regex };
    Match match = Match::exact;
    std::string pattern;
    std::string reply;
    bool fail = false;
};

struct ScriptedBehavior {
    std::vector<ScriptedRule> rules;
    std::string default_reply;
    std::optional<std::uint64_t> seed;
    /// Test hook: when set, bypasses the rule table entirely. Not
    /// serializable; only constructible in-process.
    std::function<std::string(const ChatRequest&)> responder;
};

/// A model reachable through the wire protocol, or a scripted stand-in.
/// Registered once at client construction; immutable afterwards.
struct ModelEndpoint {
    std::string id;
    EndpointKind kind = EndpointKind::remote;
    std::string base_url;     // remote only, e.g. "https://api.openai.com"
    std::string model_name;
    std::string api_key_env;  // name of the env var holding the credential
    double temperature = 0.0;
    int max_tokens = 256;
    int max_concurrency = 4;
    RetryPolicy retry;
    int timeout_ms = 120000;
    ScriptedBehavior scripted;  // scripted only
};

inline void validate_request(const ChatRequest& request) {
    bool has_user = false;
    for (const auto& m : request.messages) {
        if (m.content.empty())
            throw std::invalid_argument("chat message with empty content");
        if (m.role == Role::user) has_user = true;
    }
    if (!has_user) throw std::invalid_argument("chat request needs at least one user message");
}

// ---- JSON (de)serialization for config files -------------------------------

inline nlohmann::json to_json(const ScriptedRule& r) {
    const char* match = r.match == ScriptedRule::Match::exact        ? "exact"
                        : r.match == ScriptedRule::Match::substring ? "substring"
                                                                     : "regex";
    nlohmann::json j{{"match", match}, {"pattern", r.pattern}, {"reply", r.reply}};
    if (r.fail) j["fail"] = true;
    return j;
}

inline ScriptedRule scripted_rule_from_json(const nlohmann::json& j) {
    ScriptedRule r;
    std::string match = j.value("match", "exact");
    if (match == "exact")
        r.match = ScriptedRule::Match::exact;
    else if (match == "substring")
        r.match = ScriptedRule::Match::substring;
    else if (match == "regex")
        r.match = ScriptedRule::Match::regex;
    else
        throw std::invalid_argument("scripted rule match must be exact|substring|regex");
    r.pattern = j.value("pattern", "");
    r.reply = j.value("reply", "");
    r.fail = j.value("fail", false);
    return r;
}

inline nlohmann::json to_json(const ModelEndpoint& e) {
    nlohmann::json j{
        {"id", e.id},
        {"kind", to_string(e.kind)},
        {"model_name", e.model_name},
        {"temperature", e.temperature},
        {"max_tokens", e.max_tokens},
        {"max_concurrency", e.max_concurrency},
        {"retry", {{"max_attempts", e.retry.max_attempts},
                   {"backoff_base_ms", e.retry.backoff_base_ms}}},
        {"timeout_ms", e.timeout_ms},
    };
    if (e.kind == EndpointKind::remote) {
        j["base_url"] = e.base_url;
        if (!e.api_key_env.empty()) j["api_key_env"] = e.api_key_env;
    } else {
        nlohmann::json rules = nlohmann::json::array();
        for (const auto& r : e.scripted.rules) rules.push_back(to_json(r));
        j["scripted"] = {{"rules", rules}, {"default_reply", e.scripted.default_reply}};
        if (e.scripted.seed) j["scripted"]["seed"] = *e.scripted.seed;
    }
    return j;
}

inline ModelEndpoint endpoint_from_json(const nlohmann::json& j) {
    ModelEndpoint e;
    e.id = j.at("id").get<std::string>();
    std::string kind = j.value("kind", "remote");
    if (kind == "remote")
        e.kind = EndpointKind::remote;
    else if (kind == "scripted")
        e.kind = EndpointKind::scripted;
    else
        throw std::invalid_argument("endpoint kind must be remote|scripted");
    e.base_url = j.value("base_url", "");
    e.model_name = j.value("model_name", "");
    e.api_key_env = j.value("api_key_env", "");
    e.temperature = j.value("temperature", 0.0);
    e.max_tokens = j.value("max_tokens", 256);
    e.max_concurrency = j.value("max_concurrency", 4);
    if (auto it = j.find("retry"); it != j.end()) {
        e.retry.max_attempts = it->value("max_attempts", 4);
        e.retry.backoff_base_ms = it->value("backoff_base_ms", 500);
    }
    e.timeout_ms = j.value("timeout_ms", 120000);
    if (auto it = j.find("scripted"); it != j.end()) {
        for (const auto& r : it->value("rules", nlohmann::json::array()))
            e.scripted.rules.push_back(scripted_rule_from_json(r));
        e.scripted.default_reply = it->value("default_reply", "");
        if (it->contains("seed")) e.scripted.seed = (*it)["seed"].get<std::uint64_t>();
    }
    if (e.kind == EndpointKind::scripted && !e.base_url.empty())
        throw std::invalid_argument("scripted endpoint '" + e.id + "' must not set base_url");
    if (e.max_concurrency < 1)
        throw std::invalid_argument("endpoint '" + e.id + "': max_concurrency must be >= 1");
    if (e.temperature < 0.0 || e.temperature > 1.0)
        throw std::invalid_argument("endpoint '" + e.id + "': temperature must be in [0,1]");
    return e;
}

}  // namespace s2lpp
