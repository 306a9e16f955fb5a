#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <regex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "s2lpp/cache.hpp"
#include "s2lpp/endpoints.hpp"
#include "s2lpp/errors.hpp"

namespace s2lpp {

/// Per-endpoint usage counters. transport_calls counts every attempt that
/// actually reached the backend (network or scripted); peak_in_flight is the
/// high-water mark of simultaneous attempts.
struct CounterSnapshot {
    std::uint64_t transport_calls = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t coalesced = 0;  // identical in-flight requests deduplicated
    std::uint64_t peak_in_flight = 0;
};

/// Result slot for one batch item: either a response or the error that item
/// hit. Failures never poison sibling items.
struct CompletionOutcome {
    std::optional<ModelResponse> response;
    std::string error;
    std::string error_type;

    bool ok() const { return response.has_value(); }
    const ModelResponse& value() const {
        if (!response) throw BackendError(error.empty() ? "batch item failed" : error);
        return *response;
    }
};

struct ClientOptions {
    std::vector<ModelEndpoint> endpoints;
    /// Cache directory; empty disables the persistent cache (in-flight
    /// deduplication still applies).
    std::filesystem::path cache_dir;
};

namespace detail {

/// Counting admission gate bounding simultaneous backend attempts per
/// endpoint.
class AdmissionGate {
public:
    explicit AdmissionGate(int max) : max_(max) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return active_ < max_; });
        ++active_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int max_;
    int active_ = 0;
};

struct Counters {
    std::atomic<std::uint64_t> transport_calls{0};
    std::atomic<std::uint64_t> cache_hits{0};
    std::atomic<std::uint64_t> cache_misses{0};
    std::atomic<std::uint64_t> coalesced{0};
    std::atomic<std::uint64_t> in_flight{0};
    std::atomic<std::uint64_t> peak_in_flight{0};

    void enter() {
        std::uint64_t now = ++in_flight;
        std::uint64_t peak = peak_in_flight.load();
        while (now > peak && !peak_in_flight.compare_exchange_weak(peak, now)) {
        }
    }
    void exit() { --in_flight; }
};

struct EndpointState {
    ModelEndpoint endpoint;
    std::vector<std::optional<std::regex>> compiled_rules;  // parallel to scripted.rules
    std::string scheme_host;   // remote: "https://host:port"
    std::string path_prefix;   // remote: path component of base_url, if any
    AdmissionGate gate;
    Counters counters;

    explicit EndpointState(ModelEndpoint ep)
        : endpoint(std::move(ep)), gate(endpoint.max_concurrency) {
        if (endpoint.kind == EndpointKind::scripted) {
            for (const auto& rule : endpoint.scripted.rules) {
                if (rule.match == ScriptedRule::Match::regex)
                    compiled_rules.emplace_back(std::regex(rule.pattern));
                else
                    compiled_rules.emplace_back(std::nullopt);
            }
        } else {
            static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
            std::smatch m;
            if (!std::regex_match(endpoint.base_url, m, url_re))
                throw std::invalid_argument("endpoint '" + endpoint.id +
                                            "': base_url must look like http(s)://host[:port]");
            scheme_host = m[1].str();
            path_prefix = m[2].matched ? m[2].str() : "";
            while (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();
        }
    }
};

inline void replace_placeholder(std::string& text, std::string_view placeholder,
                                const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
}

}  // namespace detail

/// Uniform chat-completion access to every registered endpoint. The registry
/// is fixed at construction and the object is safe to share across threads;
/// complete() may be called concurrently and complete_batch() fans out
/// internally while honoring each endpoint's max_concurrency.
class Client {
public:
    explicit Client(ClientOptions options) {
        for (auto& ep : options.endpoints) {
            std::string id = ep.id;
            auto [it, inserted] =
                endpoints_.emplace(id, std::make_unique<detail::EndpointState>(std::move(ep)));
            if (!inserted) throw std::invalid_argument("duplicate endpoint id: " + id);
        }
        if (!options.cache_dir.empty()) cache_.emplace(options.cache_dir);
    }

    const ModelEndpoint& endpoint(const std::string& id) const {
        return state(id).endpoint;
    }

    bool has_endpoint(const std::string& id) const { return endpoints_.count(id) > 0; }

    const ResponseCache* cache() const { return cache_ ? &*cache_ : nullptr; }

    CounterSnapshot counters(const std::string& endpoint_id) const {
        const auto& c = state(endpoint_id).counters;
        CounterSnapshot s;
        s.transport_calls = c.transport_calls.load();
        s.cache_hits = c.cache_hits.load();
        s.cache_misses = c.cache_misses.load();
        s.coalesced = c.coalesced.load();
        s.peak_in_flight = c.peak_in_flight.load();
        return s;
    }

    /// Executes one request: persistent cache first, then in-flight
    /// deduplication, then the backend with retry/backoff on transient
    /// failures (HTTP 429/5xx and transport errors).
    ModelResponse complete(const ChatRequest& request) {
        detail::EndpointState& st = state(request.endpoint_id);
        validate_request(request);

        const CacheKey key = cache_key(request, st.endpoint);
        if (cache_) {
            if (auto entry = cache_->get(key)) {
                st.counters.cache_hits++;
                ModelResponse r;
                r.text = entry->response_text;
                r.prompt_tokens = entry->tokens.prompt;
                r.completion_tokens = entry->tokens.completion;
                r.from_cache = true;
                return r;
            }
            st.counters.cache_misses++;
        }

        // In-flight deduplication: the first requester for a key fetches,
        // everyone else waits on its result.
        std::shared_future<ModelResponse> waiter;
        std::promise<ModelResponse> leader_promise;
        {
            std::lock_guard lock(inflight_mutex_);
            auto it = inflight_.find(key.digest);
            if (it != inflight_.end()) {
                waiter = it->second;
            } else {
                inflight_.emplace(key.digest, leader_promise.get_future().share());
            }
        }
        if (waiter.valid()) {
            st.counters.coalesced++;
            ModelResponse r = waiter.get();  // rethrows the leader's error
            r.from_cache = true;
            r.latency_ms = 0;
            r.attempt_count = 0;
            return r;
        }

        try {
            ModelResponse response = dispatch(st, request);
            if (cache_) {
                CacheEntry entry;
                entry.key = key;
                entry.request_canonical = canonical_request(request, st.endpoint);
                entry.response_text = response.text;
                entry.tokens = {response.prompt_tokens, response.completion_tokens};
                entry.created_at = utc_timestamp_now();
                cache_->put(entry);
            }
            leader_promise.set_value(response);
            erase_inflight(key.digest);
            return response;
        } catch (...) {
            leader_promise.set_exception(std::current_exception());
            erase_inflight(key.digest);
            throw;
        }
    }

    /// Runs every request, results positionally aligned with the inputs.
    /// Failures are reported per item.
    std::vector<CompletionOutcome> complete_batch(std::span<const ChatRequest> requests) {
        std::vector<CompletionOutcome> out(requests.size());
        if (requests.empty()) return out;

        std::size_t workers = worker_count(requests);
        std::atomic<std::size_t> next{0};
        auto run = [&] {
            for (std::size_t i = next.fetch_add(1); i < requests.size();
                 i = next.fetch_add(1)) {
                try {
                    out[i].response = complete(requests[i]);
                } catch (const Error& e) {
                    out[i].error = e.what();
                    out[i].error_type = error_type_name(e);
                } catch (const std::exception& e) {
                    out[i].error = e.what();
                    out[i].error_type = "InternalError";
                }
            }
        };

        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
        return out;
    }

private:
    detail::EndpointState& state(const std::string& id) const {
        auto it = endpoints_.find(id);
        if (it == endpoints_.end()) throw EndpointUnknownError(id);
        return *it->second;
    }

    void erase_inflight(const std::string& digest) {
        std::lock_guard lock(inflight_mutex_);
        inflight_.erase(digest);
    }

    std::size_t worker_count(std::span<const ChatRequest> requests) const {
        std::size_t budget = 0;
        std::vector<const detail::EndpointState*> seen;
        for (const auto& r : requests) {
            auto it = endpoints_.find(r.endpoint_id);
            if (it == endpoints_.end()) continue;
            if (std::find(seen.begin(), seen.end(), it->second.get()) == seen.end()) {
                seen.push_back(it->second.get());
                budget += static_cast<std::size_t>(it->second->endpoint.max_concurrency);
            }
        }
        budget = std::max<std::size_t>(budget, 1);
        return std::min({requests.size(), budget, std::size_t{64}});
    }

    static std::string error_type_name(const Error& e) {
        if (dynamic_cast<const EndpointUnknownError*>(&e)) return "EndpointUnknown";
        if (dynamic_cast<const CredentialMissingError*>(&e)) return "CredentialMissing";
        if (dynamic_cast<const ExhaustedRetriesError*>(&e)) return "ExhaustedRetries";
        if (dynamic_cast<const MalformedReplyError*>(&e)) return "MalformedReply";
        if (dynamic_cast<const HttpStatusError*>(&e)) return "HttpStatus";
        if (dynamic_cast<const ScriptedFailureError*>(&e)) return "ScriptedFailure";
        if (dynamic_cast<const BackendError*>(&e)) return "BackendError";
        if (dynamic_cast<const DataError*>(&e)) return "DataError";
        return "Error";
    }

    ModelResponse dispatch(detail::EndpointState& st, const ChatRequest& request) {
        auto start = std::chrono::steady_clock::now();
        ModelResponse response = st.endpoint.kind == EndpointKind::scripted
                                     ? dispatch_scripted(st, request)
                                     : dispatch_remote(st, request);
        response.latency_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count());
        return response;
    }

    ModelResponse dispatch_scripted(detail::EndpointState& st, const ChatRequest& request) {
        st.gate.acquire();
        st.counters.enter();
        st.counters.transport_calls++;
        struct Exit {
            detail::EndpointState& st;
            ~Exit() {
                st.counters.exit();
                st.gate.release();
            }
        } exit_guard{st};

        ModelResponse response;
        response.attempt_count = 1;

        const ScriptedBehavior& behavior = st.endpoint.scripted;
        if (behavior.responder) {
            response.text = behavior.responder(request);
            return response;
        }

        // Rules match against the last user message.
        std::string content;
        for (const auto& m : request.messages)
            if (m.role == Role::user) content = m.content;

        for (std::size_t i = 0; i < behavior.rules.size(); ++i) {
            const ScriptedRule& rule = behavior.rules[i];
            bool matched = false;
            std::string reply = rule.reply;
            switch (rule.match) {
                case ScriptedRule::Match::exact:
                    matched = content == rule.pattern;
                    break;
                case ScriptedRule::Match::substring:
                    matched = content.find(rule.pattern) != std::string::npos;
                    break;
                case ScriptedRule::Match::regex: {
                    std::smatch m;
                    if (std::regex_search(content, m, *st.compiled_rules[i])) {
                        matched = true;
                        reply = m.format(rule.reply);
                    }
                    break;
                }
            }
            if (matched) {
                if (rule.fail)
                    throw ScriptedFailureError("scripted failure: " +
                                               (reply.empty() ? rule.pattern : reply));
                detail::replace_placeholder(reply, "{input}", content);
                response.text = reply;
                return response;
            }
        }
        std::string reply = behavior.default_reply;
        detail::replace_placeholder(reply, "{input}", content);
        response.text = reply;
        return response;
    }

    ModelResponse dispatch_remote(detail::EndpointState& st, const ChatRequest& request) {
        const ModelEndpoint& ep = st.endpoint;

        std::string api_key;
        if (!ep.api_key_env.empty()) {
            const char* value = std::getenv(ep.api_key_env.c_str());
            if (!value || !*value) throw CredentialMissingError(ep.api_key_env);
            api_key = value;
        }

        nlohmann::json messages = nlohmann::json::array();
        for (const auto& m : request.messages)
            messages.push_back({{"role", m.role == Role::system ? "system" : "user"},
                                {"content", m.content}});
        nlohmann::json body{
            {"model", ep.model_name},
            {"messages", messages},
            {"temperature", request.temperature.value_or(ep.temperature)},
            {"max_tokens", request.max_tokens.value_or(ep.max_tokens)},
        };
        const std::string payload = body.dump();
        const std::string path = st.path_prefix + "/v1/chat/completions";

        int last_status = 0;
        std::string last_detail;
        for (int attempt = 1; attempt <= ep.retry.max_attempts; ++attempt) {
            httplib::Result result = [&] {
                st.gate.acquire();
                st.counters.enter();
                st.counters.transport_calls++;
                struct Exit {
                    detail::EndpointState& st;
                    ~Exit() {
                        st.counters.exit();
                        st.gate.release();
                    }
                } exit_guard{st};

                httplib::Client http(st.scheme_host);
                http.set_connection_timeout(ep.timeout_ms / 1000, (ep.timeout_ms % 1000) * 1000);
                http.set_read_timeout(ep.timeout_ms / 1000, (ep.timeout_ms % 1000) * 1000);
                http.set_write_timeout(ep.timeout_ms / 1000, (ep.timeout_ms % 1000) * 1000);
                httplib::Headers headers;
                if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
                return http.Post(path, headers, payload, "application/json");
            }();

            if (result && result->status == 200) {
                ModelResponse response = parse_chat_completion(result->body);
                response.attempt_count = attempt;
                return response;
            }
            if (result) {
                last_status = result->status;
                last_detail = result->body.substr(0, 200);
                bool transient = result->status == 429 || result->status >= 500;
                if (!transient) throw HttpStatusError(result->status, last_detail);
            } else {
                last_status = 0;
                last_detail = httplib::to_string(result.error());
            }
            if (attempt < ep.retry.max_attempts) backoff_sleep(ep.retry, attempt);
        }
        throw ExhaustedRetriesError(ep.retry.max_attempts, last_status, last_detail);
    }

    static ModelResponse parse_chat_completion(const std::string& body) {
        nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded()) throw MalformedReplyError("response body is not JSON");
        ModelResponse r;
        try {
            const auto& choices = j.at("choices");
            if (!choices.is_array() || choices.empty())
                throw MalformedReplyError("response has no choices");
            r.text = choices.at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw MalformedReplyError("missing choices[0].message.content");
        }
        if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
            r.prompt_tokens = usage->value("prompt_tokens", 0);
            r.completion_tokens = usage->value("completion_tokens", 0);
        }
        return r;
    }

    static void backoff_sleep(const RetryPolicy& retry, int completed_attempts) {
        double delay = static_cast<double>(retry.backoff_base_ms);
        for (int i = 1; i < completed_attempts; ++i) delay *= 2.0;
        thread_local std::mt19937 jitter_gen{std::random_device{}()};
        std::uniform_real_distribution<double> jitter(0.8, 1.2);
        delay *= jitter(jitter_gen);
        std::this_thread::sleep_for(
            std::chrono::milliseconds(static_cast<long long>(delay)));
    }

    std::map<std::string, std::unique_ptr<detail::EndpointState>> endpoints_;
    std::optional<ResponseCache> cache_;
    std::mutex inflight_mutex_;
    std::map<std::string, std::shared_future<ModelResponse>> inflight_;
};

}  // namespace s2lpp
