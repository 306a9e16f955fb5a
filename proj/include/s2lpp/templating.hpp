#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2lpp/backends.hpp"
#include "s2lpp/datasets.hpp"
#include "s2lpp/errors.hpp"
#include "s2lpp/text.hpp"

namespace s2lpp {

enum class Task { qa, nli };

inline const char* to_string(Task t) { return t == Task::qa ? "qa" : "nli"; }

inline Task task_from_string(const std::string& s) {
    if (s == "qa") return Task::qa;
    if (s == "nli") return Task::nli;
    throw SchemaError("", 0, "task", "expected \"qa\" or \"nli\", got \"" + s + "\"");
}

enum class Origin { generated, manual };

inline const char* to_string(Origin o) {
    return o == Origin::generated ? "generated" : "manual";
}

inline Origin origin_from_string(const std::string& s) {
    if (s == "generated") return Origin::generated;
    if (s == "manual") return Origin::manual;
    throw SchemaError("", 0, "origin", "expected \"generated\" or \"manual\", got \"" + s + "\"");
}

/// One candidate prompt P_i. QA templates carry a single [X] slot (the
/// subject); NLI templates carry [P] (premise) and [H] (hypothesis) once
/// each.
struct PromptTemplate {
    int index = 0;
    std::string text;
    Task task = Task::qa;
    std::string relation_id;  // qa only; empty for nli
    Origin origin = Origin::generated;
};

struct CandidateSet {
    Task task = Task::qa;
    std::string relation_id;
    std::string relation_name;
    std::vector<PromptTemplate> templates;
};

namespace detail {

inline int count_occurrences(std::string_view text, std::string_view marker) {
    int n = 0;
    std::size_t pos = 0;
    while ((pos = text.find(marker, pos)) != std::string_view::npos) {
        ++n;
        pos += marker.size();
    }
    return n;
}

}  // namespace detail

inline bool template_text_valid(std::string_view text, Task task) {
    if (task == Task::qa)
        return detail::count_occurrences(text, "[X]") == 1 &&
               detail::count_occurrences(text, "[Y]") == 0;
    return detail::count_occurrences(text, "[P]") == 1 &&
           detail::count_occurrences(text, "[H]") == 1;
}

inline void validate_template(const PromptTemplate& t) {
    if (t.index < 0)
        throw SchemaError("", 0, "index", "template index must be non-negative");
    if (!template_text_valid(t.text, t.task)) {
        const char* expect = t.task == Task::qa ? "exactly one [X] and no [Y]"
                                                : "exactly one [P] and one [H]";
        throw SchemaError("", 0, "text",
                          "template \"" + t.text + "\" must contain " + expect);
    }
}

inline void validate_candidate_set(const CandidateSet& set) {
    if (set.templates.empty())
        throw SchemaError("", 0, "templates", "candidate set is empty");
    for (std::size_t i = 0; i < set.templates.size(); ++i) {
        const PromptTemplate& t = set.templates[i];
        if (t.task != set.task)
            throw SchemaError("", 0, "task", "template task differs from set task");
        if (t.index != static_cast<int>(i))
            throw SchemaError("", 0, "index",
                              "template indices must be 0..n-1 in order; position " +
                                  std::to_string(i) + " has index " + std::to_string(t.index));
        validate_template(t);
    }
}

namespace detail {

/// Replaces the first occurrence of each marker by splicing around positions
/// located in the ORIGINAL template, so substitution values containing
/// marker-like text are never rescanned.
inline std::string splice_slots(const std::string& tmpl,
                                const std::vector<std::pair<std::string, std::string>>& slots) {
    std::vector<std::pair<std::size_t, const std::pair<std::string, std::string>*>> found;
    for (const auto& slot : slots) {
        std::size_t pos = tmpl.find(slot.first);
        if (pos == std::string::npos)
            throw SlotMismatchError("template is missing slot " + slot.first);
        found.emplace_back(pos, &slot);
    }
    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::string out;
    out.reserve(tmpl.size() + 64);
    std::size_t cursor = 0;
    for (const auto& [pos, slot] : found) {
        out.append(tmpl, cursor, pos - cursor);
        out.append(slot->second);
        cursor = pos + slot->first.size();
    }
    out.append(tmpl, cursor, std::string::npos);
    return out;
}

}  // namespace detail

inline std::string render(const PromptTemplate& tmpl, const RelationTriple& sample) {
    if (tmpl.task != Task::qa)
        throw SlotMismatchError("relation sample passed to a non-qa template");
    return detail::splice_slots(tmpl.text, {{"[X]", sample.subject}});
}

inline std::string render(const PromptTemplate& tmpl, const EntailmentPair& sample) {
    if (tmpl.task != Task::nli)
        throw SlotMismatchError("entailment sample passed to a non-nli template");
    return detail::splice_slots(tmpl.text,
                                {{"[P]", sample.premise}, {"[H]", sample.hypothesis}});
}

/// The instruction sent to the generator model. Kept in sync with
/// fixtures/meta_prompts/ so the exact wording is versioned data, not lore.
inline std::string generation_instruction(const std::string& relation_name, int n, Task task) {
    std::string slot_rule =
        task == Task::qa
            ? "Each question must contain the placeholder [X] exactly once, standing for "
              "the subject entity, and must not contain any other placeholder."
            : "Each question must contain the placeholder [P] exactly once, standing for "
              "the premise sentence, and the placeholder [H] exactly once, standing for "
              "the hypothesis sentence.";
    return "Write " + std::to_string(n) +
           " distinct natural-language question templates asking for the relation \"" +
           relation_name + "\". " + slot_rule +
           " Reply with a numbered list, one template per line, and nothing else.";
}

namespace detail {

/// Strips list decoration ("3. ", "3) ", "- ", quotes) from one generator
/// output line; returns nothing for lines that are not templates.
inline std::optional<std::string> parse_candidate_line(const std::string& raw) {
    std::string line = trim(raw);
    if (line.empty()) return std::nullopt;
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')' || line[i] == ':'))
        ++i;
    else if (i == 0 && (line[0] == '-' || line[0] == '*'))
        i = 1;
    else if (i > 0)
        return std::nullopt;  // bare number, no separator
    std::string body = trim(line.substr(i));
    if (body.size() >= 2 && body.front() == '"' && body.back() == '"')
        body = trim(body.substr(1, body.size() - 2));
    if (body.empty()) return std::nullopt;
    return body;
}

}  // namespace detail

/// Asks the generator for n templates at temperature 0 and parses the
/// numbered list it returns. Malformed or duplicate lines are dropped; if
/// fewer than n valid templates come back, the remainder is re-requested up
/// to two more times before giving up.
inline CandidateSet generate_candidates(Client& client, const std::string& generator_id,
                                        const std::string& relation_name, int n = 10,
                                        Task task = Task::qa,
                                        const std::string& relation_id = "") {
    if (n < 1) throw UsageError("candidate count must be at least 1");

    CandidateSet set;
    set.task = task;
    set.relation_id = relation_id.empty() ? relation_name : relation_id;
    set.relation_name = relation_name;

    std::vector<std::string> texts;
    const int max_calls = 3;  // one initial request plus two retries
    for (int call = 0; call < max_calls && static_cast<int>(texts.size()) < n; ++call) {
        int missing = n - static_cast<int>(texts.size());
        ChatRequest request = ChatRequest::user_message(
            generator_id, generation_instruction(relation_name, missing, task));
        request.temperature = 0.0;
        ModelResponse response = client.complete(request);
        for (const std::string& line : split_lines(response.text)) {
            auto body = detail::parse_candidate_line(line);
            if (!body || !template_text_valid(*body, task)) continue;
            if (std::find(texts.begin(), texts.end(), *body) != texts.end()) continue;
            texts.push_back(*body);
            if (static_cast<int>(texts.size()) == n) break;
        }
    }
    if (static_cast<int>(texts.size()) < n)
        throw GenerationParseError("generator produced " + std::to_string(texts.size()) +
                                   " valid templates for \"" + relation_name + "\", needed " +
                                   std::to_string(n));

    for (int i = 0; i < n; ++i) {
        PromptTemplate t;
        t.index = i;
        t.text = texts[static_cast<std::size_t>(i)];
        t.task = task;
        t.relation_id = task == Task::qa ? set.relation_id : "";
        t.origin = Origin::generated;
        set.templates.push_back(std::move(t));
    }
    validate_candidate_set(set);
    return set;
}

// ---- Candidate file round-trip ---------------------------------------------
// Schema: {schema_version, task, relation_id, relation_name, templates:
//          [{index, text, origin}]}

inline nlohmann::json to_json(const CandidateSet& set) {
    nlohmann::json templates = nlohmann::json::array();
    for (const auto& t : set.templates)
        templates.push_back({{"index", t.index},
                             {"text", t.text},
                             {"origin", std::string(to_string(t.origin))}});
    return nlohmann::json{{"schema_version", 1},
                          {"task", std::string(to_string(set.task))},
                          {"relation_id", set.relation_id},
                          {"relation_name", set.relation_name},
                          {"templates", std::move(templates)}};
}

inline CandidateSet candidate_set_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, 0, "", "candidate file must be a JSON object");
    CandidateSet set;
    try {
        set.task = task_from_string(j.at("task").get<std::string>());
        set.relation_id = j.value("relation_id", std::string{});
        set.relation_name = j.value("relation_name", set.relation_id);
        const auto& templates = j.at("templates");
        if (!templates.is_array())
            throw SchemaError(path, 0, "templates", "expected an array");
        for (const auto& tj : templates) {
            PromptTemplate t;
            t.index = tj.at("index").get<int>();
            t.text = nfc(tj.at("text").get<std::string>());
            t.task = set.task;
            t.relation_id = set.task == Task::qa ? set.relation_id : "";
            t.origin = origin_from_string(tj.value("origin", std::string("generated")));
            set.templates.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path, 0, "", e.what());
    }
    for (std::size_t a = 0; a < set.templates.size(); ++a)
        for (std::size_t b = a + 1; b < set.templates.size(); ++b)
            if (set.templates[a].index == set.templates[b].index)
                throw SchemaError(path, 0, "index",
                                  "duplicate template index " +
                                      std::to_string(set.templates[a].index));
    try {
        validate_candidate_set(set);
    } catch (const SchemaError& e) {
        throw SchemaError(path, 0, e.field(), e.what());
    }
    return set;
}

inline CandidateSet load_candidates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError(path, 0, "", "invalid JSON");
    return candidate_set_from_json(j, path);
}

inline void save_candidates(const CandidateSet& set, const std::string& path) {
    validate_candidate_set(set);
    std::ofstream out(path);
    if (!out) throw CacheIoError("cannot write " + path);
    out << to_json(set).dump(2) << "\n";
}

}  // namespace s2lpp
