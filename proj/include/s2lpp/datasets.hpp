#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2lpp/errors.hpp"
#include "s2lpp/log.hpp"
#include "s2lpp/numbers.hpp"
#include "s2lpp/rng.hpp"
#include "s2lpp/text.hpp"

namespace s2lpp {

/// One (subject, relation, object) fact. Subject fills the [X] slot of a QA
/// template; object is the gold answer checked by containment.
struct RelationTriple {
    std::string subject;
    std::string relation_id;
    std::string relation_name;
    std::string object;
    std::vector<std::string> aliases;
};

enum class Direction { forward, reverse };

struct EntailmentPair {
    std::string premise;     // the [P] slot
    std::string hypothesis;  // the [H] slot
    bool label = false;      // does premise entail hypothesis?
    Direction direction = Direction::forward;
};

struct ArithmeticProblem {
    std::string question;
    ExactNumber gold_answer;
    std::string gold_rationale;
};

/// Pre-retrieved candidate documents for one question (retrieval itself is
/// out of scope; these are ingested from files).
struct RetrievedDocumentSet {
    std::string question_id;
    std::vector<std::string> documents;  // ordered as retrieved, at most 10
    std::vector<std::string> source_urls;
};

enum class SplitStrategy { head, fixed_ids, random_seeded };

struct SplitSpec {
    std::size_t dev_size = 100;
    SplitStrategy strategy = SplitStrategy::head;
    std::vector<std::size_t> fixed_indices;  // fixed_ids only
    std::uint64_t seed = 0;                  // random_seeded only
};

template <typename T>
struct SplitResult {
    std::vector<T> dev;
    std::vector<T> test;
};

namespace detail {

inline std::vector<std::pair<std::size_t, nlohmann::json>> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);
    std::vector<std::pair<std::size_t, nlohmann::json>> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw SchemaError(path, lineno, "", "not valid JSON");
        if (!j.is_object())
            throw SchemaError(path, lineno, "", "expected a JSON object");
        records.emplace_back(lineno, std::move(j));
    }
    return records;
}

inline std::string require_string(const nlohmann::json& j, const std::string& path,
                                  std::size_t line, const std::string& field) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_string())
        throw SchemaError(path, line, field, "missing or not a string");
    return nfc(it->get<std::string>());
}

inline std::string optional_string(const nlohmann::json& j, const std::string& field) {
    auto it = j.find(field);
    if (it != j.end() && it->is_string()) return nfc(it->get<std::string>());
    return "";
}

}  // namespace detail

/// Loads LAMA-style relation triples (sub_label / obj_label / predicate_id)
/// from a JSONL file, preserving on-disk order. Strings are NFC-normalized.
inline std::vector<RelationTriple> load_relation_triples(
    const std::string& path, const std::optional<std::string>& relation_filter = std::nullopt) {
    std::vector<RelationTriple> triples;
    for (const auto& [lineno, j] : detail::read_jsonl(path)) {
        RelationTriple t;
        t.subject = detail::require_string(j, path, lineno, "sub_label");
        t.object = detail::require_string(j, path, lineno, "obj_label");
        t.relation_id = detail::require_string(j, path, lineno, "predicate_id");
        t.relation_name = detail::optional_string(j, "relation_name");
        if (t.subject.empty()) throw SchemaError(path, lineno, "sub_label", "empty");
        if (t.object.empty()) throw SchemaError(path, lineno, "obj_label", "empty");
        if (auto it = j.find("aliases"); it != j.end()) {
            if (!it->is_array()) throw SchemaError(path, lineno, "aliases", "not an array");
            for (const auto& a : *it) {
                if (!a.is_string()) throw SchemaError(path, lineno, "aliases", "non-string alias");
                t.aliases.push_back(nfc(a.get<std::string>()));
            }
        }
        if (relation_filter && t.relation_id != *relation_filter) continue;
        triples.push_back(std::move(t));
    }
    if (triples.empty()) warn(path + ": no triples loaded");
    return triples;
}

inline std::vector<EntailmentPair> load_entailment_pairs(const std::string& path) {
    std::vector<EntailmentPair> pairs;
    for (const auto& [lineno, j] : detail::read_jsonl(path)) {
        EntailmentPair p;
        p.premise = detail::require_string(j, path, lineno, "premise");
        p.hypothesis = detail::require_string(j, path, lineno, "hypothesis");
        auto it = j.find("label");
        if (it == j.end() || !it->is_boolean())
            throw SchemaError(path, lineno, "label", "missing or not a boolean");
        p.label = it->get<bool>();
        if (p.premise == p.hypothesis)
            throw SchemaError(path, lineno, "hypothesis", "premise equals hypothesis");
        std::string dir = detail::optional_string(j, "direction");
        if (dir == "reverse")
            p.direction = Direction::reverse;
        else if (!dir.empty() && dir != "forward")
            throw SchemaError(path, lineno, "direction", "must be 'forward' or 'reverse'");
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) warn(path + ": no entailment pairs loaded");
    return pairs;
}

/// GSM8K public schema {question, answer}: the gold value follows the final
/// "#### " marker in answer, the text before it is the worked rationale.
inline std::vector<ArithmeticProblem> load_arithmetic_problems(const std::string& path) {
    std::vector<ArithmeticProblem> problems;
    for (const auto& [lineno, j] : detail::read_jsonl(path)) {
        ArithmeticProblem p;
        p.question = detail::require_string(j, path, lineno, "question");
        std::string answer = detail::require_string(j, path, lineno, "answer");
        auto marker = answer.rfind("#### ");
        if (marker == std::string::npos)
            throw SchemaError(path, lineno, "answer", "missing '#### ' gold marker");
        std::string gold_text = trim(answer.substr(marker + 5));
        auto gold = parse_number(gold_text);
        if (!gold) throw SchemaError(path, lineno, "answer", "gold value '" + gold_text +
                                                                 "' is not a number");
        p.gold_answer = *gold;
        p.gold_rationale = trim(answer.substr(0, marker));
        problems.push_back(std::move(p));
    }
    if (problems.empty()) warn(path + ": no arithmetic problems loaded");
    return problems;
}

/// JSONL of {question_id, documents: [...], source_urls?: [...]}.
inline std::vector<RetrievedDocumentSet> load_document_sets(const std::string& path) {
    std::vector<RetrievedDocumentSet> sets;
    for (const auto& [lineno, j] : detail::read_jsonl(path)) {
        RetrievedDocumentSet s;
        s.question_id = detail::require_string(j, path, lineno, "question_id");
        auto it = j.find("documents");
        if (it == j.end() || !it->is_array())
            throw SchemaError(path, lineno, "documents", "missing or not an array");
        for (const auto& d : *it) {
            if (!d.is_string()) throw SchemaError(path, lineno, "documents", "non-string entry");
            s.documents.push_back(nfc(d.get<std::string>()));
        }
        if (s.documents.empty())
            throw SchemaError(path, lineno, "documents", "at least one document required");
        if (s.documents.size() > 10)
            throw SchemaError(path, lineno, "documents", "more than 10 documents");
        if (auto u = j.find("source_urls"); u != j.end() && u->is_array())
            for (const auto& url : *u) s.source_urls.push_back(url.get<std::string>());
        sets.push_back(std::move(s));
    }
    return sets;
}

/// Order-preserving dev/test partition. The head strategy takes the first
/// dev_size records, the convention used for carving development sets here.
template <typename T>
SplitResult<T> split(const std::vector<T>& dataset, const SplitSpec& spec) {
    SplitResult<T> result;
    std::vector<std::size_t> dev_indices;

    switch (spec.strategy) {
        case SplitStrategy::head: {
            if (spec.dev_size > dataset.size())
                throw DatasetTooSmallError(dataset.size(), spec.dev_size);
            for (std::size_t i = 0; i < spec.dev_size; ++i) dev_indices.push_back(i);
            break;
        }
        case SplitStrategy::fixed_ids: {
            std::set<std::size_t> wanted(spec.fixed_indices.begin(), spec.fixed_indices.end());
            for (std::size_t i : wanted) {
                if (i >= dataset.size())
                    throw DatasetTooSmallError(dataset.size(), i + 1);
                dev_indices.push_back(i);
            }
            break;
        }
        case SplitStrategy::random_seeded: {
            if (spec.dev_size > dataset.size())
                throw DatasetTooSmallError(dataset.size(), spec.dev_size);
            std::mt19937_64 gen(spec.seed);
            dev_indices = sample_distinct_indices(gen, dataset.size(), spec.dev_size);
            std::sort(dev_indices.begin(), dev_indices.end());
            break;
        }
    }

    std::vector<bool> in_dev(dataset.size(), false);
    for (std::size_t i : dev_indices) in_dev[i] = true;
    for (std::size_t i : dev_indices) result.dev.push_back(dataset[i]);
    for (std::size_t i = 0; i < dataset.size(); ++i)
        if (!in_dev[i]) result.test.push_back(dataset[i]);

    if (result.test.empty() && !dataset.empty())
        warn("split produced an empty test set (dev consumed the whole dataset)");
    return result;
}

}  // namespace s2lpp
