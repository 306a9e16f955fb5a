#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2lpp/backends.hpp"
#include "s2lpp/datasets.hpp"
#include "s2lpp/errors.hpp"
#include "s2lpp/numbers.hpp"
#include "s2lpp/rng.hpp"
#include "s2lpp/scoring.hpp"
#include "s2lpp/templating.hpp"

namespace s2lpp {

/// Outcome of scoring one candidate template on the dev split.
struct CandidateEvaluation {
    int correct = 0;
    int total = 0;
    double accuracy = 0.0;
};

/// The pipeline's central artifact: which prompt the selection model picked
/// for one relation, with the full per-candidate audit trail.
struct SelectionResult {
    Task task = Task::qa;
    std::string relation_id;
    int selected_index = 0;             // pt_S
    PromptTemplate selected_template;   // embedded so downstream steps are self-contained
    std::map<int, int> dev_correct_by_index;
    std::map<int, double> dev_accuracy_by_index;
    std::vector<int> tie_indices;       // every index attaining the max, ascending
    std::string selector_endpoint_id;
    int dev_sample_count = 0;
};

struct CotExample {
    std::string id;
    std::string question;
    std::string rationale;
    ExactNumber answer;
};

struct CotCombination {
    std::vector<std::string> example_ids;  // ordered as drawn
    double dev_accuracy = 0.0;
    int dev_correct = 0;
};

/// Result of sampling and scoring candidate CoT combinations, including the
/// bookkeeping behind the cost-reduction claim (combos evaluated vs the full
/// combinatorial space).
struct CotSelection {
    CotCombination best;
    std::vector<CotCombination> evaluated;  // in draw order
    int pool_size = 0;
    int k = 0;
    std::uint64_t combos_evaluated = 0;
    double total_combinations = 0.0;  // C(pool_size, k)
    double evaluation_fraction = 0.0; // combos_evaluated / total_combinations
};

struct ParagraphSelection {
    std::string question_id;
    std::string chosen_paragraph;
    int chosen_doc_index = 0;
    int chosen_para_index = 0;          // index within the chosen document
    std::string selector_rationale;     // raw selector reply
    std::string note;                   // set when the fallback rule fired
};

template <typename Sample>
struct ScoredSample {
    Sample sample;
    std::string response;
    Judgement judgement;
};

namespace detail {

/// Runs a batch and surfaces the first per-item failure as a hard error:
/// selection aborts rather than silently scoring absent responses.
inline std::vector<ModelResponse> run_batch_strict(Client& client,
                                                   std::span<const ChatRequest> requests) {
    std::vector<CompletionOutcome> outcomes = client.complete_batch(requests);
    std::vector<ModelResponse> responses;
    responses.reserve(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].ok())
            throw BackendError("request " + std::to_string(i) + " failed (" +
                               outcomes[i].error_type + "): " + outcomes[i].error);
        responses.push_back(*outcomes[i].response);
    }
    return responses;
}

template <typename Sample>
Judgement score_for_task(const std::string& response, const Sample& sample) {
    if constexpr (std::is_same_v<Sample, RelationTriple>)
        return score_containment(response, sample);
    else if constexpr (std::is_same_v<Sample, EntailmentPair>)
        return score_entailment(response, sample);
    else
        return extract_numeric_answer(response, sample);
}

}  // namespace detail

template <typename Sample>
CandidateEvaluation evaluate_candidate(Client& client, const PromptTemplate& tmpl,
                                       std::span<const Sample> dev,
                                       const std::string& selector_id) {
    if (dev.empty()) throw EmptyInputError("dev split is empty");
    std::vector<ChatRequest> requests;
    requests.reserve(dev.size());
    for (const Sample& sample : dev)
        requests.push_back(ChatRequest::user_message(selector_id, render(tmpl, sample)));

    std::vector<ModelResponse> responses = detail::run_batch_strict(client, requests);
    CandidateEvaluation eval;
    eval.total = static_cast<int>(dev.size());
    for (std::size_t i = 0; i < dev.size(); ++i)
        if (detail::score_for_task(responses[i].text, dev[i]).correct) ++eval.correct;
    eval.accuracy = static_cast<double>(eval.correct) / static_cast<double>(eval.total);
    return eval;
}

/// Scores every candidate on the dev split with the selection model and
/// picks the argmax; ties go to the lowest index (and are recorded).
template <typename Sample>
SelectionResult select_prompt(Client& client, const CandidateSet& candidates,
                              std::span<const Sample> dev, const std::string& selector_id) {
    validate_candidate_set(candidates);
    if (dev.empty()) throw EmptyInputError("dev split is empty");

    SelectionResult result;
    result.task = candidates.task;
    result.relation_id = candidates.relation_id;
    result.selector_endpoint_id = selector_id;
    result.dev_sample_count = static_cast<int>(dev.size());

    int best_correct = -1;
    for (const PromptTemplate& tmpl : candidates.templates) {
        CandidateEvaluation eval = evaluate_candidate(client, tmpl, dev, selector_id);
        result.dev_correct_by_index[tmpl.index] = eval.correct;
        result.dev_accuracy_by_index[tmpl.index] = eval.accuracy;
        best_correct = std::max(best_correct, eval.correct);
    }
    for (const auto& [index, correct] : result.dev_correct_by_index)
        if (correct == best_correct) result.tie_indices.push_back(index);
    result.selected_index = result.tie_indices.front();
    result.selected_template = candidates.templates[static_cast<std::size_t>(
        result.selected_index)];
    return result;
}

// ---- SelectionResult persistence --------------------------------------------

inline nlohmann::json to_json(const SelectionResult& r) {
    nlohmann::json accuracy = nlohmann::json::object();
    nlohmann::json correct = nlohmann::json::object();
    for (const auto& [index, acc] : r.dev_accuracy_by_index)
        accuracy[std::to_string(index)] = acc;
    for (const auto& [index, c] : r.dev_correct_by_index)
        correct[std::to_string(index)] = c;
    return nlohmann::json{
        {"schema_version", 1},
        {"task", std::string(to_string(r.task))},
        {"relation_id", r.relation_id},
        {"selected_index", r.selected_index},
        {"selected_template",
         {{"index", r.selected_template.index},
          {"text", r.selected_template.text},
          {"origin", std::string(to_string(r.selected_template.origin))}}},
        {"dev_accuracy_by_index", std::move(accuracy)},
        {"dev_correct_by_index", std::move(correct)},
        {"tie_indices", r.tie_indices},
        {"selector_endpoint_id", r.selector_endpoint_id},
        {"dev_sample_count", r.dev_sample_count},
    };
}

inline SelectionResult selection_from_json(const nlohmann::json& j, const std::string& path) {
    SelectionResult r;
    try {
        r.task = task_from_string(j.at("task").get<std::string>());
        r.relation_id = j.value("relation_id", std::string{});
        r.selected_index = j.at("selected_index").get<int>();
        const auto& st = j.at("selected_template");
        r.selected_template.index = st.at("index").get<int>();
        r.selected_template.text = nfc(st.at("text").get<std::string>());
        r.selected_template.task = r.task;
        r.selected_template.relation_id = r.task == Task::qa ? r.relation_id : "";
        r.selected_template.origin =
            origin_from_string(st.value("origin", std::string("generated")));
        for (const auto& [key, value] : j.at("dev_accuracy_by_index").items())
            r.dev_accuracy_by_index[std::stoi(key)] = value.get<double>();
        if (j.contains("dev_correct_by_index"))
            for (const auto& [key, value] : j.at("dev_correct_by_index").items())
                r.dev_correct_by_index[std::stoi(key)] = value.get<int>();
        r.tie_indices = j.at("tie_indices").get<std::vector<int>>();
        r.selector_endpoint_id = j.value("selector_endpoint_id", std::string{});
        r.dev_sample_count = j.at("dev_sample_count").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path, 0, "", e.what());
    } catch (const std::invalid_argument&) {
        throw SchemaError(path, 0, "dev_accuracy_by_index", "non-integer prompt index key");
    }
    if (r.selected_index != r.tie_indices.front() ||
        !std::is_sorted(r.tie_indices.begin(), r.tie_indices.end()))
        throw SchemaError(path, 0, "tie_indices",
                          "selected_index must be the lowest tied index");
    if (r.selected_template.index != r.selected_index)
        throw SchemaError(path, 0, "selected_template",
                          "embedded template index disagrees with selected_index");
    validate_template(r.selected_template);
    return r;
}

inline SelectionResult load_selection(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError(path, 0, "", "invalid JSON");
    return selection_from_json(j, path);
}

inline void save_selection(const SelectionResult& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CacheIoError("cannot write " + path);
    out << to_json(r).dump(2) << "\n";
}

// ---- CoT combination selection ----------------------------------------------

namespace detail {

inline double binomial_coefficient(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return c;
}

inline std::string few_shot_block(const CotExample& ex) {
    return "Question: " + ex.question + "\nRationale: " + ex.rationale +
           "\nAnswer: " + ex.answer.to_string();
}

}  // namespace detail

/// Renders the k exemplars of a combination plus the final question into one
/// few-shot prompt.
inline std::string render_cot_prompt(std::span<const CotExample> pool,
                                     const std::vector<std::string>& example_ids,
                                     const std::string& question) {
    std::string prompt;
    for (const std::string& id : example_ids) {
        auto it = std::find_if(pool.begin(), pool.end(),
                               [&](const CotExample& e) { return e.id == id; });
        if (it == pool.end()) throw DataError("unknown CoT example id: " + id);
        prompt += detail::few_shot_block(*it);
        prompt += "\n\n";
    }
    prompt += "Question: " + question;
    return prompt;
}

/// Draws n_combos distinct k-subsets of the pool (each kept in its drawn
/// order), scores each on the dev problems with the selection model, and
/// returns the best; ties go to the earliest draw.
inline CotSelection select_cot_combination(Client& client, std::span<const CotExample> pool,
                                           int k, int n_combos,
                                           std::span<const ArithmeticProblem> dev,
                                           const std::string& selector_id,
                                           std::uint64_t seed) {
    if (k < 1 || static_cast<std::size_t>(k) > pool.size())
        throw PoolTooSmallError("pool of " + std::to_string(pool.size()) +
                                " cannot supply combinations of size " + std::to_string(k));
    if (n_combos < 1) throw UsageError("n_combos must be at least 1");
    if (dev.empty()) throw EmptyInputError("dev problems are empty");
    for (const CotExample& ex : pool)
        if (ex.rationale.empty())
            throw DataError("CoT example '" + ex.id + "' has an empty rationale");

    double total = detail::binomial_coefficient(static_cast<int>(pool.size()), k);
    if (static_cast<double>(n_combos) > total)
        throw PoolTooSmallError("requested " + std::to_string(n_combos) +
                                " distinct combinations but only " +
                                std::to_string(static_cast<long long>(total)) + " exist");

    std::mt19937_64 gen(seed);
    std::vector<std::vector<std::size_t>> draws;
    std::set<std::vector<std::size_t>> seen;  // sorted index sets, for distinctness
    while (draws.size() < static_cast<std::size_t>(n_combos)) {
        std::vector<std::size_t> draw =
            sample_distinct_indices(gen, pool.size(), static_cast<std::size_t>(k));
        std::vector<std::size_t> sorted = draw;
        std::sort(sorted.begin(), sorted.end());
        if (seen.insert(std::move(sorted)).second) draws.push_back(std::move(draw));
    }

    CotSelection selection;
    selection.pool_size = static_cast<int>(pool.size());
    selection.k = k;
    selection.total_combinations = total;

    int best_correct = -1;
    std::size_t best_at = 0;
    for (const auto& draw : draws) {
        CotCombination combo;
        for (std::size_t idx : draw) combo.example_ids.push_back(pool[idx].id);

        std::vector<ChatRequest> requests;
        requests.reserve(dev.size());
        for (const ArithmeticProblem& problem : dev)
            requests.push_back(ChatRequest::user_message(
                selector_id, render_cot_prompt(pool, combo.example_ids, problem.question)));
        std::vector<ModelResponse> responses = detail::run_batch_strict(client, requests);
        for (std::size_t i = 0; i < dev.size(); ++i)
            if (extract_numeric_answer(responses[i].text, dev[i]).correct)
                ++combo.dev_correct;
        combo.dev_accuracy =
            static_cast<double>(combo.dev_correct) / static_cast<double>(dev.size());

        if (combo.dev_correct > best_correct) {
            best_correct = combo.dev_correct;
            best_at = selection.evaluated.size();
        }
        selection.evaluated.push_back(std::move(combo));
    }
    selection.best = selection.evaluated[best_at];
    selection.combos_evaluated = draws.size();
    selection.evaluation_fraction = static_cast<double>(draws.size()) / total;
    return selection;
}

// ---- RAG paragraph selection -------------------------------------------------

namespace detail {

struct ParagraphRef {
    int doc_index;
    int para_index;
    std::string text;
};

/// Blank-line paragraph segmentation with a 20-character floor: shorter
/// fragments (headings, stray markup) are dropped.
inline std::vector<ParagraphRef> split_paragraphs(const RetrievedDocumentSet& docs) {
    std::vector<ParagraphRef> out;
    for (std::size_t d = 0; d < docs.documents.size(); ++d) {
        int para_index = 0;
        std::string current;
        auto flush = [&] {
            std::string para = trim(current);
            current.clear();
            if (para.empty()) return;
            if (para.size() >= 20)
                out.push_back({static_cast<int>(d), para_index, para});
            ++para_index;
        };
        for (const std::string& line : split_lines(docs.documents[d])) {
            if (trim(line).empty())
                flush();
            else {
                if (!current.empty()) current += "\n";
                current += line;
            }
        }
        flush();
    }
    return out;
}

}  // namespace detail

inline std::string paragraph_menu_prompt(const std::vector<detail::ParagraphRef>& paragraphs,
                                         const std::string& question) {
    std::string prompt =
        "Below are numbered paragraphs followed by a question. Reply with the single "
        "number of the paragraph most relevant to answering the question.\n\n";
    for (std::size_t i = 0; i < paragraphs.size(); ++i)
        prompt += std::to_string(i) + ": " + paragraphs[i].text + "\n";
    prompt += "\nQuestion: " + question;
    return prompt;
}

/// Asks the selection model to pick the most relevant paragraph from the
/// retrieved documents. Unparseable or out-of-range replies fall back to the
/// first paragraph with a diagnostic note.
inline ParagraphSelection select_context_paragraph(Client& client,
                                                   const RetrievedDocumentSet& docs,
                                                   const std::string& question,
                                                   const std::string& selector_id) {
    std::vector<detail::ParagraphRef> paragraphs = detail::split_paragraphs(docs);
    if (paragraphs.empty())
        throw EmptyDocumentsError("no paragraphs survive segmentation for question '" +
                                  docs.question_id + "'");

    ChatRequest request =
        ChatRequest::user_message(selector_id, paragraph_menu_prompt(paragraphs, question));
    ModelResponse response = client.complete(request);

    ParagraphSelection selection;
    selection.question_id = docs.question_id;
    selection.selector_rationale = response.text;

    std::optional<long long> parsed = first_integer_in(response.text);
    std::size_t chosen = 0;
    if (parsed && *parsed >= 0 && *parsed < static_cast<long long>(paragraphs.size())) {
        chosen = static_cast<std::size_t>(*parsed);
    } else {
        selection.note = parsed ? "selector index " + std::to_string(*parsed) +
                                      " out of range; fell back to the first paragraph"
                                : "selector reply had no index; fell back to the first paragraph";
    }
    selection.chosen_doc_index = paragraphs[chosen].doc_index;
    selection.chosen_para_index = paragraphs[chosen].para_index;
    selection.chosen_paragraph = paragraphs[chosen].text;
    return selection;
}

// ---- Target-model evaluation --------------------------------------------------

template <typename Sample>
std::vector<ScoredSample<Sample>> answer_with_target(Client& client,
                                                     const SelectionResult& selection,
                                                     std::span<const Sample> test,
                                                     const std::string& target_id) {
    if (test.empty()) throw EmptyInputError("test split is empty");
    std::vector<ChatRequest> requests;
    requests.reserve(test.size());
    for (const Sample& sample : test)
        requests.push_back(ChatRequest::user_message(
            target_id, render(selection.selected_template, sample)));
    std::vector<ModelResponse> responses = detail::run_batch_strict(client, requests);

    std::vector<ScoredSample<Sample>> out;
    out.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        out.push_back({test[i], responses[i].text,
                       detail::score_for_task(responses[i].text, test[i])});
    return out;
}

/// RAG flow: the chosen paragraph is prepended as context and the answer is
/// scored by containment against the gold answers.
inline ScoredSample<RelationTriple> answer_with_target(Client& client,
                                                       const ParagraphSelection& selection,
                                                       const std::string& question,
                                                       const std::vector<std::string>& gold_answers,
                                                       const std::string& target_id) {
    if (gold_answers.empty()) throw EmptyInputError("no gold answers for RAG question");
    RelationTriple gold;
    gold.subject = question;
    gold.relation_id = selection.question_id;
    gold.object = gold_answers.front();
    gold.aliases.assign(gold_answers.begin() + 1, gold_answers.end());

    std::string prompt =
        "Context: " + selection.chosen_paragraph + "\n\nQuestion: " + question;
    ModelResponse response = client.complete(ChatRequest::user_message(target_id, prompt));
    return {gold, response.text, score_containment(response.text, gold)};
}

/// CoT flow: the winning combination's exemplars are prepended to every test
/// question and answers are scored numerically.
inline std::vector<ScoredSample<ArithmeticProblem>> answer_with_target(
    Client& client, const CotCombination& combination, std::span<const CotExample> pool,
    std::span<const ArithmeticProblem> test, const std::string& target_id) {
    if (test.empty()) throw EmptyInputError("test split is empty");
    std::vector<ChatRequest> requests;
    requests.reserve(test.size());
    for (const ArithmeticProblem& problem : test)
        requests.push_back(ChatRequest::user_message(
            target_id, render_cot_prompt(pool, combination.example_ids, problem.question)));
    std::vector<ModelResponse> responses = detail::run_batch_strict(client, requests);

    std::vector<ScoredSample<ArithmeticProblem>> out;
    out.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        out.push_back({test[i], responses[i].text,
                       extract_numeric_answer(responses[i].text, test[i])});
    return out;
}

template <typename Sample>
double accuracy_of(const std::vector<ScoredSample<Sample>>& scored) {
    if (scored.empty()) throw EmptyInputError("no scored samples");
    std::size_t correct = 0;
    for (const auto& s : scored)
        if (s.judgement.correct) ++correct;
    return static_cast<double>(correct) / static_cast<double>(scored.size());
}

}  // namespace s2lpp
