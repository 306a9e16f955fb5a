#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "s2lpp/datasets.hpp"
#include "s2lpp/errors.hpp"
#include "s2lpp/numbers.hpp"
#include "s2lpp/text.hpp"

namespace s2lpp {

enum class MatchedOn { object, alias, yes_token, no_token, number, none };

inline const char* to_string(MatchedOn m) {
    switch (m) {
        case MatchedOn::object: return "object";
        case MatchedOn::alias: return "alias";
        case MatchedOn::yes_token: return "yes_token";
        case MatchedOn::no_token: return "no_token";
        case MatchedOn::number: return "number";
        case MatchedOn::none: return "none";
    }
    return "none";
}

/// Verdict on a single model response.
struct Judgement {
    bool correct = false;
    MatchedOn matched_on = MatchedOn::none;
    std::string normalized_response;
    std::string note;
};

enum class Polarity { affirmative, negative, undecided };

/// parse_binary_answer result: the polarity read off the response, plus the
/// diagnostics a Judgement carries.
struct PolarityJudgement {
    Polarity polarity = Polarity::undecided;
    MatchedOn matched_on = MatchedOn::none;
    std::string normalized_response;
    std::string note;
};

/// QA containment check: correct iff the normalized gold object (or any
/// alias) appears as a substring of the normalized response. Normalization
/// is NFC + casefold + whitespace collapse; punctuation is untouched.
inline Judgement score_containment(std::string_view response, const RelationTriple& gold) {
    Judgement j;
    j.normalized_response = normalize_for_match(response);
    std::string norm_object = normalize_for_match(gold.object);
    if (!norm_object.empty() && j.normalized_response.find(norm_object) != std::string::npos) {
        j.correct = true;
        j.matched_on = MatchedOn::object;
        return j;
    }
    for (const auto& alias : gold.aliases) {
        std::string norm_alias = normalize_for_match(alias);
        if (!norm_alias.empty() && j.normalized_response.find(norm_alias) != std::string::npos) {
            j.correct = true;
            j.matched_on = MatchedOn::alias;
            return j;
        }
    }
    j.matched_on = MatchedOn::none;
    return j;
}

/// Reads a yes/no answer out of free text. Whichever polarity token occurs
/// first (earliest position, on word boundaries) wins; a response with no
/// token at all is undecided and scores incorrect downstream.
inline PolarityJudgement parse_binary_answer(std::string_view response) {
    static const std::array<std::string_view, 4> affirmative = {"yes", "true", "entails",
                                                                "correct"};
    static const std::array<std::string_view, 5> negative = {"no", "false", "does not",
                                                             "doesn't", "incorrect"};
    PolarityJudgement pj;
    pj.normalized_response = normalize_for_match(response);

    std::size_t best_affirmative = std::string_view::npos;
    std::size_t best_negative = std::string_view::npos;
    for (auto token : affirmative)
        best_affirmative = std::min(best_affirmative, find_word(pj.normalized_response, token));
    for (auto token : negative)
        best_negative = std::min(best_negative, find_word(pj.normalized_response, token));

    if (best_affirmative == std::string_view::npos && best_negative == std::string_view::npos) {
        pj.polarity = Polarity::undecided;
        pj.matched_on = MatchedOn::none;
        pj.note = "no affirmative or negative token found";
    } else if (best_affirmative <= best_negative) {
        pj.polarity = Polarity::affirmative;
        pj.matched_on = MatchedOn::yes_token;
    } else {
        pj.polarity = Polarity::negative;
        pj.matched_on = MatchedOn::no_token;
    }
    return pj;
}

/// NLI scoring: the parsed polarity must agree with the gold label.
/// Undecided responses count as incorrect (keeps denominators equal across
/// prompts, which the metrics depend on).
inline Judgement score_entailment(std::string_view response, const EntailmentPair& gold) {
    PolarityJudgement pj = parse_binary_answer(response);
    Judgement j;
    j.matched_on = pj.matched_on;
    j.normalized_response = std::move(pj.normalized_response);
    j.note = std::move(pj.note);
    if (pj.polarity == Polarity::undecided) {
        j.correct = false;
    } else {
        j.correct = (pj.polarity == Polarity::affirmative) == gold.label;
    }
    return j;
}

/// Arithmetic scoring: a "#### n" marker wins if present, otherwise the last
/// number in the response; correct iff numerically equal to the gold value.
inline Judgement extract_numeric_answer(std::string_view response,
                                        const ArithmeticProblem& gold) {
    Judgement j;
    j.normalized_response = normalize_for_match(response);

    std::optional<ExactNumber> value;
    if (auto marker = response.rfind("####"); marker != std::string_view::npos) {
        value = last_number_in(response.substr(marker));
        if (!value) j.note = "'####' marker present but no number after it";
    }
    if (!value) value = last_number_in(response);

    if (!value) {
        j.matched_on = MatchedOn::none;
        if (j.note.empty()) j.note = "no number found in response";
        return j;
    }
    j.correct = (*value == gold.gold_answer);
    j.matched_on = j.correct ? MatchedOn::number : MatchedOn::none;
    if (!j.correct) j.note = "extracted " + value->to_string() + ", expected " +
                             gold.gold_answer.to_string();
    return j;
}

/// (#correct) / (#total). Integer counts divided once, so the result is the
/// correctly rounded double of the exact rational.
inline double accuracy(const std::vector<Judgement>& judgements) {
    if (judgements.empty()) throw EmptyInputError("accuracy over an empty judgement list");
    std::size_t correct = 0;
    for (const auto& j : judgements)
        if (j.correct) ++correct;
    return static_cast<double>(correct) / static_cast<double>(judgements.size());
}

}  // namespace s2lpp
