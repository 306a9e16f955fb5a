#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "s2lpp/scoring.hpp"

namespace s2lpp {
namespace {

RelationTriple triple(std::string subject, std::string object,
                      std::vector<std::string> aliases = {}) {
    RelationTriple t;
    t.subject = std::move(subject);
    t.relation_id = "R";
    t.object = std::move(object);
    t.aliases = std::move(aliases);
    return t;
}

// ---- containment -------------------------------------------------------------

TEST(ScoreContainment, SubstringOfNormalizedResponse) {
    Judgement j = score_containment("She was born in Paris, France.", triple("X", "Paris"));
    EXPECT_TRUE(j.correct);
    EXPECT_EQ(j.matched_on, MatchedOn::object);
}

TEST(ScoreContainment, CaseAndWhitespaceInvariant) {
    Judgement j = score_containment("the answer is  NEW   york", triple("X", "New York"));
    EXPECT_TRUE(j.correct);
}

TEST(ScoreContainment, AliasMatchesWhenObjectDoesNot) {
    Judgement j = score_containment("known as NYC to locals",
                                    triple("X", "New York City", {"NYC", "The Big Apple"}));
    EXPECT_TRUE(j.correct);
    EXPECT_EQ(j.matched_on, MatchedOn::alias);
}

TEST(ScoreContainment, MissGivesNone) {
    Judgement j = score_containment("London, probably", triple("X", "Paris"));
    EXPECT_FALSE(j.correct);
    EXPECT_EQ(j.matched_on, MatchedOn::none);
}

TEST(ScoreContainment, EmptyObjectNeverMatches) {
    // An empty gold string must not trivially match every response.
    Judgement j = score_containment("anything at all", triple("X", ""));
    EXPECT_FALSE(j.correct);
}

TEST(ScoreContainment, UnicodeNormalizationAgrees) {
    // Decomposed gold vs composed response.
    Judgement j = score_containment("Born in Montr\xc3\xa9"
                                    "al.",
                                    triple("X", "Montr\x65\xcc\x81"
                                                "al"));
    EXPECT_TRUE(j.correct);
}

// Property: the gold object always matches a response that contains it
// verbatim, and matching is invariant under case changes of the response.
TEST(ScoreContainment, FuzzReflexivityAndCasefoldInvariance) {
    std::mt19937_64 gen(42);
    std::uniform_int_distribution<int> len_dist(1, 12);
    std::uniform_int_distribution<int> char_dist(0, 25);
    std::uniform_int_distribution<int> case_dist(0, 1);
    std::uniform_int_distribution<int> pad_dist(0, 8);

    auto random_word = [&](int len) {
        std::string w;
        for (int i = 0; i < len; ++i)
            w.push_back(static_cast<char>('a' + char_dist(gen)));
        return w;
    };
    auto random_case = [&](std::string s) {
        for (char& c : s)
            if (case_dist(gen)) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return s;
    };

    for (int trial = 0; trial < 1000; ++trial) {
        std::string object = random_word(len_dist(gen));
        std::string prefix = random_word(pad_dist(gen)) + " ";
        std::string suffix = " " + random_word(pad_dist(gen));
        std::string response = prefix + object + suffix;

        RelationTriple gold = triple("S", object);
        // Reflexivity: verbatim containment always scores correct.
        EXPECT_TRUE(score_containment(response, gold).correct)
            << "object=" << object << " response=" << response;
        // Casefold invariance: scrambling case changes nothing.
        EXPECT_TRUE(score_containment(random_case(response), gold).correct)
            << "object=" << object;
        EXPECT_TRUE(score_containment(response, triple("S", random_case(object))).correct)
            << "object=" << object;
    }
}

// ---- binary answers -----------------------------------------------------------

TEST(ParseBinaryAnswer, RecognizesAffirmatives) {
    for (const char* text : {"Yes.", "yes, it does", "True", "That is correct.",
                             "The premise entails the hypothesis."}) {
        PolarityJudgement pj = parse_binary_answer(text);
        EXPECT_EQ(pj.polarity, Polarity::affirmative) << text;
        EXPECT_EQ(pj.matched_on, MatchedOn::yes_token) << text;
    }
}

TEST(ParseBinaryAnswer, RecognizesNegatives) {
    for (const char* text : {"No.", "no way", "False", "That is incorrect.",
                             "It does not follow.", "It doesn't follow."}) {
        PolarityJudgement pj = parse_binary_answer(text);
        EXPECT_EQ(pj.polarity, Polarity::negative) << text;
        EXPECT_EQ(pj.matched_on, MatchedOn::no_token) << text;
    }
}

TEST(ParseBinaryAnswer, EarliestTokenWins) {
    EXPECT_EQ(parse_binary_answer("No, that is not correct.").polarity, Polarity::negative);
    EXPECT_EQ(parse_binary_answer("Yes — though some say no.").polarity,
              Polarity::affirmative);
}

TEST(ParseBinaryAnswer, UndecidedWhenNoToken) {
    PolarityJudgement pj = parse_binary_answer("The weather is nice.");
    EXPECT_EQ(pj.polarity, Polarity::undecided);
    EXPECT_EQ(pj.matched_on, MatchedOn::none);
    EXPECT_FALSE(pj.note.empty());
}

TEST(ParseBinaryAnswer, WordBoundariesGuardTokens) {
    // "no" inside "know" and "correct" inside "incorrectly" must not fire.
    EXPECT_EQ(parse_binary_answer("I know nothing about it.").polarity,
              Polarity::undecided);
}

// ---- entailment ----------------------------------------------------------------

EntailmentPair pair(bool label) {
    EntailmentPair p;
    p.premise = "A dog barked";
    p.hypothesis = "An animal made noise";
    p.label = label;
    return p;
}

TEST(ScoreEntailment, AgreementScoresCorrect) {
    EXPECT_TRUE(score_entailment("Yes, it does.", pair(true)).correct);
    EXPECT_TRUE(score_entailment("No.", pair(false)).correct);
}

TEST(ScoreEntailment, DisagreementScoresIncorrect) {
    EXPECT_FALSE(score_entailment("Yes.", pair(false)).correct);
    EXPECT_FALSE(score_entailment("No.", pair(true)).correct);
}

TEST(ScoreEntailment, UndecidedScoresIncorrectEitherWay) {
    EXPECT_FALSE(score_entailment("Hard to say.", pair(true)).correct);
    EXPECT_FALSE(score_entailment("Hard to say.", pair(false)).correct);
}

// Property: flipping the gold label flips correctness for any decided
// response.
TEST(ScoreEntailment, PolarityFlipProperty) {
    std::vector<std::string> decided = {
        "Yes.", "No.", "True, clearly.", "False.", "It does not.", "correct",
        "incorrect", "yes because the premise is stronger", "no, unrelated"};
    for (const auto& response : decided) {
        bool on_true = score_entailment(response, pair(true)).correct;
        bool on_false = score_entailment(response, pair(false)).correct;
        EXPECT_NE(on_true, on_false) << response;
    }
}

// ---- arithmetic -----------------------------------------------------------------

ArithmeticProblem problem(long long gold) {
    ArithmeticProblem p;
    p.question = "How many?";
    p.gold_answer = ExactNumber::from_parts(gold, 1);
    return p;
}

// Shape 1: the canonical "#### n" marker line.
TEST(ExtractNumericAnswer, MarkerShape) {
    Judgement j = extract_numeric_answer(
        "3 + 6 = 9 eggs sold.\n#### 9", problem(9));
    EXPECT_TRUE(j.correct);
    EXPECT_EQ(j.matched_on, MatchedOn::number);
}

// Shape 2: free-form prose; the last number is the answer.
TEST(ExtractNumericAnswer, LastNumberShape) {
    Judgement j = extract_numeric_answer(
        "She starts with 16, uses 3 and 4, so she sells 9 eggs.", problem(9));
    EXPECT_TRUE(j.correct);
    // The wrong intermediate number must lose to the final one.
    EXPECT_FALSE(extract_numeric_answer(
                     "She has 9 at first but ends with 12.", problem(9))
                     .correct);
}

// Shape 3: digit-group commas in the final answer ("1,020" == 1020).
TEST(ExtractNumericAnswer, CommaGroupedShape) {
    Judgement j = extract_numeric_answer(
        "240 + 780 = 1,020 total.\n#### 1,020", problem(1020));
    EXPECT_TRUE(j.correct);
}

TEST(ExtractNumericAnswer, MarkerBeatsLaterProse) {
    // The number after #### wins even if prose follows inside the marker tail.
    Judgement j = extract_numeric_answer("reasoning 5\n#### 9", problem(9));
    EXPECT_TRUE(j.correct);
}

TEST(ExtractNumericAnswer, NoNumberIsIncorrectWithNote) {
    Judgement j = extract_numeric_answer("I cannot count.", problem(9));
    EXPECT_FALSE(j.correct);
    EXPECT_EQ(j.matched_on, MatchedOn::none);
    EXPECT_FALSE(j.note.empty());
}

TEST(ExtractNumericAnswer, WrongNumberNotesBothValues) {
    Judgement j = extract_numeric_answer("#### 8", problem(9));
    EXPECT_FALSE(j.correct);
    EXPECT_NE(j.note.find("8"), std::string::npos);
    EXPECT_NE(j.note.find("9"), std::string::npos);
}

TEST(ExtractNumericAnswer, DecimalEqualsInteger) {
    EXPECT_TRUE(extract_numeric_answer("#### 9.0", problem(9)).correct);
}

// ---- accuracy --------------------------------------------------------------------

TEST(Accuracy, CountsCorrectFraction) {
    std::vector<Judgement> js(4);
    js[0].correct = true;
    js[2].correct = true;
    EXPECT_DOUBLE_EQ(accuracy(js), 0.5);
}

TEST(Accuracy, EmptyThrows) {
    EXPECT_THROW(accuracy({}), EmptyInputError);
}

}  // namespace
}  // namespace s2lpp
