#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "s2lpp/selection.hpp"

namespace s2lpp {
namespace {

// A scripted selector that answers correctly only for (prompt index,
// subject) pairs listed in a truth table. Prompts embed their index as
// "P<i>:" so the responder can recover it.
struct TruthTable {
    // accuracy_by_index[i] = set of subjects answered correctly under prompt i
    std::map<int, std::set<std::string>> correct_subjects;
};

CandidateSet indexed_candidates(int n, const std::string& relation = "R1") {
    CandidateSet set;
    set.task = Task::qa;
    set.relation_id = relation;
    set.relation_name = relation;
    for (int i = 0; i < n; ++i) {
        PromptTemplate t;
        t.index = i;
        t.text = "P" + std::to_string(i) + ": who is [X]?";
        t.task = Task::qa;
        t.relation_id = relation;
        set.templates.push_back(std::move(t));
    }
    return set;
}

std::vector<RelationTriple> subjects(int n, const std::string& relation = "R1") {
    std::vector<RelationTriple> out;
    for (int i = 0; i < n; ++i) {
        RelationTriple t;
        t.subject = "S" + std::to_string(i);
        t.relation_id = relation;
        t.object = "GOLD-S" + std::to_string(i);
        out.push_back(std::move(t));
    }
    return out;
}

Client truth_table_client(const TruthTable& table, int max_concurrency = 8) {
    ModelEndpoint e;
    e.id = "sel";
    e.kind = EndpointKind::scripted;
    e.model_name = "selector";
    e.max_concurrency = max_concurrency;
    e.scripted.responder = [table](const ChatRequest& req) -> std::string {
        const std::string& content = req.messages.back().content;
        // Prompt shape: "P<i>: who is S<j>?"
        std::size_t colon = content.find(':');
        int prompt_index = std::stoi(content.substr(1, colon - 1));
        std::size_t s_at = content.find("S", colon);
        std::string subject = content.substr(s_at, content.size() - s_at - 1);
        auto it = table.correct_subjects.find(prompt_index);
        if (it != table.correct_subjects.end() && it->second.count(subject))
            return "the answer is GOLD-" + subject;
        return "unknown";
    };
    ClientOptions options;
    options.endpoints.push_back(std::move(e));
    return Client(std::move(options));
}

// ---- evaluate_candidate -----------------------------------------------------------

TEST(EvaluateCandidate, CountsCorrectAnswers) {
    TruthTable table;
    table.correct_subjects[0] = {"S0", "S2"};
    Client client = truth_table_client(table);

    CandidateSet set = indexed_candidates(1);
    std::vector<RelationTriple> dev = subjects(4);
    CandidateEvaluation eval =
        evaluate_candidate<RelationTriple>(client, set.templates[0], dev, "sel");
    EXPECT_EQ(eval.total, 4);
    EXPECT_EQ(eval.correct, 2);
    EXPECT_DOUBLE_EQ(eval.accuracy, 0.5);
}

TEST(EvaluateCandidate, EmptyDevThrows) {
    Client client = truth_table_client({});
    CandidateSet set = indexed_candidates(1);
    std::vector<RelationTriple> dev;
    EXPECT_THROW(
        evaluate_candidate<RelationTriple>(client, set.templates[0], dev, "sel"),
        EmptyInputError);
}

TEST(EvaluateCandidate, BackendFailureAborts) {
    ModelEndpoint e;
    e.id = "sel";
    e.kind = EndpointKind::scripted;
    ScriptedRule r;
    r.match = ScriptedRule::Match::substring;
    r.pattern = "S1";
    r.fail = true;
    e.scripted.rules = {r};
    e.scripted.default_reply = "fine";
    ClientOptions options;
    options.endpoints.push_back(std::move(e));
    Client client(std::move(options));

    CandidateSet set = indexed_candidates(1);
    std::vector<RelationTriple> dev = subjects(3);
    EXPECT_THROW(evaluate_candidate<RelationTriple>(client, set.templates[0], dev, "sel"),
                 BackendError);
}

// ---- select_prompt ------------------------------------------------------------------

TEST(SelectPrompt, PicksArgmaxWithFullAuditTrail) {
    TruthTable table;
    table.correct_subjects[0] = {"S0"};
    table.correct_subjects[1] = {"S0", "S1", "S2"};
    table.correct_subjects[2] = {"S0", "S1"};
    Client client = truth_table_client(table);

    CandidateSet set = indexed_candidates(3);
    std::vector<RelationTriple> dev = subjects(4);
    SelectionResult result = select_prompt<RelationTriple>(client, set, dev, "sel");

    EXPECT_EQ(result.selected_index, 1);
    EXPECT_EQ(result.selected_template.index, 1);
    EXPECT_EQ(result.dev_sample_count, 4);
    EXPECT_EQ(result.selector_endpoint_id, "sel");
    EXPECT_EQ(result.dev_correct_by_index.at(0), 1);
    EXPECT_EQ(result.dev_correct_by_index.at(1), 3);
    EXPECT_EQ(result.dev_correct_by_index.at(2), 2);
    EXPECT_DOUBLE_EQ(result.dev_accuracy_by_index.at(1), 0.75);
    EXPECT_EQ(result.tie_indices, std::vector<int>{1});
}

TEST(SelectPrompt, TiesGoToLowestIndex) {
    TruthTable table;
    table.correct_subjects[1] = {"S0", "S1"};
    table.correct_subjects[3] = {"S2", "S3"};
    Client client = truth_table_client(table);

    CandidateSet set = indexed_candidates(5);
    std::vector<RelationTriple> dev = subjects(4);
    SelectionResult result = select_prompt<RelationTriple>(client, set, dev, "sel");

    EXPECT_EQ(result.selected_index, 1);
    EXPECT_EQ(result.tie_indices, (std::vector<int>{1, 3}));
}

TEST(SelectPrompt, AllZeroTiesEverythingAndPicksZero) {
    Client client = truth_table_client({});
    CandidateSet set = indexed_candidates(4);
    std::vector<RelationTriple> dev = subjects(3);
    SelectionResult result = select_prompt<RelationTriple>(client, set, dev, "sel");

    EXPECT_EQ(result.selected_index, 0);
    EXPECT_EQ(result.tie_indices, (std::vector<int>{0, 1, 2, 3}));
}

TEST(SelectPrompt, InvalidCandidateSetRejected) {
    Client client = truth_table_client({});
    CandidateSet set = indexed_candidates(2);
    set.templates[1].index = 5;  // gap
    std::vector<RelationTriple> dev = subjects(2);
    EXPECT_THROW(select_prompt<RelationTriple>(client, set, dev, "sel"), SchemaError);
}

// Brute-force cross-check on randomized truth tables: select_prompt must
// agree with an independent argmax over per-candidate recounts.
TEST(SelectPrompt, MatchesBruteForceOnRandomTables) {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 60; ++trial) {
        int n_prompts = 2 + static_cast<int>(gen() % 9);   // 2..10
        int n_dev = 1 + static_cast<int>(gen() % 8);       // 1..8
        TruthTable table;
        for (int p = 0; p < n_prompts; ++p)
            for (int s = 0; s < n_dev; ++s)
                if (gen() % 2) table.correct_subjects[p].insert("S" + std::to_string(s));

        Client client = truth_table_client(table);
        CandidateSet set = indexed_candidates(n_prompts);
        std::vector<RelationTriple> dev = subjects(n_dev);
        SelectionResult result = select_prompt<RelationTriple>(client, set, dev, "sel");

        // Independent recount from the truth table itself.
        int best_correct = -1, best_index = -1;
        for (int p = 0; p < n_prompts; ++p) {
            int correct = 0;
            auto it = table.correct_subjects.find(p);
            if (it != table.correct_subjects.end())
                for (int s = 0; s < n_dev; ++s)
                    correct += it->second.count("S" + std::to_string(s)) ? 1 : 0;
            EXPECT_EQ(result.dev_correct_by_index.at(p), correct) << "trial " << trial;
            if (correct > best_correct) {
                best_correct = correct;
                best_index = p;
            }
        }
        EXPECT_EQ(result.selected_index, best_index) << "trial " << trial;
    }
}

// ---- SelectionResult persistence -----------------------------------------------------

SelectionResult sample_selection() {
    TruthTable table;
    table.correct_subjects[1] = {"S0"};
    Client client = truth_table_client(table);
    CandidateSet set = indexed_candidates(2);
    std::vector<RelationTriple> dev = subjects(2);
    return select_prompt<RelationTriple>(client, set, dev, "sel");
}

TEST(SelectionJson, RoundTripsLosslessly) {
    SelectionResult r = sample_selection();
    SelectionResult back = selection_from_json(to_json(r), "mem");
    EXPECT_EQ(back.task, r.task);
    EXPECT_EQ(back.relation_id, r.relation_id);
    EXPECT_EQ(back.selected_index, r.selected_index);
    EXPECT_EQ(back.selected_template.text, r.selected_template.text);
    EXPECT_EQ(back.dev_correct_by_index, r.dev_correct_by_index);
    EXPECT_EQ(back.dev_accuracy_by_index, r.dev_accuracy_by_index);
    EXPECT_EQ(back.tie_indices, r.tie_indices);
    EXPECT_EQ(back.dev_sample_count, r.dev_sample_count);
}

TEST(SelectionJson, RejectsInconsistentSelectedIndex) {
    nlohmann::json j = to_json(sample_selection());
    j["selected_index"] = 0;  // no longer tie_indices.front()
    EXPECT_THROW(selection_from_json(j, "mem"), SchemaError);
}

TEST(SelectionJson, RejectsMismatchedEmbeddedTemplate) {
    nlohmann::json j = to_json(sample_selection());
    j["selected_template"]["index"] = 7;
    EXPECT_THROW(selection_from_json(j, "mem"), SchemaError);
}

TEST(SelectionJson, RejectsInvalidEmbeddedTemplateText) {
    nlohmann::json j = to_json(sample_selection());
    j["selected_template"]["text"] = "lost the slot";
    EXPECT_THROW(selection_from_json(j, "mem"), SchemaError);
}

// ---- CoT combination selection ---------------------------------------------------------

std::vector<CotExample> cot_pool(int n) {
    std::vector<CotExample> pool;
    for (int i = 0; i < n; ++i) {
        CotExample ex;
        ex.id = "ex" + std::to_string(i);
        ex.question = "What is " + std::to_string(i) + " + " + std::to_string(i) + "?";
        ex.rationale = std::to_string(i) + " + " + std::to_string(i) + " = " +
                       std::to_string(2 * i);
        ex.answer = ExactNumber::from_parts(2 * i, 1);
        pool.push_back(std::move(ex));
    }
    return pool;
}

std::vector<ArithmeticProblem> cot_dev(int n) {
    std::vector<ArithmeticProblem> dev;
    for (int i = 0; i < n; ++i) {
        ArithmeticProblem p;
        p.question = "dev question " + std::to_string(i);
        p.gold_answer = ExactNumber::from_parts(100 + i, 1);
        dev.push_back(std::move(p));
    }
    return dev;
}

// Selector whose accuracy depends on which exemplars appear in the prompt:
// each combination scores one dev answer correctly per "good" exemplar id
// it contains (ex0, ex1 are good), deterministically.
Client cot_client() {
    ModelEndpoint e;
    e.id = "sel";
    e.kind = EndpointKind::scripted;
    e.model_name = "cot-selector";
    e.max_concurrency = 8;
    e.scripted.responder = [](const ChatRequest& req) -> std::string {
        const std::string& content = req.messages.back().content;
        int good = 0;
        // "Question: What is 0 + 0" marks ex0, "1 + 1" marks ex1.
        if (content.find("What is 0 + 0?") != std::string::npos) ++good;
        if (content.find("What is 1 + 1?") != std::string::npos) ++good;
        // dev question index is the digit after "dev question ".
        std::size_t at = content.rfind("dev question ");
        int dev_index = std::stoi(content.substr(at + 13));
        // Correct iff dev_index < good; gold for dev i is 100 + i.
        if (dev_index < good) return "#### " + std::to_string(100 + dev_index);
        return "#### -1";
    };
    ClientOptions options;
    options.endpoints.push_back(std::move(e));
    return Client(std::move(options));
}

TEST(FewShotBlock, HasQuestionRationaleAnswerShape) {
    CotExample ex = cot_pool(1)[0];
    std::string block = detail::few_shot_block(ex);
    EXPECT_EQ(block, "Question: What is 0 + 0?\nRationale: 0 + 0 = 0\nAnswer: 0");
}

TEST(RenderCotPrompt, ConcatenatesExemplarsThenQuestion) {
    std::vector<CotExample> pool = cot_pool(3);
    std::string prompt = render_cot_prompt(pool, {"ex2", "ex0"}, "Final?");
    // Exemplars appear in the given order, question last.
    std::size_t at2 = prompt.find("What is 2 + 2?");
    std::size_t at0 = prompt.find("What is 0 + 0?");
    std::size_t atq = prompt.find("Question: Final?");
    ASSERT_NE(at2, std::string::npos);
    ASSERT_NE(at0, std::string::npos);
    ASSERT_NE(atq, std::string::npos);
    EXPECT_LT(at2, at0);
    EXPECT_LT(at0, atq);
}

TEST(RenderCotPrompt, UnknownIdThrows) {
    std::vector<CotExample> pool = cot_pool(2);
    EXPECT_THROW(render_cot_prompt(pool, {"ex9"}, "q"), DataError);
}

TEST(SelectCotCombination, FixedSeedReproducesDrawsExactly) {
    std::vector<CotExample> pool = cot_pool(8);
    std::vector<ArithmeticProblem> dev = cot_dev(3);

    Client client_a = cot_client();
    CotSelection a = select_cot_combination(client_a, pool, 3, 20, dev, "sel", 99);
    Client client_b = cot_client();
    CotSelection b = select_cot_combination(client_b, pool, 3, 20, dev, "sel", 99);

    ASSERT_EQ(a.evaluated.size(), 20u);
    ASSERT_EQ(b.evaluated.size(), 20u);
    for (std::size_t i = 0; i < a.evaluated.size(); ++i) {
        EXPECT_EQ(a.evaluated[i].example_ids, b.evaluated[i].example_ids) << i;
        EXPECT_EQ(a.evaluated[i].dev_correct, b.evaluated[i].dev_correct) << i;
    }
    EXPECT_EQ(a.best.example_ids, b.best.example_ids);

    // A different seed draws a different sequence.
    Client client_c = cot_client();
    CotSelection c = select_cot_combination(client_c, pool, 3, 20, dev, "sel", 100);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.evaluated.size(); ++i)
        any_difference |= a.evaluated[i].example_ids != c.evaluated[i].example_ids;
    EXPECT_TRUE(any_difference);
}

TEST(SelectCotCombination, DrawsAreDistinctAsSets) {
    std::vector<CotExample> pool = cot_pool(6);
    std::vector<ArithmeticProblem> dev = cot_dev(1);
    Client client = cot_client();
    // C(6,2) = 15; ask for all of them.
    CotSelection sel = select_cot_combination(client, pool, 2, 15, dev, "sel", 5);

    std::set<std::set<std::string>> as_sets;
    for (const auto& combo : sel.evaluated)
        as_sets.insert({combo.example_ids.begin(), combo.example_ids.end()});
    EXPECT_EQ(as_sets.size(), 15u);
    EXPECT_EQ(sel.combos_evaluated, 15u);
    EXPECT_DOUBLE_EQ(sel.total_combinations, 15.0);
    EXPECT_DOUBLE_EQ(sel.evaluation_fraction, 1.0);
}

TEST(SelectCotCombination, WinnerMatchesBruteForce) {
    // Evaluate the full space, then recompute the max independently: the
    // winner's dev_correct must equal the global max, and the winner must be
    // the earliest draw attaining it.
    std::vector<CotExample> pool = cot_pool(6);
    std::vector<ArithmeticProblem> dev = cot_dev(3);
    Client client = cot_client();
    CotSelection sel = select_cot_combination(client, pool, 2, 15, dev, "sel", 13);

    int max_correct = 0;
    for (const auto& combo : sel.evaluated)
        max_correct = std::max(max_correct, combo.dev_correct);
    EXPECT_EQ(sel.best.dev_correct, max_correct);
    for (const auto& combo : sel.evaluated) {
        if (combo.example_ids == sel.best.example_ids) break;
        EXPECT_LT(combo.dev_correct, max_correct);  // earlier draws are strictly worse
    }
    // With ex0 and ex1 both "good", the best combination is exactly {ex0, ex1}.
    std::set<std::string> best_set(sel.best.example_ids.begin(), sel.best.example_ids.end());
    EXPECT_EQ(best_set, (std::set<std::string>{"ex0", "ex1"}));
    EXPECT_EQ(sel.best.dev_correct, 2);
}

TEST(SelectCotCombination, SingleComboWorks) {
    std::vector<CotExample> pool = cot_pool(4);
    std::vector<ArithmeticProblem> dev = cot_dev(1);
    Client client = cot_client();
    CotSelection sel = select_cot_combination(client, pool, 2, 1, dev, "sel", 1);
    EXPECT_EQ(sel.evaluated.size(), 1u);
    EXPECT_EQ(sel.best.example_ids, sel.evaluated[0].example_ids);
    EXPECT_NEAR(sel.evaluation_fraction, 1.0 / 6.0, 1e-12);
}

TEST(SelectCotCombination, RejectsImpossibleRequests) {
    std::vector<CotExample> pool = cot_pool(4);
    std::vector<ArithmeticProblem> dev = cot_dev(1);
    Client client = cot_client();
    // k larger than the pool.
    EXPECT_THROW(select_cot_combination(client, pool, 5, 1, dev, "sel", 1),
                 PoolTooSmallError);
    // More combinations than exist: C(4,2) = 6.
    EXPECT_THROW(select_cot_combination(client, pool, 2, 7, dev, "sel", 1),
                 PoolTooSmallError);
    // Empty dev.
    std::vector<ArithmeticProblem> empty;
    EXPECT_THROW(select_cot_combination(client, pool, 2, 1, empty, "sel", 1),
                 EmptyInputError);
}

TEST(SelectCotCombination, EmptyRationaleRejected) {
    std::vector<CotExample> pool = cot_pool(3);
    pool[1].rationale.clear();
    std::vector<ArithmeticProblem> dev = cot_dev(1);
    Client client = cot_client();
    EXPECT_THROW(select_cot_combination(client, pool, 2, 1, dev, "sel", 1), DataError);
}

// ---- paragraph selection ------------------------------------------------------------------

RetrievedDocumentSet docs_fixture() {
    RetrievedDocumentSet docs;
    docs.question_id = "q1";
    docs.documents = {
        "First paragraph about the town hall.\n\nshort\n\nThird paragraph mentions the "
        "architect Matilda Greer explicitly.",
        "Second document has one long paragraph about market days."};
    return docs;
}

TEST(SplitParagraphs, BlankLineSegmentationWithLengthFloor) {
    std::vector<detail::ParagraphRef> paragraphs = detail::split_paragraphs(docs_fixture());
    // "short" (5 chars) is dropped; the three long paragraphs survive.
    ASSERT_EQ(paragraphs.size(), 3u);
    EXPECT_EQ(paragraphs[0].doc_index, 0);
    EXPECT_EQ(paragraphs[0].para_index, 0);
    EXPECT_EQ(paragraphs[1].doc_index, 0);
    EXPECT_EQ(paragraphs[1].para_index, 2);  // dropped "short" still counts as 1
    EXPECT_EQ(paragraphs[2].doc_index, 1);
    EXPECT_EQ(paragraphs[2].para_index, 0);
}

Client menu_client(const std::string& reply) {
    ModelEndpoint e;
    e.id = "sel";
    e.kind = EndpointKind::scripted;
    e.scripted.default_reply = reply;
    ClientOptions options;
    options.endpoints.push_back(std::move(e));
    return Client(std::move(options));
}

TEST(ParagraphMenuPrompt, NumbersEveryParagraphAndEndsWithQuestion) {
    std::vector<detail::ParagraphRef> paragraphs = detail::split_paragraphs(docs_fixture());
    std::string prompt = paragraph_menu_prompt(paragraphs, "Who designed the clock tower?");
    EXPECT_NE(prompt.find("0: First paragraph"), std::string::npos);
    EXPECT_NE(prompt.find("2: Second document"), std::string::npos);
    EXPECT_NE(prompt.find("Question: Who designed the clock tower?"), std::string::npos);
}

TEST(SelectContextParagraph, ParsesBareIndex) {
    Client client = menu_client("1");
    ParagraphSelection sel =
        select_context_paragraph(client, docs_fixture(), "who?", "sel");
    EXPECT_EQ(sel.chosen_doc_index, 0);
    EXPECT_EQ(sel.chosen_para_index, 2);
    EXPECT_NE(sel.chosen_paragraph.find("Matilda Greer"), std::string::npos);
    EXPECT_TRUE(sel.note.empty());
    EXPECT_EQ(sel.selector_rationale, "1");
}

TEST(SelectContextParagraph, ParsesProseReply) {
    Client client = menu_client("The best is paragraph 2 because it covers markets.");
    ParagraphSelection sel =
        select_context_paragraph(client, docs_fixture(), "who?", "sel");
    EXPECT_EQ(sel.chosen_doc_index, 1);
    EXPECT_TRUE(sel.note.empty());
}

TEST(SelectContextParagraph, OutOfRangeFallsBackWithNote) {
    Client client = menu_client("paragraph 9");
    ParagraphSelection sel =
        select_context_paragraph(client, docs_fixture(), "who?", "sel");
    EXPECT_EQ(sel.chosen_doc_index, 0);
    EXPECT_EQ(sel.chosen_para_index, 0);
    EXPECT_NE(sel.note.find("out of range"), std::string::npos);
}

TEST(SelectContextParagraph, UnparseableFallsBackWithNote) {
    Client client = menu_client("none of these");
    ParagraphSelection sel =
        select_context_paragraph(client, docs_fixture(), "who?", "sel");
    EXPECT_EQ(sel.chosen_doc_index, 0);
    EXPECT_NE(sel.note.find("no index"), std::string::npos);
}

TEST(SelectContextParagraph, EmptyAfterSegmentationThrows) {
    RetrievedDocumentSet docs;
    docs.question_id = "q";
    docs.documents = {"tiny\n\nwee"};  // everything under the 20-char floor
    Client client = menu_client("0");
    EXPECT_THROW(select_context_paragraph(client, docs, "who?", "sel"),
                 EmptyDocumentsError);
}

// ---- answer_with_target ----------------------------------------------------------------

TEST(AnswerWithTarget, QaEchoGoldScoresPerfectly) {
    // Target echoes the subject back wrapped in its gold object: "GOLD-S<i>".
    ModelEndpoint e;
    e.id = "tgt";
    e.kind = EndpointKind::scripted;
    e.max_concurrency = 4;
    e.scripted.responder = [](const ChatRequest& req) {
        const std::string& content = req.messages.back().content;
        std::size_t at = content.find('S', content.find(':'));
        return "I believe it is GOLD-" + content.substr(at, content.size() - at - 1) + ".";
    };
    ClientOptions options;
    options.endpoints.push_back(std::move(e));
    Client client(std::move(options));

    SelectionResult selection;
    selection.task = Task::qa;
    selection.relation_id = "R1";
    selection.selected_index = 0;
    selection.selected_template = indexed_candidates(1).templates[0];
    selection.tie_indices = {0};

    std::vector<RelationTriple> test = subjects(5);
    auto scored = answer_with_target<RelationTriple>(client, selection, test, "tgt");
    ASSERT_EQ(scored.size(), 5u);
    for (const auto& s : scored) EXPECT_TRUE(s.judgement.correct) << s.response;
    EXPECT_DOUBLE_EQ(accuracy_of(scored), 1.0);
}

TEST(AnswerWithTarget, RagFlowPrependsChosenParagraph) {
    std::string seen_prompt;
    ModelEndpoint e;
    e.id = "tgt";
    e.kind = EndpointKind::scripted;
    e.scripted.responder = [&seen_prompt](const ChatRequest& req) {
        seen_prompt = req.messages.back().content;
        return std::string("It was Matilda Greer.");
    };
    ClientOptions options;
    options.endpoints.push_back(std::move(e));
    Client client(std::move(options));

    ParagraphSelection selection;
    selection.question_id = "q1";
    selection.chosen_paragraph = "Third paragraph mentions the architect Matilda Greer.";

    ScoredSample<RelationTriple> scored = answer_with_target(
        client, selection, "Who designed the clock tower?",
        {"Matilda Greer", "M. Greer"}, "tgt");
    EXPECT_TRUE(scored.judgement.correct);
    EXPECT_EQ(seen_prompt.rfind("Context: ", 0), 0u);
    EXPECT_NE(seen_prompt.find("\n\nQuestion: Who designed the clock tower?"),
              std::string::npos);
}

TEST(AnswerWithTarget, RagRequiresGoldAnswers) {
    Client client = menu_client("x");
    ParagraphSelection selection;
    selection.chosen_paragraph = "p";
    EXPECT_THROW(answer_with_target(client, selection, "q?", {}, "sel"), EmptyInputError);
}

TEST(AnswerWithTarget, CotFlowScoresNumerically) {
    ModelEndpoint e;
    e.id = "tgt";
    e.kind = EndpointKind::scripted;
    e.scripted.responder = [](const ChatRequest& req) -> std::string {
        // Answer correctly iff the prompt carries the ex0 exemplar.
        if (req.messages.back().content.find("What is 0 + 0?") != std::string::npos)
            return "#### 100";
        return "#### -1";
    };
    ClientOptions options;
    options.endpoints.push_back(std::move(e));
    Client client(std::move(options));

    std::vector<CotExample> pool = cot_pool(3);
    CotCombination combo;
    combo.example_ids = {"ex0", "ex2"};

    std::vector<ArithmeticProblem> test(2);
    test[0].question = "t0";
    test[0].gold_answer = ExactNumber::from_parts(100, 1);
    test[1].question = "t1";
    test[1].gold_answer = ExactNumber::from_parts(200, 1);

    auto scored = answer_with_target(client, combo, pool, test, "tgt");
    ASSERT_EQ(scored.size(), 2u);
    EXPECT_TRUE(scored[0].judgement.correct);
    EXPECT_FALSE(scored[1].judgement.correct);
    EXPECT_DOUBLE_EQ(accuracy_of(scored), 0.5);
}

// When the selection model and the target model are the same scripted
// endpoint, the prompt selected on dev is also the oracle prompt on dev, so
// dev-side selected accuracy equals the per-candidate max by construction.
TEST(SelectorEqualsTarget, SelectedIsDevOracle) {
    TruthTable table;
    table.correct_subjects[0] = {"S0"};
    table.correct_subjects[2] = {"S0", "S1", "S2"};
    Client client = truth_table_client(table);

    CandidateSet set = indexed_candidates(4);
    std::vector<RelationTriple> dev = subjects(4);
    SelectionResult result = select_prompt<RelationTriple>(client, set, dev, "sel");

    int oracle_correct = 0;
    for (const auto& [index, correct] : result.dev_correct_by_index)
        oracle_correct = std::max(oracle_correct, correct);
    EXPECT_EQ(result.dev_correct_by_index.at(result.selected_index), oracle_correct);
}

}  // namespace
}  // namespace s2lpp
