#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "s2lpp/datasets.hpp"
#include "s2lpp/log.hpp"

namespace s2lpp {
namespace {

const std::string kFixtures = S2LPP_FIXTURES_DIR;

class TempFile {
public:
    explicit TempFile(const std::string& content) {
        path_ = std::filesystem::temp_directory_path() /
                ("s2lpp_ds_" + std::to_string(counter()++) + ".jsonl");
        std::ofstream out(path_);
        out << content;
    }
    ~TempFile() { std::filesystem::remove(path_); }
    std::string path() const { return path_.string(); }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

// ---- triples -------------------------------------------------------------------

TEST(LoadRelationTriples, ParsesFieldsAndPreservesOrder) {
    TempFile f(
        R"({"sub_label": "Ada", "obj_label": "London", "predicate_id": "P19"})"
        "\n"
        R"({"sub_label": "Bob", "obj_label": "Paris", "predicate_id": "P19", "relation_name": "born-in", "aliases": ["Lutetia"]})"
        "\n");
    std::vector<RelationTriple> triples = load_relation_triples(f.path());
    ASSERT_EQ(triples.size(), 2u);
    EXPECT_EQ(triples[0].subject, "Ada");
    EXPECT_EQ(triples[0].object, "London");
    EXPECT_EQ(triples[0].relation_id, "P19");
    EXPECT_EQ(triples[1].relation_name, "born-in");
    ASSERT_EQ(triples[1].aliases.size(), 1u);
    EXPECT_EQ(triples[1].aliases[0], "Lutetia");
}

TEST(LoadRelationTriples, FilterKeepsOnlyMatchingRelation) {
    TempFile f(
        R"({"sub_label": "A", "obj_label": "B", "predicate_id": "P1"})"
        "\n"
        R"({"sub_label": "C", "obj_label": "D", "predicate_id": "P2"})"
        "\n");
    auto triples = load_relation_triples(f.path(), std::string("P2"));
    ASSERT_EQ(triples.size(), 1u);
    EXPECT_EQ(triples[0].subject, "C");
}

TEST(LoadRelationTriples, MissingFieldThrowsWithLine) {
    TempFile f(
        R"({"sub_label": "A", "obj_label": "B", "predicate_id": "P1"})"
        "\n"
        R"({"sub_label": "C", "predicate_id": "P1"})"
        "\n");
    try {
        load_relation_triples(f.path());
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.field(), "obj_label");
    }
}

TEST(LoadRelationTriples, BadJsonThrows) {
    TempFile f("{not json\n");
    EXPECT_THROW(load_relation_triples(f.path()), SchemaError);
}

TEST(LoadRelationTriples, MissingFileThrows) {
    EXPECT_THROW(load_relation_triples("/nonexistent/file.jsonl"), FileNotFoundError);
}

TEST(LoadRelationTriples, SkipsBlankLines) {
    TempFile f(
        "\n"
        R"({"sub_label": "A", "obj_label": "B", "predicate_id": "P1"})"
        "\n\n");
    EXPECT_EQ(load_relation_triples(f.path()).size(), 1u);
}

TEST(LoadRelationTriples, DemoFixtureLoads) {
    auto triples = load_relation_triples(kFixtures + "/datasets/google_re_demo.jsonl");
    EXPECT_EQ(triples.size(), 36u);  // 3 relations x 12 subjects
    auto births = load_relation_triples(kFixtures + "/datasets/google_re_demo.jsonl",
                                        std::string("PlaceOfBirth"));
    EXPECT_EQ(births.size(), 12u);
    EXPECT_EQ(births.front().subject, "Person 1");
    EXPECT_EQ(births.back().subject, "Person 12");
}

// ---- entailment pairs -------------------------------------------------------------

TEST(LoadEntailmentPairs, ParsesLabelsAndDirections) {
    TempFile f(
        R"({"premise": "a dog barked", "hypothesis": "an animal made noise", "label": true})"
        "\n"
        R"({"premise": "an animal made noise", "hypothesis": "a dog barked", "label": false, "direction": "reverse"})"
        "\n");
    auto pairs = load_entailment_pairs(f.path());
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_TRUE(pairs[0].label);
    EXPECT_EQ(pairs[0].direction, Direction::forward);
    EXPECT_FALSE(pairs[1].label);
    EXPECT_EQ(pairs[1].direction, Direction::reverse);
}

TEST(LoadEntailmentPairs, IdenticalPremiseHypothesisThrows) {
    TempFile f(R"({"premise": "same", "hypothesis": "same", "label": true})" "\n");
    EXPECT_THROW(load_entailment_pairs(f.path()), SchemaError);
}

TEST(LoadEntailmentPairs, NonBooleanLabelThrows) {
    TempFile f(R"({"premise": "a", "hypothesis": "b", "label": "yes"})" "\n");
    EXPECT_THROW(load_entailment_pairs(f.path()), SchemaError);
}

TEST(LoadEntailmentPairs, BadDirectionThrows) {
    TempFile f(
        R"({"premise": "a", "hypothesis": "b", "label": true, "direction": "sideways"})"
        "\n");
    EXPECT_THROW(load_entailment_pairs(f.path()), SchemaError);
}

TEST(LoadEntailmentPairs, SampleFixtureLoads) {
    auto pairs = load_entailment_pairs(kFixtures + "/datasets/levy_holt_sample.jsonl");
    EXPECT_EQ(pairs.size(), 8u);
    bool any_reverse = false;
    for (const auto& p : pairs) any_reverse |= p.direction == Direction::reverse;
    EXPECT_TRUE(any_reverse);
}

// ---- arithmetic -------------------------------------------------------------------

TEST(LoadArithmeticProblems, SplitsRationaleFromGold) {
    TempFile f(
        R"({"question": "3 plus 6?", "answer": "3 + 6 = 9\n#### 9"})" "\n");
    auto problems = load_arithmetic_problems(f.path());
    ASSERT_EQ(problems.size(), 1u);
    EXPECT_EQ(problems[0].gold_answer, ExactNumber::from_parts(9, 1));
    EXPECT_EQ(problems[0].gold_rationale, "3 + 6 = 9");
}

TEST(LoadArithmeticProblems, MissingMarkerThrows) {
    TempFile f(R"({"question": "q", "answer": "just nine"})" "\n");
    EXPECT_THROW(load_arithmetic_problems(f.path()), SchemaError);
}

TEST(LoadArithmeticProblems, CommaGroupedGold) {
    TempFile f(R"({"question": "q", "answer": "240+780\n#### 1,020"})" "\n");
    auto problems = load_arithmetic_problems(f.path());
    ASSERT_EQ(problems.size(), 1u);
    EXPECT_EQ(problems[0].gold_answer, ExactNumber::from_parts(1020, 1));
}

TEST(LoadArithmeticProblems, SampleFixtureLoads) {
    auto problems = load_arithmetic_problems(kFixtures + "/datasets/gsm8k_sample.jsonl");
    ASSERT_EQ(problems.size(), 3u);
    EXPECT_EQ(problems[0].gold_answer, ExactNumber::from_parts(9, 1));
    EXPECT_EQ(problems[2].gold_answer, ExactNumber::from_parts(1020, 1));
    for (const auto& p : problems) EXPECT_FALSE(p.gold_rationale.empty());
}

// ---- document sets -----------------------------------------------------------------

TEST(LoadDocumentSets, ParsesDocumentsAndUrls) {
    auto sets = load_document_sets(kFixtures + "/datasets/retrieved_docs_sample.jsonl");
    ASSERT_EQ(sets.size(), 2u);
    EXPECT_EQ(sets[0].question_id, "q1");
    EXPECT_EQ(sets[0].documents.size(), 2u);
    EXPECT_EQ(sets[0].source_urls.size(), 2u);
    EXPECT_TRUE(sets[1].source_urls.empty());
}

TEST(LoadDocumentSets, RejectsEmptyAndOversizedDocumentLists) {
    TempFile empty(R"({"question_id": "q", "documents": []})" "\n");
    EXPECT_THROW(load_document_sets(empty.path()), SchemaError);

    std::string eleven = R"({"question_id": "q", "documents": [)";
    for (int i = 0; i < 11; ++i) eleven += (i ? "," : "") + std::string("\"doc\"");
    eleven += "]}\n";
    TempFile oversized(eleven);
    EXPECT_THROW(load_document_sets(oversized.path()), SchemaError);
}

// ---- split ---------------------------------------------------------------------------

std::vector<RelationTriple> synthetic_triples(std::size_t n) {
    std::vector<RelationTriple> triples(n);
    for (std::size_t i = 0; i < n; ++i) {
        triples[i].subject = "S" + std::to_string(i);
        triples[i].object = "O" + std::to_string(i);
        triples[i].relation_id = "P1";
    }
    return triples;
}

TEST(Split, HeadContractOnLargeDataset) {
    // 5500 records, dev_size 100: dev is exactly the first 100 in order, test
    // is exactly the remaining 5400 in order, and the two are disjoint.
    std::vector<RelationTriple> dataset = synthetic_triples(5500);
    SplitSpec spec;
    spec.dev_size = 100;
    SplitResult<RelationTriple> result = split(dataset, spec);

    ASSERT_EQ(result.dev.size(), 100u);
    ASSERT_EQ(result.test.size(), 5400u);
    for (std::size_t i = 0; i < 100; ++i)
        EXPECT_EQ(result.dev[i].subject, "S" + std::to_string(i));
    for (std::size_t i = 0; i < 5400; ++i)
        EXPECT_EQ(result.test[i].subject, "S" + std::to_string(i + 100));
}

TEST(Split, HeadTooSmallThrows) {
    std::vector<RelationTriple> dataset = synthetic_triples(99);
    SplitSpec spec;
    spec.dev_size = 100;
    EXPECT_THROW(split(dataset, spec), DatasetTooSmallError);
}

TEST(Split, HeadConsumingWholeDatasetWarns) {
    std::vector<RelationTriple> dataset = synthetic_triples(10);
    SplitSpec spec;
    spec.dev_size = 10;

    std::vector<std::string> warnings;
    WarnHandler previous = warn_handler();
    warn_handler() = [&](const std::string& msg) { warnings.push_back(msg); };
    SplitResult<RelationTriple> result = split(dataset, spec);
    warn_handler() = previous;

    EXPECT_EQ(result.dev.size(), 10u);
    EXPECT_TRUE(result.test.empty());
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("empty test set"), std::string::npos);
}

TEST(Split, FixedIdsSelectsExactlyThoseIndices) {
    std::vector<RelationTriple> dataset = synthetic_triples(10);
    SplitSpec spec;
    spec.strategy = SplitStrategy::fixed_ids;
    spec.fixed_indices = {7, 2, 2, 5};  // duplicates collapse, order normalizes
    SplitResult<RelationTriple> result = split(dataset, spec);

    ASSERT_EQ(result.dev.size(), 3u);
    EXPECT_EQ(result.dev[0].subject, "S2");
    EXPECT_EQ(result.dev[1].subject, "S5");
    EXPECT_EQ(result.dev[2].subject, "S7");
    EXPECT_EQ(result.test.size(), 7u);
    for (const auto& t : result.test) {
        EXPECT_NE(t.subject, "S2");
        EXPECT_NE(t.subject, "S5");
        EXPECT_NE(t.subject, "S7");
    }
}

TEST(Split, FixedIdsOutOfRangeThrows) {
    std::vector<RelationTriple> dataset = synthetic_triples(5);
    SplitSpec spec;
    spec.strategy = SplitStrategy::fixed_ids;
    spec.fixed_indices = {5};
    EXPECT_THROW(split(dataset, spec), DatasetTooSmallError);
}

TEST(Split, RandomSeededIsDeterministicAndOrderPreserving) {
    std::vector<RelationTriple> dataset = synthetic_triples(50);
    SplitSpec spec;
    spec.strategy = SplitStrategy::random_seeded;
    spec.dev_size = 10;
    spec.seed = 1234;

    SplitResult<RelationTriple> a = split(dataset, spec);
    SplitResult<RelationTriple> b = split(dataset, spec);
    ASSERT_EQ(a.dev.size(), 10u);
    for (std::size_t i = 0; i < a.dev.size(); ++i)
        EXPECT_EQ(a.dev[i].subject, b.dev[i].subject);

    // Different seed, different sample (with overwhelming probability).
    spec.seed = 99;
    SplitResult<RelationTriple> c = split(dataset, spec);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.dev.size(); ++i)
        any_difference |= a.dev[i].subject != c.dev[i].subject;
    EXPECT_TRUE(any_difference);

    // dev + test is a permutation-free partition: sizes add up and each test
    // element is absent from dev.
    EXPECT_EQ(a.dev.size() + a.test.size(), dataset.size());
}

TEST(Split, DevPlusTestCoversDatasetInOrder) {
    std::vector<RelationTriple> dataset = synthetic_triples(20);
    SplitSpec spec;
    spec.dev_size = 6;
    SplitResult<RelationTriple> result = split(dataset, spec);

    std::vector<std::string> recombined;
    for (const auto& t : result.dev) recombined.push_back(t.subject);
    for (const auto& t : result.test) recombined.push_back(t.subject);
    ASSERT_EQ(recombined.size(), dataset.size());
    // Head split: concatenation reproduces the original order exactly.
    for (std::size_t i = 0; i < dataset.size(); ++i)
        EXPECT_EQ(recombined[i], dataset[i].subject);
}

}  // namespace
}  // namespace s2lpp
