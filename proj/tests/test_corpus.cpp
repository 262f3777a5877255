#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "raglab/corpus.hpp"
#include "raglab/error.hpp"
#include "raglab/text.hpp"

using namespace raglab;

namespace {

std::string words(int n, const std::string& stem = "w") {
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i > 0) out.push_back(' ');
        out += stem + std::to_string(i);
    }
    return out;
}

}  // namespace

TEST_CASE("segment_document exact fit produces one passage") {
    const auto parts = segment_document("Article", words(100), 100);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].word_count == 100);
    CHECK(parts[0].id == "Article#0");
    CHECK(parts[0].title == "Article");
}

TEST_CASE("segment_document keeps the remainder") {
    // 250 words at window 100: hand count gives 100 + 100 + 50.
    const auto parts = segment_document("Long", words(250), 100);
    REQUIRE(parts.size() == 3);
    CHECK(parts[0].word_count == 100);
    CHECK(parts[1].word_count == 100);
    CHECK(parts[2].word_count == 50);
    CHECK(parts[2].id == "Long#2");
}

TEST_CASE("segment_document of empty text is empty") {
    CHECK(segment_document("Empty", "", 100).empty());
    CHECK(segment_document("Blank", "   \t\n", 100).empty());
}

TEST_CASE("segment_document sanitizes '#' in titles") {
    const auto parts = segment_document("a#b#c", "one two", 1);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].id == "a-b-c#0");
    CHECK(parts[1].id == "a-b-c#1");
    CHECK(parts[0].title == "a#b#c");
}

TEST_CASE("segment_document rejects window < 1") {
    CHECK_THROWS_AS(segment_document("t", "x", 0), Error);
}

TEST_CASE("segmentation round-trips the token sequence") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> n_words(0, 1000);
    std::uniform_int_distribution<int> window(1, 200);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = n_words(rng);
        const int w = window(rng);
        const std::string original = testutil::random_text(rng, n);
        const auto parts = segment_document("doc", original, w);

        std::vector<std::string_view> rejoined;
        for (const auto& p : parts) {
            for (auto word : text::whitespace_words(p.text)) {
                rejoined.push_back(word);
            }
            CHECK(p.word_count <= w);
            CHECK(p.word_count == text::word_count(p.text));
        }
        const auto expected = text::whitespace_words(original);
        REQUIRE(rejoined.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(rejoined[i] == expected[i]);
        }
        const std::size_t expect_count =
            n == 0 ? 0 : (static_cast<std::size_t>(n) + w - 1) / w;
        CHECK(parts.size() == expect_count);
    }
}

TEST_CASE("ingest_corpus counts well-formed lines") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("c.jsonl"),
                         R"({"id":"a","title":"A","text":"one two"})"
                         "\n"
                         R"({"id":"b","title":"B","text":"three"})"
                         "\n"
                         R"({"id":"c","title":"C","text":"","origin":"synthetic"})"
                         "\n");
    const Corpus corpus = ingest_corpus(dir.file("c.jsonl"));
    CHECK(corpus.document_count() == 3);
    CHECK(corpus.at("a").word_count == 2);
    CHECK(corpus.at("c").origin == Origin::synthetic);
    CHECK(corpus.contains("b"));
    CHECK(corpus.find("missing") == nullptr);
}

TEST_CASE("ingest_corpus reports duplicate ids with both lines") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("dup.jsonl"),
                         R"({"id":"x","title":"1","text":"a"})"
                         "\n"
                         R"({"id":"y","title":"2","text":"b"})"
                         "\n"
                         R"({"id":"z","title":"3","text":"c"})"
                         "\n"
                         R"({"id":"q","title":"4","text":"d"})"
                         "\n"
                         R"({"id":"y","title":"5","text":"e"})"
                         "\n");
    try {
        ingest_corpus(dir.file("dup.jsonl"));
        FAIL("expected duplicate-id error");
    } catch (const Error& e) {
        const std::string message = e.what();
        CHECK(message.find("'y'") != std::string::npos);
        CHECK(message.find("2") != std::string::npos);
        CHECK(message.find("5") != std::string::npos);
    }
}

TEST_CASE("ingest_corpus reports the failing line on parse errors") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("bad.jsonl"),
                         R"({"id":"a","title":"A","text":"x"})"
                         "\n"
                         "not json\n");
    try {
        ingest_corpus(dir.file("bad.jsonl"));
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parse);
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("ingest_corpus of an empty file is an empty corpus") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("empty.jsonl"), "");
    CHECK(ingest_corpus(dir.file("empty.jsonl")).document_count() == 0);
}

TEST_CASE("ingest_corpus rejects unknown origins") {
    testutil::TempDir dir;
    testutil::write_file(
        dir.file("o.jsonl"),
        R"({"id":"a","title":"A","text":"x","origin":"bogus"})" "\n");
    CHECK_THROWS_AS(ingest_corpus(dir.file("o.jsonl")), Error);
}

TEST_CASE("load_queries parses records and validates answers") {
    testutil::TempDir dir;
    testutil::write_file(
        dir.file("q.jsonl"),
        R"({"id":"q1","question":"who?","answers":["a","b"],"gold_passage_id":"g1"})"
        "\n"
        R"({"id":"q2","question":"what?","answers":["c"]})"
        "\n");
    const auto records = load_queries(dir.file("q.jsonl"));
    REQUIRE(records.size() == 2);
    CHECK(records[0].gold_passage_id == "g1");
    CHECK(!records[1].gold_passage_id);
    CHECK(records[0].answers.size() == 2);

    testutil::write_file(dir.file("bad.jsonl"),
                         R"({"id":"q","question":"?","answers":[]})" "\n");
    CHECK_THROWS_AS(load_queries(dir.file("bad.jsonl")), Error);
}

namespace {

Corpus ten_doc_corpus() {
    Corpus corpus;
    for (int i = 0; i < 10; ++i) {
        corpus.add(testutil::passage("d" + std::to_string(i), "body"));
    }
    return corpus;
}

}  // namespace

TEST_CASE("merge_gold adds referenced gold passages") {
    Corpus gold;
    gold.add(testutil::passage("g1", "answer one"));
    gold.add(testutil::passage("g2", "answer two"));
    gold.add(testutil::passage("g3", "unused"));

    const std::vector<QueryRecord> records{
        testutil::query("q1", "?", {"one"}, "g1"),
        testutil::query("q2", "?", {"two"}, "g2"),
        testutil::query("q3", "?", {"x"})};

    const Corpus merged = merge_gold(ten_doc_corpus(), records, gold);
    CHECK(merged.document_count() == 12);
    CHECK(merged.at("g1").origin == Origin::gold_merged);
    CHECK(!merged.contains("g3"));
}

TEST_CASE("merge_gold is idempotent and order-insensitive") {
    Corpus gold;
    gold.add(testutil::passage("g1", "answer"));
    std::vector<QueryRecord> records{testutil::query("q1", "?", {"a"}, "g1"),
                                     testutil::query("q2", "?", {"b"}, "g1")};

    const Corpus once = merge_gold(ten_doc_corpus(), records, gold);
    const Corpus twice = merge_gold(once, records, gold);
    CHECK(once.document_count() == 11);
    CHECK(twice.document_count() == 11);

    std::reverse(records.begin(), records.end());
    const Corpus reversed = merge_gold(ten_doc_corpus(), records, gold);
    CHECK(reversed.document_count() == 11);
    CHECK(reversed.ids() == once.ids());
}

TEST_CASE("merge_gold keeps an already-present gold passage") {
    Corpus corpus = ten_doc_corpus();
    corpus.add(testutil::passage("g1", "already here"));
    const std::vector<QueryRecord> records{
        testutil::query("q1", "?", {"a"}, "g1")};
    const Corpus merged = merge_gold(corpus, records, Corpus{});
    CHECK(merged.document_count() == 11);
    CHECK(merged.at("g1").origin == Origin::main_corpus);
}

TEST_CASE("merge_gold names the query with an unresolvable gold id") {
    const std::vector<QueryRecord> records{
        testutil::query("q9", "?", {"a"}, "missing-gold")};
    try {
        merge_gold(ten_doc_corpus(), records, Corpus{});
        FAIL("expected unresolvable-gold error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("q9") != std::string::npos);
        CHECK(std::string(e.what()).find("missing-gold") != std::string::npos);
    }
}

TEST_CASE("corpus rejects duplicate and empty ids") {
    Corpus corpus;
    corpus.add(testutil::passage("a", "x"));
    CHECK_THROWS_AS(corpus.add(testutil::passage("a", "y")), Error);
    CHECK_THROWS_AS(corpus.add(testutil::passage("", "y")), Error);
    CHECK_THROWS_AS(corpus.at("nope"), Error);
}
