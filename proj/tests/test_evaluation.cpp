#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "raglab/error.hpp"
#include "raglab/evaluation.hpp"

using namespace raglab;

TEST_CASE("score_response is containment accuracy") {
    CHECK(eval::score_response("it was george washington",
                               {"George Washington"}));
    CHECK_FALSE(eval::score_response("Roosevelt", {"President Roosevelt"}));
    CHECK_FALSE(eval::score_response("unknown", {"a real answer"}));
    CHECK_THROWS_AS(eval::score_response("text", {}), Error);
}

namespace {

Corpus answer_corpus() {
    Corpus corpus;
    corpus.add(testutil::passage("hit-1", "the answer alpha is here"));
    corpus.add(testutil::passage("hit-2", "beta lives here"));
    corpus.add(testutil::passage("miss-1", "nothing useful"));
    corpus.add(testutil::passage("miss-2", "still nothing"));
    return corpus;
}

ScoredDoc scored(const std::string& id, double score, int rank) {
    return ScoredDoc{id, score, rank, std::nullopt};
}

}  // namespace

TEST_CASE("topk accuracy counts first-hit ranks") {
    const Corpus corpus = answer_corpus();
    // q1 hits at rank 2, q2 at rank 1.
    std::map<std::string, std::vector<ScoredDoc>> retrieved{
        {"q1", {scored("miss-1", 3.0, 1), scored("hit-1", 2.0, 2)}},
        {"q2", {scored("hit-2", 5.0, 1), scored("miss-2", 1.0, 2)}}};
    const std::vector<QueryRecord> records{
        testutil::query("q1", "?", {"alpha"}),
        testutil::query("q2", "?", {"beta"})};
    const auto acc = eval::topk_accuracy(retrieved, records, {1, 2}, corpus);
    CHECK(acc.at(1) == doctest::Approx(0.5));
    CHECK(acc.at(2) == doctest::Approx(1.0));
}

TEST_CASE("topk accuracy saturates at the corpus size") {
    const Corpus corpus = answer_corpus();
    std::map<std::string, std::vector<ScoredDoc>> retrieved{
        {"q1",
         {scored("miss-1", 4.0, 1), scored("miss-2", 3.0, 2),
          scored("hit-1", 2.0, 3), scored("hit-2", 1.0, 4)}}};
    const std::vector<QueryRecord> records{
        testutil::query("q1", "?", {"alpha"})};
    const auto acc = eval::topk_accuracy(retrieved, records, {4}, corpus);
    CHECK(acc.at(4) == doctest::Approx(1.0));
}

TEST_CASE("topk accuracy is monotone in k") {
    std::mt19937_64 rng(83);
    std::uniform_int_distribution<int> hit_rank(1, 12);
    for (int trial = 0; trial < 100; ++trial) {
        Corpus corpus;
        std::map<std::string, std::vector<ScoredDoc>> retrieved;
        std::vector<QueryRecord> records;
        for (int q = 0; q < 6; ++q) {
            const std::string qid = "q" + std::to_string(q);
            records.push_back(testutil::query(qid, "?", {"needle"}));
            const int hit = hit_rank(rng);
            std::vector<ScoredDoc> list;
            for (int r = 1; r <= 12; ++r) {
                const std::string pid =
                    qid + "-p" + std::to_string(r) + "-" + std::to_string(trial);
                corpus.add(testutil::passage(
                    pid, r == hit ? "the needle is here" : "plain hay"));
                list.push_back(scored(pid, 100.0 - r, r));
            }
            retrieved[qid] = std::move(list);
        }
        const std::vector<int> ks{1, 2, 4, 8, 12};
        const auto acc = eval::topk_accuracy(retrieved, records, ks, corpus);
        double prev = 0.0;
        for (int k : ks) {
            CHECK(acc.at(k) >= prev);
            prev = acc.at(k);
        }
        CHECK(acc.at(12) == doctest::Approx(1.0));
    }
}

TEST_CASE("topk accuracy requires a list per query") {
    const Corpus corpus = answer_corpus();
    std::map<std::string, std::vector<ScoredDoc>> retrieved;
    const std::vector<QueryRecord> records{testutil::query("q1", "?", {"x"})};
    CHECK_THROWS_AS(eval::topk_accuracy(retrieved, records, {1}, corpus),
                    Error);
}

TEST_CASE("topk accuracy requires lists covering max(ks)") {
    const Corpus corpus = answer_corpus();
    std::map<std::string, std::vector<ScoredDoc>> retrieved{
        {"q1", {scored("hit-1", 1.0, 1)}}};
    const std::vector<QueryRecord> records{
        testutil::query("q1", "?", {"alpha"})};
    CHECK_THROWS_AS(eval::topk_accuracy(retrieved, records, {3}, corpus),
                    Error);
}

namespace {

eval::EvalReport sample_report() {
    eval::EvalReport report;
    report.config_echo = {{"counts", {{"distracting", 4}, {"random", 0}}}};
    report.n_queries = 3;
    report.per_query = {{"q1", "a", true, ""},
                        {"q2", "b", false, ""},
                        {"q3", "c", true, ""}};
    report.accuracy = 2.0 / 3.0;
    return report;
}

}  // namespace

TEST_CASE("render_report prints 4-decimal cells") {
    eval::EvalReport report = sample_report();
    report.accuracy = 0.5642;
    const std::string csv =
        eval::render_report(report, eval::ReportFormat::csv);
    CHECK(csv == "n_docs,accuracy\n4,0.5642\n");
}

TEST_CASE("render_report emits position columns in near/mid/far order") {
    eval::EvalReport report = sample_report();
    report.per_position = {{"far", 0.17}, {"near", 0.37}, {"mid", 0.23}};
    const std::string csv =
        eval::render_report(report, eval::ReportFormat::csv);
    CHECK(csv == "n_docs,near,mid,far\n4,0.3700,0.2300,0.1700\n");

    const std::string md =
        eval::render_report(report, eval::ReportFormat::markdown);
    CHECK(md.find("| n_docs | near | mid | far |") != std::string::npos);
    CHECK(md.find("| 4 | 0.3700 | 0.2300 | 0.1700 |") != std::string::npos);
}

TEST_CASE("render_report omits position columns when none are present") {
    const std::string csv =
        eval::render_report(sample_report(), eval::ReportFormat::csv);
    CHECK(csv.find("near") == std::string::npos);
    CHECK(csv.rfind("n_docs,accuracy\n", 0) == 0);
}

TEST_CASE("render_report includes top-k columns") {
    eval::EvalReport report = sample_report();
    report.topk_accuracy = {{1, 0.25}, {10, 0.5}};
    const std::string csv =
        eval::render_report(report, eval::ReportFormat::csv);
    CHECK(csv == "n_docs,accuracy,top1,top10\n4,0.6667,0.2500,0.5000\n");
}

TEST_CASE("render_report output is byte-stable") {
    const auto a = eval::render_report(sample_report(), eval::ReportFormat::csv);
    const auto b = eval::render_report(sample_report(), eval::ReportFormat::csv);
    CHECK(a == b);
}

TEST_CASE("reports round-trip through JSON") {
    eval::EvalReport report = sample_report();
    report.per_position["near"] = 0.5;
    report.topk_accuracy[4] = 0.75;
    report.n_budget_limited = 1;
    const auto j = report.to_json();
    const auto back = eval::EvalReport::from_json(j);
    CHECK(back.n_queries == report.n_queries);
    CHECK(back.accuracy == report.accuracy);
    CHECK(back.per_position == report.per_position);
    CHECK(back.topk_accuracy == report.topk_accuracy);
    CHECK(back.n_budget_limited == 1);
    REQUIRE(back.per_query.size() == report.per_query.size());
    CHECK(back.per_query[1].query_id == "q2");
    CHECK(back.per_query[1].correct == false);
}

TEST_CASE("aggregate accuracy equals the mean of per-query rows") {
    const auto report = sample_report();
    int correct = 0;
    for (const auto& row : report.per_query) correct += row.correct ? 1 : 0;
    CHECK(report.accuracy ==
          doctest::Approx(static_cast<double>(correct) /
                          report.per_query.size()));
}

TEST_CASE("render_grid leaves missing cells blank and quotes csv") {
    std::map<std::pair<std::string, std::string>, double> cells{
        {{"1", "near"}, 0.5},
        {{"2", "far"}, 0.25}};
    const std::string csv = eval::render_grid("n_docs", {"1", "2"},
                                              {"near", "far"}, cells,
                                              eval::ReportFormat::csv);
    CHECK(csv == "n_docs,near,far\n1,0.5000,\n2,,0.2500\n");

    std::map<std::pair<std::string, std::string>, double> quoted{
        {{"a,b", "c"}, 1.0}};
    const std::string q = eval::render_grid("r", {"a,b"}, {"c"}, quoted,
                                            eval::ReportFormat::csv);
    CHECK(q == "r,c\n\"a,b\",1.0000\n");
}
