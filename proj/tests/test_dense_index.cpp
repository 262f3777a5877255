#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "helpers.hpp"
#include "raglab/dense_index.hpp"
#include "raglab/error.hpp"

using namespace raglab;

namespace {

dense::EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::uint64_t rows,
                                     std::uint32_t dim) {
    std::uniform_real_distribution<float> value(-1.0f, 1.0f);
    std::vector<std::string> ids;
    std::vector<float> data;
    data.reserve(rows * dim);
    for (std::uint64_t r = 0; r < rows; ++r) {
        ids.push_back("row-" + std::to_string(r));
        for (std::uint32_t d = 0; d < dim; ++d) data.push_back(value(rng));
    }
    return dense::EmbeddingMatrix::from_rows(std::move(ids), std::move(data),
                                             dim);
}

// Test-side scan: sequential, sorts everything, shares nothing with the
// implementation's selection path.
std::vector<ScoredDoc> naive_scan(const dense::EmbeddingMatrix& matrix,
                                  std::span<const float> query, int k) {
    std::vector<std::pair<double, std::string>> scored;
    for (std::uint64_t i = 0; i < matrix.count(); ++i) {
        double acc = 0.0;
        const auto row = matrix.row(i);
        for (std::uint32_t d = 0; d < matrix.dim(); ++d) {
            acc += static_cast<double>(query[d]) * static_cast<double>(row[d]);
        }
        scored.emplace_back(acc, matrix.id(i));
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) {
                         if (a.first != b.first) return a.first > b.first;
                         return a.second < b.second;
                     });
    std::vector<ScoredDoc> out;
    for (std::size_t i = 0;
         i < scored.size() && i < static_cast<std::size_t>(k); ++i) {
        out.push_back(ScoredDoc{scored[i].second, scored[i].first,
                                static_cast<int>(i + 1), std::nullopt});
    }
    return out;
}

}  // namespace

TEST_CASE("dot products accumulate exactly") {
    const std::vector<float> e1{1.0f, 0.0f};
    const std::vector<float> e2{0.0f, 1.0f};
    CHECK(dense::dot(e1, e2) == 0.0);
    const std::vector<float> a{1.0f, 2.0f, 3.0f};
    const std::vector<float> b{4.0f, 5.0f, 6.0f};
    CHECK(dense::dot(a, b) == 32.0);
    const std::vector<float> unit{0.6f, 0.8f};
    CHECK(dense::dot(unit, unit) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK_THROWS_AS(dense::dot(a, e1), Error);
}

TEST_CASE("save and load round-trip bit-for-bit") {
    std::mt19937_64 rng(41);
    const auto matrix = random_matrix(rng, 5, 4);
    testutil::TempDir dir;
    matrix.save(dir.file("m.rge"));
    const auto loaded = dense::EmbeddingMatrix::load(dir.file("m.rge"));
    REQUIRE(loaded.count() == 5);
    REQUIRE(loaded.dim() == 4);
    for (std::uint64_t r = 0; r < 5; ++r) {
        CHECK(loaded.id(r) == matrix.id(r));
        for (std::uint32_t d = 0; d < 4; ++d) {
            CHECK(loaded.row(r)[d] == matrix.row(r)[d]);
        }
    }
}

TEST_CASE("an empty matrix is valid") {
    auto matrix = dense::EmbeddingMatrix::from_rows({}, {}, 3);
    testutil::TempDir dir;
    matrix.save(dir.file("empty.rge"));
    const auto loaded = dense::EmbeddingMatrix::load(dir.file("empty.rge"));
    CHECK(loaded.count() == 0);
    CHECK(loaded.dim() == 3);
}

TEST_CASE("malformed embedding files are rejected with specific errors") {
    std::mt19937_64 rng(43);
    const auto matrix = random_matrix(rng, 4, 3);
    testutil::TempDir dir;
    matrix.save(dir.file("ok.rge"));
    const std::string bytes = testutil::read_file(dir.file("ok.rge"));

    SUBCASE("bad magic") {
        std::string bad = bytes;
        bad[0] = 'Z';
        testutil::write_file(dir.file("bad.rge"), bad);
        CHECK_THROWS_WITH_AS(dense::EmbeddingMatrix::load(dir.file("bad.rge")),
                             doctest::Contains("bad magic"), Error);
    }
    SUBCASE("bad version") {
        std::string bad = bytes;
        bad[4] = 7;
        testutil::write_file(dir.file("bad.rge"), bad);
        CHECK_THROWS_WITH_AS(dense::EmbeddingMatrix::load(dir.file("bad.rge")),
                             doctest::Contains("version"), Error);
    }
    SUBCASE("truncated vector section reports byte counts") {
        // Header is 4+4+4+8 = 20 bytes; vectors are 4*3*4 = 48 bytes.
        testutil::write_file(dir.file("bad.rge"), bytes.substr(0, 20 + 17));
        try {
            dense::EmbeddingMatrix::load(dir.file("bad.rge"));
            FAIL("expected truncation error");
        } catch (const Error& e) {
            const std::string message = e.what();
            CHECK(message.find("truncated in vector section") !=
                  std::string::npos);
            CHECK(message.find("48") != std::string::npos);
            CHECK(message.find("17") != std::string::npos);
        }
    }
    SUBCASE("truncated id section") {
        testutil::write_file(dir.file("bad.rge"),
                             bytes.substr(0, bytes.size() - 2));
        CHECK_THROWS_WITH_AS(dense::EmbeddingMatrix::load(dir.file("bad.rge")),
                             doctest::Contains("id section"), Error);
    }
    SUBCASE("trailing bytes") {
        testutil::write_file(dir.file("bad.rge"), bytes + "xx");
        CHECK_THROWS_WITH_AS(dense::EmbeddingMatrix::load(dir.file("bad.rge")),
                             doctest::Contains("trailing"), Error);
    }
    SUBCASE("non-finite values") {
        std::string bad = bytes;
        const float nan = std::nanf("");
        std::memcpy(bad.data() + 20, &nan, sizeof(nan));
        testutil::write_file(dir.file("bad.rge"), bad);
        CHECK_THROWS_WITH_AS(dense::EmbeddingMatrix::load(dir.file("bad.rge")),
                             doctest::Contains("non-finite"), Error);
    }
}

TEST_CASE("duplicate ids are rejected") {
    CHECK_THROWS_WITH_AS(
        dense::EmbeddingMatrix::from_rows({"a", "a"},
                                          {1.0f, 0.0f, 0.0f, 1.0f}, 2),
        doctest::Contains("duplicate"), Error);
}

TEST_CASE("search picks basis rows exactly") {
    std::vector<std::string> ids{"e1", "e2", "e3", "e4"};
    std::vector<float> data(16, 0.0f);
    for (int i = 0; i < 4; ++i) data[i * 4 + i] = 1.0f;
    const auto matrix =
        dense::EmbeddingMatrix::from_rows(std::move(ids), std::move(data), 4);
    const std::vector<float> q{0.0f, 0.0f, 1.0f, 0.0f};
    const auto results = dense::search(matrix, q, 1);
    REQUIRE(results.size() == 1);
    CHECK(results[0].passage_id == "e3");
    CHECK(results[0].score == 1.0);
    CHECK(results[0].rank == 1);
}

TEST_CASE("search equals the naive scan on random instances") {
    std::mt19937_64 rng(53);
    std::uniform_int_distribution<int> rows(1, 1000);
    std::uniform_int_distribution<int> dims(1, 16);
    std::uniform_real_distribution<float> value(-1.0f, 1.0f);
    for (int trial = 0; trial < 25; ++trial) {
        const auto matrix = random_matrix(rng, rows(rng), dims(rng));
        std::vector<float> q(matrix.dim());
        for (auto& v : q) v = value(rng);
        const int k = std::min<std::uint64_t>(10, matrix.count());

        for (unsigned threads : {1u, 2u, 3u, 4u}) {
            const auto got = dense::search(matrix, q, k, threads);
            const auto expected = naive_scan(matrix, q, k);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].passage_id == expected[i].passage_id);
                CHECK(got[i].score == expected[i].score);  // bitwise
            }
        }
    }
}

TEST_CASE("k = count returns the full ranking") {
    std::mt19937_64 rng(59);
    const auto matrix = random_matrix(rng, 37, 8);
    std::vector<float> q(8, 0.25f);
    const auto results =
        dense::search(matrix, q, static_cast<int>(matrix.count()));
    const auto expected = naive_scan(matrix, q, 37);
    REQUIRE(results.size() == 37);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].passage_id == expected[i].passage_id);
        CHECK(results[i].score == expected[i].score);
        if (i > 0) CHECK(results[i - 1].score >= results[i].score);
    }
}

TEST_CASE("ties break by passage id ascending") {
    std::vector<std::string> ids{"zz", "aa", "mm"};
    std::vector<float> data{1.0f, 1.0f, 1.0f};
    const auto matrix =
        dense::EmbeddingMatrix::from_rows(std::move(ids), std::move(data), 1);
    const std::vector<float> q{1.0f};
    const auto results = dense::search(matrix, q, 3);
    REQUIRE(results.size() == 3);
    CHECK(results[0].passage_id == "aa");
    CHECK(results[1].passage_id == "mm");
    CHECK(results[2].passage_id == "zz");
}

TEST_CASE("search validates inputs") {
    std::mt19937_64 rng(61);
    const auto matrix = random_matrix(rng, 3, 4);
    std::vector<float> wrong{1.0f, 2.0f};
    CHECK_THROWS_AS(dense::search(matrix, wrong, 1), Error);
    std::vector<float> q{1.0f, 1.0f, 1.0f, 1.0f};
    CHECK_THROWS_AS(dense::search(matrix, q, 0), Error);
}

TEST_CASE("retrieval distribution is a stabilized softmax") {
    const std::vector<double> equal{3.5, 3.5, 3.5};
    const auto thirds = dense::retrieval_distribution(equal);
    for (double p : thirds) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));

    const std::vector<double> pair{0.0, std::log(2.0)};
    const auto p = dense::retrieval_distribution(pair);
    CHECK(p[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));

    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("retrieval distribution is shift-invariant and order-preserving") {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> value(-500.0, 500.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> scores(5);
        for (auto& s : scores) s = value(rng);
        const auto base = dense::retrieval_distribution(scores);

        std::vector<double> shifted = scores;
        for (auto& s : shifted) s += 123.456;
        const auto moved = dense::retrieval_distribution(shifted);
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(moved[i] == doctest::Approx(base[i]).epsilon(1e-12));
        }

        const auto arg_scores = static_cast<std::size_t>(
            std::max_element(scores.begin(), scores.end()) - scores.begin());
        const auto arg_probs = static_cast<std::size_t>(
            std::max_element(base.begin(), base.end()) - base.begin());
        CHECK(arg_scores == arg_probs);
    }
}

TEST_CASE("retrieval distribution rejects bad input") {
    CHECK_THROWS_AS(dense::retrieval_distribution({}), Error);
    const std::vector<double> bad{1.0, std::nan("")};
    CHECK_THROWS_AS(dense::retrieval_distribution(bad), Error);
}
