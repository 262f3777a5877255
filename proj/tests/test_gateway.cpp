#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "raglab/error.hpp"
#include "raglab/gateway.hpp"
#include "raglab/prompt.hpp"

using namespace raglab;
using nlohmann::json;
using prompt::LabeledDoc;

namespace {

prompt::PromptPlan plan_with(const std::vector<LabeledDoc>& docs,
                             const QueryRecord& record) {
    prompt::PromptPlan plan;
    plan.instruction = "inst";
    plan.context_docs = docs;
    plan.question = record.question;
    plan.text = prompt::render(plan.instruction, docs, record.question);
    plan.token_count = prompt::approx_counter().count(plan.text);
    plan.budget = 1 << 20;
    return plan;
}

LabeledDoc doc(const std::string& id, const std::string& body,
               DocLabel label) {
    return {testutil::passage(id, body), label};
}

}  // namespace

TEST_CASE("exact_extractive returns the first answer scanning near to far") {
    const QueryRecord record =
        testutil::query("q", "?", {"alpha", "beta"}, "g");
    const auto far_doc = doc("far", "contains beta here", DocLabel::distracting);
    const auto near_doc = doc("near", "contains alpha here", DocLabel::gold);

    const auto result = gateway::oracle_generate(
        plan_with({far_doc, near_doc}, record), record,
        gateway::OracleMode::exact_extractive);
    CHECK(result.text == "alpha");  // near document wins
    CHECK(result.backend == gateway::BackendKind::mock);
}

TEST_CASE("exact_extractive answers unknown when nothing matches") {
    const QueryRecord record = testutil::query("q", "?", {"answer"});
    const auto result = gateway::oracle_generate(
        plan_with({doc("a", "hay", DocLabel::distracting)}, record), record,
        gateway::OracleMode::exact_extractive);
    CHECK(result.text == "unknown");
}

TEST_CASE("gold-only context always extracts the answer") {
    const QueryRecord record = testutil::query("q", "?", {"the answer"});
    const auto result = gateway::oracle_generate(
        plan_with({doc("g", "clearly the answer sits here", DocLabel::gold)},
                  record),
        record, gateway::OracleMode::exact_extractive);
    CHECK(result.text == "the answer");
}

TEST_CASE("first_doc_biased(1.0) parrots the far document") {
    const QueryRecord record = testutil::query("q", "?", {"alpha"}, "g");
    // Distractor far, gold near: the biased oracle answers from the far
    // distractor and gets it wrong.
    const auto far_distractor =
        doc("far", "three little words and more", DocLabel::distracting);
    const auto near_gold = doc("g", "alpha is right", DocLabel::gold);
    const auto result = gateway::oracle_generate(
        plan_with({far_distractor, near_gold}, record), record,
        gateway::OracleMode::first_doc_biased, 1.0, 7);
    CHECK(result.text == "three little words");

    // Gold far: the far document holds the answer, so it comes back.
    const auto flipped = gateway::oracle_generate(
        plan_with({near_gold, far_distractor}, record), record,
        gateway::OracleMode::first_doc_biased, 1.0, 7);
    CHECK(flipped.text == "alpha");
}

TEST_CASE("first_doc_biased(0.0) behaves as exact_extractive") {
    const QueryRecord record = testutil::query("q", "?", {"alpha"}, "g");
    const auto result = gateway::oracle_generate(
        plan_with({doc("far", "nothing", DocLabel::distracting),
                   doc("g", "alpha here", DocLabel::gold)},
                  record),
        record, gateway::OracleMode::first_doc_biased, 0.0, 7);
    CHECK(result.text == "alpha");
}

TEST_CASE("biased draws are deterministic per seed and query") {
    const auto far_doc = doc("far", "far words only", DocLabel::distracting);
    const auto near_doc = doc("g", "alpha here", DocLabel::gold);
    for (int i = 0; i < 30; ++i) {
        const QueryRecord record =
            testutil::query("q" + std::to_string(i), "?", {"alpha"}, "g");
        const auto plan = plan_with({far_doc, near_doc}, record);
        const auto a = gateway::oracle_generate(
            plan, record, gateway::OracleMode::first_doc_biased, 0.5, 11);
        const auto b = gateway::oracle_generate(
            plan, record, gateway::OracleMode::first_doc_biased, 0.5, 11);
        CHECK(a.text == b.text);
    }
}

namespace {

class CountingBackend final : public gateway::Backend {
public:
    gateway::GenerationResult complete(const prompt::PromptPlan&,
                                       const QueryRecord&,
                                       const gateway::GenerationParams&) override {
        ++calls;
        return {"  spaced out  ", gateway::BackendKind::mock, {}};
    }
    gateway::BackendKind kind() const override {
        return gateway::BackendKind::mock;
    }
    int calls = 0;
};

}  // namespace

TEST_CASE("generate pre-checks the context limit without calling out") {
    const QueryRecord record = testutil::query("q", "?", {"x"});
    auto plan = plan_with({doc("a", "body", DocLabel::random)}, record);
    plan.token_count = 2040;

    gateway::GenerationParams params;
    params.max_new_tokens = 15;
    params.model_context_limit = 2048;

    CountingBackend backend;
    CHECK_THROWS_AS(gateway::generate(plan, params, backend, record), Error);
    CHECK(backend.calls == 0);

    plan.token_count = 2033;  // 2033 + 15 == 2048 fits
    const auto result = gateway::generate(plan, params, backend, record);
    CHECK(backend.calls == 1);
    CHECK(result.text == "spaced out");  // trimmed
}

TEST_CASE("mock backend output is identical across runs") {
    const QueryRecord record = testutil::query("q7", "?", {"alpha"}, "g");
    const auto plan = plan_with({doc("far", "junk text here", DocLabel::distracting),
                                 doc("g", "alpha", DocLabel::gold)},
                                record);
    gateway::MockBackend backend(gateway::OracleMode::first_doc_biased, 0.5, 3);
    gateway::GenerationParams params;
    const auto a = gateway::generate(plan, params, backend, record);
    const auto b = gateway::generate(plan, params, backend, record);
    CHECK(a.text == b.text);
}

// ---------------------------------------------------------------------
// HTTP backend against a local server
// ---------------------------------------------------------------------

namespace {

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> complete_calls{0};
    std::atomic<int> fail_first_n{0};

    TestServer() {
        server.Post("/complete", [this](const httplib::Request& req,
                                        httplib::Response& res) {
            complete_calls.fetch_add(1);
            if (fail_first_n.fetch_sub(1) > 0) {
                res.status = 503;
                res.set_content("overloaded", "text/plain");
                return;
            }
            const json body = json::parse(req.body);
            REQUIRE(body.at("temperature").get<int>() == 0);
            const std::string prompt = body.at("prompt").get<std::string>();
            json reply{{"text", "echo:" + std::to_string(prompt.size())}};
            res.set_content(reply.dump(), "application/json");
        });
        server.Post("/garbled", [](const httplib::Request&,
                                   httplib::Response& res) {
            res.set_content("certainly not json", "text/plain");
        });
        server.Post("/tokenize", [](const httplib::Request& req,
                                    httplib::Response& res) {
            const json body = json::parse(req.body);
            const auto text = body.at("text").get<std::string>();
            json reply{{"count", static_cast<int>(text.size())}};
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~TestServer() {
        server.stop();
        thread.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

gateway::HttpConfig fast_config(const TestServer& server) {
    gateway::HttpConfig config;
    config.base_url = server.url();
    config.model = "test-model";
    config.timeout_ms = 5000;
    config.max_retries = 3;
    config.retry_backoff_ms = 0;
    return config;
}

}  // namespace

TEST_CASE("http backend round-trips a completion") {
    TestServer server;
    gateway::HttpBackend backend(fast_config(server));
    const QueryRecord record = testutil::query("q", "?", {"x"});
    const auto plan = plan_with({}, record);
    gateway::GenerationParams params;
    const auto result = gateway::generate(plan, params, backend, record);
    CHECK(result.backend == gateway::BackendKind::http);
    CHECK(result.text == "echo:" + std::to_string(plan.text.size()));
    CHECK(server.complete_calls.load() == 1);
}

TEST_CASE("http backend retries transient 5xx failures") {
    TestServer server;
    server.fail_first_n = 2;
    gateway::HttpBackend backend(fast_config(server));
    const QueryRecord record = testutil::query("q", "?", {"x"});
    const auto plan = plan_with({}, record);
    gateway::GenerationParams params;
    const auto result = gateway::generate(plan, params, backend, record);
    CHECK(result.text.rfind("echo:", 0) == 0);
    CHECK(server.complete_calls.load() == 3);
}

TEST_CASE("http backend gives up after max retries") {
    TestServer server;
    server.fail_first_n = 100;
    auto config = fast_config(server);
    config.max_retries = 2;
    gateway::HttpBackend backend(config);
    const QueryRecord record = testutil::query("q", "?", {"x"});
    const auto plan = plan_with({}, record);
    gateway::GenerationParams params;
    try {
        gateway::generate(plan, params, backend, record);
        FAIL("expected transport failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::runtime);
        CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
    }
    CHECK(server.complete_calls.load() == 3);
}

TEST_CASE("http backend reports malformed bodies with their content") {
    TestServer server;
    auto config = fast_config(server);
    config.base_url = server.url() + "/garbled";  // wrong path prefix trick
    gateway::HttpBackend backend(config);
    const QueryRecord record = testutil::query("q", "?", {"x"});
    const auto plan = plan_with({}, record);
    gateway::GenerationParams params;
    try {
        gateway::generate(plan, params, backend, record);
        FAIL("expected malformed-response error");
    } catch (const Error& e) {
        // /garbled/complete does not exist -> 404 carried with body.
        CHECK(e.kind() == ErrorKind::runtime);
    }
}

TEST_CASE("a non-json 200 body is reported with the raw payload") {
    TestServer server;
    httplib::Client client(server.url());
    // Exercise the parser path directly through the backend by pointing the
    // complete route at garbled output.
    httplib::Server other;
    other.Post("/complete", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("certainly not json", "text/plain");
    });
    const int port = other.bind_to_any_port("127.0.0.1");
    std::thread th([&other] { other.listen_after_bind(); });
    other.wait_until_ready();

    gateway::HttpConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.model = "m";
    config.retry_backoff_ms = 0;
    gateway::HttpBackend backend(config);
    const QueryRecord record = testutil::query("q", "?", {"x"});
    const auto plan = plan_with({}, record);
    gateway::GenerationParams params;
    try {
        gateway::generate(plan, params, backend, record);
        FAIL("expected malformed-response error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("certainly not json") !=
              std::string::npos);
    }
    other.stop();
    th.join();
}

TEST_CASE("the tokenize endpoint backs an exact counter") {
    TestServer server;
    const auto counter = gateway::http_token_counter(fast_config(server));
    CHECK(counter.count("12345") == 5);
    CHECK(counter.name == "http");
}
