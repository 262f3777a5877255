#include "raglab/gateway.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "raglab/error.hpp"
#include "raglab/taxonomy.hpp"
#include "raglab/text.hpp"
#include "raglab/util.hpp"

namespace raglab::gateway {

using nlohmann::json;

const char* to_string(BackendKind kind) {
    return kind == BackendKind::http ? "http" : "mock";
}

const char* to_string(OracleMode mode) {
    return mode == OracleMode::exact_extractive ? "exact_extractive"
                                                : "first_doc_biased";
}

std::optional<OracleMode> oracle_mode_from_string(std::string_view s) {
    if (s == "exact_extractive") return OracleMode::exact_extractive;
    if (s == "first_doc_biased") return OracleMode::first_doc_biased;
    return std::nullopt;
}

namespace {

std::string trim(std::string s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c); };
    while (!s.empty() && is_space(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && is_space(s[i])) ++i;
    return s.substr(i);
}

/// First answer string (in record order) contained whole-word in `text`.
std::optional<std::string> find_answer(const std::string& text,
                                       const QueryRecord& record) {
    for (const auto& answer : record.answers) {
        if (taxonomy::contains_answer(text, {answer})) return answer;
    }
    return std::nullopt;
}

std::string exact_extractive(const prompt::PromptPlan& plan,
                             const QueryRecord& record) {
    for (auto it = plan.context_docs.rbegin(); it != plan.context_docs.rend();
         ++it) {
        if (auto answer = find_answer(it->first.text, record)) return *answer;
    }
    return "unknown";
}

std::string first_words(const std::string& text, int n) {
    const auto words = text::whitespace_words(text);
    std::string out;
    const int take = std::min<int>(n, static_cast<int>(words.size()));
    for (int i = 0; i < take; ++i) {
        if (i > 0) out.push_back(' ');
        out.append(words[i]);
    }
    return out;
}

// base_url may carry a path prefix; split it off the origin.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const std::size_t host_start =
        scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

json post_json(const HttpConfig& config, const std::string& path,
               const json& body) {
    const auto [origin, prefix] = split_base_url(config.base_url);
    int attempt = 0;
    std::string last_failure;
    while (true) {
        httplib::Client client(origin);
        client.set_connection_timeout(0, config.timeout_ms * 1000LL);
        client.set_read_timeout(config.timeout_ms / 1000,
                                (config.timeout_ms % 1000) * 1000);
        httplib::Headers headers;
        if (config.auth_header) {
            headers.emplace("Authorization", *config.auth_header);
        }
        auto res = client.Post(prefix + path, headers, body.dump(),
                               "application/json");
        const bool transient =
            !res || (res->status >= 500 && res->status < 600);
        if (!transient) {
            if (res->status != 200) {
                fail(ErrorKind::runtime,
                     "endpoint " + origin + prefix + path + " returned status " +
                         std::to_string(res->status) + ": " +
                         res->body.substr(0, 512));
            }
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded() || !parsed.is_object()) {
                fail(ErrorKind::runtime,
                     "endpoint " + origin + prefix + path +
                         " returned a non-JSON body: " + res->body.substr(0, 512));
            }
            return parsed;
        }
        last_failure = res ? "status " + std::to_string(res->status)
                           : "transport error (" +
                                 httplib::to_string(res.error()) + ")";
        if (attempt >= config.max_retries) {
            fail(ErrorKind::runtime,
                 "endpoint " + origin + prefix + path + " failed after " +
                     std::to_string(attempt + 1) + " attempts: " + last_failure);
        }
        const auto delay = std::chrono::milliseconds(
            config.retry_backoff_ms > 0
                ? config.retry_backoff_ms * (1LL << attempt)
                : 0);
        if (delay.count() > 0) std::this_thread::sleep_for(delay);
        ++attempt;
    }
}

}  // namespace

GenerationResult oracle_generate(const prompt::PromptPlan& plan,
                                 const QueryRecord& record, OracleMode mode,
                                 double bias_p, std::uint64_t seed) {
    if (record.answers.empty()) {
        fail(ErrorKind::invalid_argument,
             "query '" + record.id + "' has no answers");
    }
    GenerationResult result;
    result.backend = BackendKind::mock;
    if (mode == OracleMode::first_doc_biased && !plan.context_docs.empty()) {
        std::mt19937_64 rng(util::mix_seed(seed, record.id));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng) < bias_p) {
            const Passage& far_doc = plan.context_docs.front().first;
            if (auto answer = find_answer(far_doc.text, record)) {
                result.text = *answer;
            } else {
                result.text = first_words(far_doc.text, 3);
            }
            return result;
        }
    }
    result.text = exact_extractive(plan, record);
    return result;
}

GenerationResult MockBackend::complete(const prompt::PromptPlan& plan,
                                       const QueryRecord& record,
                                       const GenerationParams&) {
    return oracle_generate(plan, record, mode_, bias_p_, seed_);
}

GenerationResult HttpBackend::complete(const prompt::PromptPlan& plan,
                                       const QueryRecord&,
                                       const GenerationParams& params) {
    json body{{"model", config_.model},
              {"prompt", plan.text},
              {"max_tokens", params.max_new_tokens},
              {"temperature", 0}};
    json reply = post_json(config_, "/complete", body);
    auto it = reply.find("text");
    if (it == reply.end() || !it->is_string()) {
        fail(ErrorKind::runtime,
             "completion endpoint reply lacks a string 'text' field: " +
                 reply.dump().substr(0, 512));
    }
    GenerationResult result;
    result.text = it->get<std::string>();
    result.backend = BackendKind::http;
    return result;
}

prompt::TokenCounter http_token_counter(const HttpConfig& config) {
    prompt::TokenCounter counter;
    counter.name = "http";
    counter.count_fn = [config](std::string_view text) {
        json reply =
            post_json(config, "/tokenize", json{{"text", std::string(text)}});
        auto it = reply.find("count");
        if (it == reply.end() || !it->is_number()) {
            fail(ErrorKind::runtime,
                 "tokenize endpoint reply lacks a numeric 'count' field: " +
                     reply.dump().substr(0, 512));
        }
        return it->get<int>();
    };
    return counter;
}

GenerationResult generate(const prompt::PromptPlan& plan,
                          const GenerationParams& params, Backend& backend,
                          const QueryRecord& record) {
    if (params.max_new_tokens < 1) {
        fail(ErrorKind::invalid_argument, "max_new_tokens must be >= 1");
    }
    if (plan.token_count + params.max_new_tokens > params.model_context_limit) {
        fail(ErrorKind::validation,
             "prompt (" + std::to_string(plan.token_count) + " tokens) plus " +
                 std::to_string(params.max_new_tokens) +
                 " response tokens exceeds the model context limit of " +
                 std::to_string(params.model_context_limit));
    }
    const auto start = std::chrono::steady_clock::now();
    GenerationResult result = backend.complete(plan, record, params);
    result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    result.text = trim(std::move(result.text));
    return result;
}

}  // namespace raglab::gateway
