#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "raglab/prompt.hpp"
#include "raglab/types.hpp"

namespace raglab::gateway {

struct GenerationParams {
    int max_new_tokens = 15;
    // Greedy is the only decoding mode; backends receive it as temperature 0.
    int model_context_limit = 2048;
};

enum class BackendKind { http, mock };

const char* to_string(BackendKind kind);

struct GenerationResult {
    std::string text;
    BackendKind backend = BackendKind::mock;
    std::chrono::milliseconds latency{0};
};

class Backend {
public:
    virtual ~Backend() = default;

    virtual GenerationResult complete(const prompt::PromptPlan& plan,
                                      const QueryRecord& record,
                                      const GenerationParams& params) = 0;
    virtual BackendKind kind() const = 0;
};

enum class OracleMode { exact_extractive, first_doc_biased };

const char* to_string(OracleMode mode);
std::optional<OracleMode> oracle_mode_from_string(std::string_view s);

/// Deterministic test double for the generator.
///
/// exact_extractive scans context documents from the query outward (last
/// document first) and returns the first answer string it finds, else
/// "unknown". first_doc_biased(p) answers from the document farthest from
/// the query with per-query seeded probability p — returning that
/// document's first three words when it holds no answer — and otherwise
/// behaves as exact_extractive.
GenerationResult oracle_generate(const prompt::PromptPlan& plan,
                                 const QueryRecord& record, OracleMode mode,
                                 double bias_p = 0.0, std::uint64_t seed = 0);

class MockBackend final : public Backend {
public:
    explicit MockBackend(OracleMode mode, double bias_p = 0.0,
                         std::uint64_t seed = 0)
        : mode_(mode), bias_p_(bias_p), seed_(seed) {}

    GenerationResult complete(const prompt::PromptPlan& plan,
                              const QueryRecord& record,
                              const GenerationParams& params) override;
    BackendKind kind() const override { return BackendKind::mock; }

private:
    OracleMode mode_;
    double bias_p_;
    std::uint64_t seed_;
};

struct HttpConfig {
    std::string base_url;  // e.g. "http://127.0.0.1:8080" or ".../v1"
    std::string model;
    std::optional<std::string> auth_header;  // sent as Authorization
    int timeout_ms = 30000;
    int max_retries = 3;
    int retry_backoff_ms = 250;
};

/// Talks to a completion endpoint: POST <base_url>/complete with
/// {model, prompt, max_tokens, temperature: 0}, expecting {text}.
/// Connection failures and 5xx responses are retried with exponential
/// backoff; anything else fails immediately.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpConfig config) : config_(std::move(config)) {}

    GenerationResult complete(const prompt::PromptPlan& plan,
                              const QueryRecord& record,
                              const GenerationParams& params) override;
    BackendKind kind() const override { return BackendKind::http; }

    const HttpConfig& config() const { return config_; }

private:
    HttpConfig config_;
};

/// Exact token counter that delegates to POST <base_url>/tokenize
/// ({text} -> {count}).
prompt::TokenCounter http_token_counter(const HttpConfig& config);

/// Context-limit pre-check plus backend dispatch. A plan whose token count
/// plus max_new_tokens exceeds the model context limit is rejected before
/// any network traffic. Output is trimmed of surrounding whitespace.
GenerationResult generate(const prompt::PromptPlan& plan,
                          const GenerationParams& params, Backend& backend,
                          const QueryRecord& record);

}  // namespace raglab::gateway
