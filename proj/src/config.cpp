#include "raglab/config.hpp"

#include <fstream>
#include <set>

#include "raglab/error.hpp"

namespace raglab {

using nlohmann::json;

const char* kDefaultInstruction =
    "You are given a question and you must respond based on the provided "
    "documents. Respond with no more than five tokens.";

const char* to_string(RetrieverKind kind) {
    switch (kind) {
        case RetrieverKind::none: return "none";
        case RetrieverKind::sparse: return "sparse";
        case RetrieverKind::dense: return "dense";
    }
    return "none";
}

json merge_config(json base, const json& overrides) {
    if (!overrides.is_object() || !base.is_object()) return overrides;
    for (const auto& [key, value] : overrides.items()) {
        if (base.contains(key) && base[key].is_object() && value.is_object()) {
            base[key] = merge_config(base[key], value);
        } else {
            base[key] = value;
        }
    }
    return base;
}

namespace {

class Validator {
public:
    explicit Validator(const std::filesystem::path& workdir)
        : workdir_(workdir) {}

    void error(const std::string& path, const std::string& message) {
        errors_.push_back(path + ": " + message);
    }

    void check_keys(const json& obj, const std::string& path,
                    const std::set<std::string>& known) {
        for (const auto& [key, _] : obj.items()) {
            if (!known.count(key)) {
                error(path.empty() ? key : path + "." + key, "unknown key");
            }
        }
    }

    const json* object(const json& obj, const std::string& path,
                       const char* key) {
        auto it = obj.find(key);
        if (it == obj.end()) return nullptr;
        if (!it->is_object()) {
            error(join(path, key), "must be an object");
            return nullptr;
        }
        return &*it;
    }

    std::string str(const json& obj, const std::string& path, const char* key,
                    std::string fallback) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return fallback;
        if (!it->is_string()) {
            error(join(path, key), "must be a string");
            return fallback;
        }
        return it->get<std::string>();
    }

    int integer(const json& obj, const std::string& path, const char* key,
                int fallback) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return fallback;
        if (!it->is_number_integer()) {
            error(join(path, key), "must be an integer");
            return fallback;
        }
        return it->get<int>();
    }

    std::uint64_t seed(const json& obj, const std::string& path,
                       const char* key, std::uint64_t fallback) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return fallback;
        if (!it->is_number_integer() && !it->is_number_unsigned()) {
            error(join(path, key), "must be an integer seed");
            return fallback;
        }
        return it->get<std::uint64_t>();
    }

    double number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return fallback;
        if (!it->is_number()) {
            error(join(path, key), "must be a number");
            return fallback;
        }
        return it->get<double>();
    }

    bool boolean(const json& obj, const std::string& path, const char* key,
                 bool fallback) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return fallback;
        if (!it->is_boolean()) {
            error(join(path, key), "must be a boolean");
            return fallback;
        }
        return it->get<bool>();
    }

    std::filesystem::path path_value(const json& obj, const std::string& path,
                                     const char* key) {
        const std::string s = str(obj, path, key, "");
        if (s.empty()) return {};
        std::filesystem::path p(s);
        return p.is_absolute() ? p : workdir_ / p;
    }

    void require_file(const std::filesystem::path& p,
                      const std::string& path) {
        if (p.empty()) return;
        if (!std::filesystem::exists(p)) {
            error(path, "file not found: " + p.string());
        }
    }

    void finish() const {
        if (errors_.empty()) return;
        std::string message = "invalid configuration (" +
                              std::to_string(errors_.size()) + " problem" +
                              (errors_.size() == 1 ? "" : "s") + ")";
        for (const auto& e : errors_) message += "\n  - " + e;
        fail(ErrorKind::validation, message);
    }

    static std::string join(const std::string& path, const char* key) {
        return path.empty() ? key : path + "." + key;
    }

private:
    std::filesystem::path workdir_;
    std::vector<std::string> errors_;
};

}  // namespace

ExperimentConfig config_from_json(const json& input,
                                  const std::filesystem::path& workdir) {
    json doc = input;
    if (doc.is_object() && doc.contains("resolved_config")) {
        doc = doc.at("resolved_config");  // a manifest re-runs its experiment
    }
    if (!doc.is_object()) {
        fail(ErrorKind::validation, "configuration must be a JSON object");
    }

    Validator v(workdir);
    v.check_keys(doc, "",
                 {"preset", "paths", "retriever", "schema", "gold_position",
                  "counts", "noise", "budget", "generation", "backend",
                  "seeds", "eval", "concurrency", "instruction", "output_dir",
                  "grid"});

    ExperimentConfig c;
    c.preset = v.str(doc, "", "preset", "");
    static const std::set<std::string> kPresets{
        "", "distracting-sweep", "gold-position", "noise-sweep",
        "rag-in-practice", "retriever-tradeoff"};
    if (!kPresets.count(c.preset)) {
        v.error("preset", "unknown preset '" + c.preset + "'");
    }

    if (const json* paths = v.object(doc, "", "paths")) {
        v.check_keys(*paths, "paths",
                     {"corpus", "queries", "gold", "alt_corpus",
                      "doc_embeddings", "query_embeddings", "lexicon",
                      "sparse_index"});
        c.paths.corpus = v.path_value(*paths, "paths", "corpus");
        c.paths.queries = v.path_value(*paths, "paths", "queries");
        c.paths.gold = v.path_value(*paths, "paths", "gold");
        c.paths.alt_corpus = v.path_value(*paths, "paths", "alt_corpus");
        c.paths.doc_embeddings = v.path_value(*paths, "paths", "doc_embeddings");
        c.paths.query_embeddings =
            v.path_value(*paths, "paths", "query_embeddings");
        c.paths.lexicon = v.path_value(*paths, "paths", "lexicon");
        c.paths.sparse_index = v.path_value(*paths, "paths", "sparse_index");
    }
    if (c.paths.corpus.empty()) v.error("paths.corpus", "required");
    if (c.paths.queries.empty()) v.error("paths.queries", "required");
    v.require_file(c.paths.corpus, "paths.corpus");
    v.require_file(c.paths.queries, "paths.queries");
    v.require_file(c.paths.gold, "paths.gold");
    v.require_file(c.paths.alt_corpus, "paths.alt_corpus");
    v.require_file(c.paths.doc_embeddings, "paths.doc_embeddings");
    v.require_file(c.paths.query_embeddings, "paths.query_embeddings");
    v.require_file(c.paths.lexicon, "paths.lexicon");
    v.require_file(c.paths.sparse_index, "paths.sparse_index");

    if (const json* retriever = v.object(doc, "", "retriever")) {
        v.check_keys(*retriever, "retriever", {"kind", "k1", "b"});
        const std::string kind = v.str(*retriever, "retriever", "kind", "none");
        if (kind == "none") c.retriever = RetrieverKind::none;
        else if (kind == "sparse") c.retriever = RetrieverKind::sparse;
        else if (kind == "dense") c.retriever = RetrieverKind::dense;
        else v.error("retriever.kind", "must be none, sparse or dense");
        c.bm25.k1 = v.number(*retriever, "retriever", "k1", c.bm25.k1);
        c.bm25.b = v.number(*retriever, "retriever", "b", c.bm25.b);
        if (c.bm25.k1 < 0) v.error("retriever.k1", "must be >= 0");
        if (c.bm25.b < 0 || c.bm25.b > 1) {
            v.error("retriever.b", "must be in [0, 1]");
        }
    }

    c.schema = v.str(doc, "", "schema", c.schema);
    std::optional<prompt::PromptSchema> schema;
    try {
        schema = prompt::PromptSchema::parse(c.schema);
    } catch (const Error& e) {
        v.error("schema", e.what());
    }

    const std::string position = v.str(doc, "", "gold_position", "");
    if (!position.empty()) {
        c.gold_position = prompt::gold_position_from_string(position);
        if (!c.gold_position) {
            v.error("gold_position", "must be near, mid or far");
        }
    }

    if (const json* counts = v.object(doc, "", "counts")) {
        v.check_keys(*counts, "counts", {"retrieved", "distracting", "random"});
        c.n_retrieved = v.integer(*counts, "counts", "retrieved", 0);
        c.n_distracting = v.integer(*counts, "counts", "distracting", 0);
        c.n_random = v.integer(*counts, "counts", "random", 0);
        if (c.n_retrieved < 0) v.error("counts.retrieved", "must be >= 0");
        if (c.n_distracting < 0) v.error("counts.distracting", "must be >= 0");
        if (c.n_random < 0) v.error("counts.random", "must be >= 0");
    }

    if (const json* noise = v.object(doc, "", "noise")) {
        v.check_keys(*noise, "noise",
                     {"kind", "pad_to_budget", "pad_layout", "nonsense_words"});
        const std::string kind =
            v.str(*noise, "noise", "kind", "same_corpus");
        if (auto parsed = prompt::noise_kind_from_string(kind)) {
            c.noise_kind = *parsed;
        } else {
            v.error("noise.kind",
                    "must be same_corpus, alternate_corpus or nonsense_words");
        }
        c.pad_to_budget = v.boolean(*noise, "noise", "pad_to_budget", false);
        const std::string layout =
            v.str(*noise, "noise", "pad_layout", "before_context");
        if (auto parsed = prompt::pad_layout_from_string(layout)) {
            c.pad_layout = *parsed;
        } else {
            v.error("noise.pad_layout",
                    "must be before_context, after_context or split_mid");
        }
        c.nonsense_words = v.integer(*noise, "noise", "nonsense_words", 100);
        if (c.nonsense_words < 1) v.error("noise.nonsense_words", "must be >= 1");
    }

    if (const json* generation = v.object(doc, "", "generation")) {
        v.check_keys(*generation, "generation",
                     {"max_new_tokens", "model_context_limit"});
        c.generation.max_new_tokens =
            v.integer(*generation, "generation", "max_new_tokens", 15);
        c.generation.model_context_limit = v.integer(
            *generation, "generation", "model_context_limit", 2048);
        if (c.generation.max_new_tokens < 1) {
            v.error("generation.max_new_tokens", "must be >= 1");
        }
        if (c.generation.model_context_limit < 2) {
            v.error("generation.model_context_limit", "must be >= 2");
        }
    }

    if (const json* budget = v.object(doc, "", "budget")) {
        v.check_keys(*budget, "budget", {"tokens", "counter"});
        c.budget_tokens = v.integer(*budget, "budget", "tokens", 0);
        c.counter = v.str(*budget, "budget", "counter", "approx");
        if (c.counter != "approx" && c.counter != "http") {
            v.error("budget.counter", "must be approx or http");
        }
        if (c.budget_tokens < 0) v.error("budget.tokens", "must be >= 0");
    }
    if (c.budget_tokens == 0) {
        c.budget_tokens =
            c.generation.model_context_limit - c.generation.max_new_tokens;
    }
    if (c.budget_tokens + c.generation.max_new_tokens >
        c.generation.model_context_limit) {
        v.error("budget.tokens",
                "budget plus max_new_tokens exceeds the model context limit");
    }

    if (const json* backend = v.object(doc, "", "backend")) {
        v.check_keys(*backend, "backend", {"kind", "mock", "http"});
        const std::string kind = v.str(*backend, "backend", "kind", "mock");
        if (kind == "mock") c.backend = gateway::BackendKind::mock;
        else if (kind == "http") c.backend = gateway::BackendKind::http;
        else v.error("backend.kind", "must be mock or http");
        if (const json* mock = v.object(*backend, "backend", "mock")) {
            v.check_keys(*mock, "backend.mock", {"mode", "p"});
            const std::string mode =
                v.str(*mock, "backend.mock", "mode", "exact_extractive");
            if (auto parsed = gateway::oracle_mode_from_string(mode)) {
                c.mock_mode = *parsed;
            } else {
                v.error("backend.mock.mode",
                        "must be exact_extractive or first_doc_biased");
            }
            c.mock_bias_p = v.number(*mock, "backend.mock", "p", 1.0);
            if (c.mock_bias_p < 0.0 || c.mock_bias_p > 1.0) {
                v.error("backend.mock.p", "must be in [0, 1]");
            }
        }
        if (const json* http = v.object(*backend, "backend", "http")) {
            v.check_keys(*http, "backend.http",
                         {"base_url", "model", "auth_header", "timeout_ms",
                          "max_retries", "retry_backoff_ms"});
            c.http.base_url = v.str(*http, "backend.http", "base_url", "");
            c.http.model = v.str(*http, "backend.http", "model", "");
            const std::string auth =
                v.str(*http, "backend.http", "auth_header", "");
            if (!auth.empty()) c.http.auth_header = auth;
            c.http.timeout_ms =
                v.integer(*http, "backend.http", "timeout_ms", 30000);
            c.http.max_retries =
                v.integer(*http, "backend.http", "max_retries", 3);
            c.http.retry_backoff_ms =
                v.integer(*http, "backend.http", "retry_backoff_ms", 250);
            if (c.http.max_retries < 0) {
                v.error("backend.http.max_retries", "must be >= 0");
            }
        }
    }
    if (c.backend == gateway::BackendKind::http && c.http.base_url.empty()) {
        v.error("backend.http.base_url", "required for the http backend");
    }
    if (c.counter == "http" && c.http.base_url.empty()) {
        v.error("budget.counter",
                "http counter needs backend.http.base_url to be set");
    }

    if (const json* seeds = v.object(doc, "", "seeds")) {
        v.check_keys(*seeds, "seeds", {"sampling", "noise", "mock"});
        c.seed_sampling = v.seed(*seeds, "seeds", "sampling", c.seed_sampling);
        c.seed_noise = v.seed(*seeds, "seeds", "noise", c.seed_noise);
        c.seed_mock = v.seed(*seeds, "seeds", "mock", c.seed_mock);
    }

    if (const json* eval = v.object(doc, "", "eval")) {
        v.check_keys(*eval, "eval", {"topk"});
        if (auto it = eval->find("topk"); it != eval->end()) {
            if (!it->is_array()) {
                v.error("eval.topk", "must be an array of integers");
            } else {
                for (const auto& k : *it) {
                    if (!k.is_number_integer() || k.get<int>() < 1) {
                        v.error("eval.topk", "entries must be integers >= 1");
                        break;
                    }
                    c.eval_topk.push_back(k.get<int>());
                }
            }
        }
    }

    if (const json* concurrency = v.object(doc, "", "concurrency")) {
        v.check_keys(*concurrency, "concurrency", {"max_in_flight"});
        c.max_in_flight =
            v.integer(*concurrency, "concurrency", "max_in_flight", 4);
        if (c.max_in_flight < 1) {
            v.error("concurrency.max_in_flight", "must be >= 1");
        }
    }

    c.instruction = v.str(doc, "", "instruction", c.instruction);
    c.output_dir = v.path_value(doc, "", "output_dir");

    if (const json* grid = v.object(doc, "", "grid")) {
        v.check_keys(*grid, "grid", {"row", "col"});
        c.grid_row = v.str(*grid, "grid", "row", "");
        c.grid_col = v.str(*grid, "grid", "col", "");
    }

    // Cross-field checks.
    if (schema) {
        const bool needs_retrieval = schema->has(prompt::SlotClass::retrieved) ||
                                     schema->has(prompt::SlotClass::distracting);
        if (needs_retrieval && c.retriever == RetrieverKind::none) {
            v.error("retriever.kind",
                    "schema '" + c.schema + "' needs retrieved documents");
        }
        if (!schema->has(prompt::SlotClass::gold) && c.gold_position) {
            v.error("gold_position",
                    "set, but schema '" + c.schema + "' has no gold slot");
        }
    }
    if (c.retriever == RetrieverKind::dense) {
        if (c.paths.doc_embeddings.empty()) {
            v.error("paths.doc_embeddings", "required for the dense retriever");
        }
        if (c.paths.query_embeddings.empty()) {
            v.error("paths.query_embeddings",
                    "required for the dense retriever");
        }
    }
    if (c.retriever == RetrieverKind::none && !c.eval_topk.empty()) {
        v.error("eval.topk", "needs a retriever");
    }
    if (c.pad_to_budget && c.n_random > 0) {
        v.error("counts.random",
                "must be 0 when noise.pad_to_budget is set; padding fills "
                "the random slot");
    }
    const bool uses_noise = c.pad_to_budget || c.n_random > 0;
    if (uses_noise && c.noise_kind == prompt::NoiseKind::alternate_corpus &&
        c.paths.alt_corpus.empty()) {
        v.error("paths.alt_corpus", "required for alternate_corpus noise");
    }

    v.finish();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& file,
                             const json& overrides,
                             const std::filesystem::path& workdir) {
    std::ifstream in(file);
    if (!in) {
        fail(ErrorKind::io, "cannot open config file '" + file.string() + "'");
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        fail(ErrorKind::parse,
             "config file '" + file.string() + "' is not valid JSON");
    }
    if (doc.is_object() && doc.contains("resolved_config")) {
        doc = doc.at("resolved_config");
    }
    if (!overrides.is_null() && !overrides.empty()) {
        doc = merge_config(doc, overrides);
    }
    return config_from_json(doc, workdir);
}

json ExperimentConfig::to_json() const {
    json doc;
    doc["preset"] = preset;
    doc["paths"] = json{{"corpus", paths.corpus.string()},
                        {"queries", paths.queries.string()},
                        {"gold", paths.gold.string()},
                        {"alt_corpus", paths.alt_corpus.string()},
                        {"doc_embeddings", paths.doc_embeddings.string()},
                        {"query_embeddings", paths.query_embeddings.string()},
                        {"lexicon", paths.lexicon.string()},
                        {"sparse_index", paths.sparse_index.string()}};
    doc["retriever"] = json{{"kind", to_string(retriever)},
                            {"k1", bm25.k1},
                            {"b", bm25.b}};
    doc["schema"] = schema;
    doc["gold_position"] =
        gold_position ? prompt::to_string(*gold_position) : "";
    doc["counts"] = json{{"retrieved", n_retrieved},
                         {"distracting", n_distracting},
                         {"random", n_random}};
    doc["noise"] = json{{"kind", prompt::to_string(noise_kind)},
                        {"pad_to_budget", pad_to_budget},
                        {"pad_layout", prompt::to_string(pad_layout)},
                        {"nonsense_words", nonsense_words}};
    doc["budget"] = json{{"tokens", budget_tokens}, {"counter", counter}};
    doc["generation"] =
        json{{"max_new_tokens", generation.max_new_tokens},
             {"model_context_limit", generation.model_context_limit}};
    doc["backend"] =
        json{{"kind", gateway::to_string(backend)},
             {"mock", json{{"mode", gateway::to_string(mock_mode)},
                           {"p", mock_bias_p}}},
             {"http", json{{"base_url", http.base_url},
                           {"model", http.model},
                           {"auth_header", http.auth_header.value_or("")},
                           {"timeout_ms", http.timeout_ms},
                           {"max_retries", http.max_retries},
                           {"retry_backoff_ms", http.retry_backoff_ms}}}};
    doc["seeds"] = json{{"sampling", seed_sampling},
                        {"noise", seed_noise},
                        {"mock", seed_mock}};
    doc["eval"] = json{{"topk", eval_topk}};
    doc["concurrency"] = json{{"max_in_flight", max_in_flight}};
    doc["instruction"] = instruction;
    doc["output_dir"] = output_dir.string();
    doc["grid"] = json{{"row", grid_row}, {"col", grid_col}};
    return doc;
}

}  // namespace raglab
