// raglab command line: thin wrappers over the shared-library C API.
// Exit codes: 0 success, 1 validation/config error, 2 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "raglab.h"

using nlohmann::json;

namespace {

int exit_code_for(rag_status status) {
    switch (status) {
        case RAG_OK: return 0;
        case RAG_ERR_INVALID_ARGUMENT:
        case RAG_ERR_PARSE:
        case RAG_ERR_VALIDATION: return 1;
        default: return 2;
    }
}

int report_failure(rag_status status) {
    std::fprintf(stderr, "error: %s\n", rag_last_error());
    return exit_code_for(status);
}

/// Builds the overrides document from repeated --set key.path=value flags
/// plus any dedicated flags already collected into `overrides`.
bool apply_set_flags(const std::vector<std::string>& sets, json& overrides) {
    for (const auto& entry : sets) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::fprintf(stderr, "error: --set expects key.path=value, got '%s'\n",
                         entry.c_str());
            return false;
        }
        const std::string path = entry.substr(0, eq);
        const std::string raw = entry.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;  // bare strings stay strings

        json* node = &overrides;
        std::size_t start = 0;
        while (true) {
            const auto dot = path.find('.', start);
            const std::string key =
                path.substr(start, dot == std::string::npos ? dot : dot - start);
            if (key.empty()) {
                std::fprintf(stderr, "error: bad --set path '%s'\n", path.c_str());
                return false;
            }
            if (dot == std::string::npos) {
                (*node)[key] = value;
                break;
            }
            if (!node->contains(key) || !(*node)[key].is_object()) {
                (*node)[key] = json::object();
            }
            node = &(*node)[key];
            start = dot + 1;
        }
    }
    return true;
}

void set_path(json& overrides, const char* dotted, const json& value) {
    json* node = &overrides;
    std::string path(dotted);
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key =
            path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) {
            (*node)[key] = json::object();
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { rag_string_free(value); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"raglab — retrieval, prompt composition and evaluation lab"};
    app.require_subcommand(1);
    std::string workdir = ".";
    app.add_option("--workdir", workdir,
                   "Directory relative paths resolve against");

    // --- index-sparse -------------------------------------------------
    auto* index_cmd =
        app.add_subcommand("index-sparse", "Build and save a BM25 index");
    std::string ix_corpus, ix_gold, ix_queries, ix_out;
    double ix_k1 = 0.9, ix_b = 0.4;
    index_cmd->add_option("--corpus", ix_corpus, "Corpus file")->required();
    index_cmd->add_option("--gold", ix_gold, "Gold passages to merge first");
    index_cmd->add_option("--queries", ix_queries,
                          "Query file (needed with --gold)");
    index_cmd->add_option("--out", ix_out, "Index output path")->required();
    index_cmd->add_option("--k1", ix_k1, "BM25 k1");
    index_cmd->add_option("--b", ix_b, "BM25 b");

    // --- embed-import -------------------------------------------------
    auto* embed_cmd = app.add_subcommand(
        "embed-import", "Convert JSONL embeddings to the binary format");
    std::string em_in, em_out;
    embed_cmd->add_option("--in", em_in, "JSONL embeddings")->required();
    embed_cmd->add_option("--out", em_out, "Binary output path")->required();

    // Shared experiment flags.
    std::string config_path;
    std::vector<std::string> set_flags;
    std::string ov_retriever, ov_schema, ov_position, ov_preset, ov_outdir,
        ov_backend;
    int ov_budget = -1, ov_retrieved = -1, ov_distracting = -1, ov_random = -1;
    auto add_experiment_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Experiment config (JSON)")
            ->required();
        cmd->add_option("--set", set_flags,
                        "Override a config key: --set budget.tokens=512");
        cmd->add_option("--retriever", ov_retriever,
                        "Override retriever.kind (none|sparse|dense)");
        cmd->add_option("--schema", ov_schema, "Override the prompt schema");
        cmd->add_option("--gold-position", ov_position,
                        "Override gold_position (near|mid|far)");
        cmd->add_option("--preset", ov_preset, "Override the preset");
        cmd->add_option("--budget", ov_budget, "Override budget.tokens");
        cmd->add_option("--n-retrieved", ov_retrieved,
                        "Override counts.retrieved");
        cmd->add_option("--n-distracting", ov_distracting,
                        "Override counts.distracting");
        cmd->add_option("--n-random", ov_random, "Override counts.random");
        cmd->add_option("--backend", ov_backend,
                        "Override backend.kind (mock|http)");
        cmd->add_option("--output-dir", ov_outdir, "Override output_dir");
    };

    // --- retrieve -----------------------------------------------------
    auto* retrieve_cmd =
        app.add_subcommand("retrieve", "Labeled top-k retrieval for queries");
    std::string rt_query_id;
    int rt_k = 10;
    add_experiment_flags(retrieve_cmd);
    retrieve_cmd->add_option("--query-id", rt_query_id,
                             "Single query id (default: all)");
    retrieve_cmd->add_option("--k", rt_k, "Results per query");

    // --- compose ------------------------------------------------------
    auto* compose_cmd = app.add_subcommand(
        "compose", "Print the exact prompt bytes run would send");
    std::string cp_query_id;
    bool cp_dry_run = false;
    add_experiment_flags(compose_cmd);
    compose_cmd->add_option("--query-id", cp_query_id, "Query id")->required();
    compose_cmd->add_flag("--dry-run", cp_dry_run,
                          "Compose without generating (the only mode)");

    // --- run ------------------------------------------------------------
    auto* run_cmd =
        app.add_subcommand("run", "Run the configured experiment or preset");
    add_experiment_flags(run_cmd);

    // --- report ---------------------------------------------------------
    auto* report_cmd =
        app.add_subcommand("report", "Render a report or a run directory");
    std::string rp_report, rp_dir, rp_format = "csv";
    report_cmd->add_option("--report", rp_report, "Single report JSON file");
    report_cmd->add_option("--run-dir", rp_dir,
                           "Run directory with report_*.json cells");
    report_cmd->add_option("--format", rp_format, "csv or markdown");

    CLI11_PARSE(app, argc, argv);

    json overrides = json::object();
    if (!apply_set_flags(set_flags, overrides)) return 1;
    if (!ov_retriever.empty()) set_path(overrides, "retriever.kind", ov_retriever);
    if (!ov_schema.empty()) set_path(overrides, "schema", ov_schema);
    if (!ov_position.empty()) set_path(overrides, "gold_position", ov_position);
    if (!ov_preset.empty()) set_path(overrides, "preset", ov_preset);
    if (!ov_outdir.empty()) set_path(overrides, "output_dir", ov_outdir);
    if (!ov_backend.empty()) set_path(overrides, "backend.kind", ov_backend);
    if (ov_budget >= 0) set_path(overrides, "budget.tokens", ov_budget);
    if (ov_retrieved >= 0) set_path(overrides, "counts.retrieved", ov_retrieved);
    if (ov_distracting >= 0) {
        set_path(overrides, "counts.distracting", ov_distracting);
    }
    if (ov_random >= 0) set_path(overrides, "counts.random", ov_random);
    const std::string overrides_str = overrides.empty() ? "" : overrides.dump();
    const char* overrides_arg =
        overrides_str.empty() ? nullptr : overrides_str.c_str();

    if (index_cmd->parsed()) {
        rag_corpus* corpus = nullptr;
        auto resolve = [&](const std::string& p) {
            return p.empty() || p.front() == '/' ? p : workdir + "/" + p;
        };
        rag_status status = rag_corpus_open(
            resolve(ix_corpus).c_str(),
            ix_gold.empty() ? nullptr : resolve(ix_gold).c_str(),
            ix_queries.empty() ? nullptr : resolve(ix_queries).c_str(),
            &corpus);
        if (status != RAG_OK) return report_failure(status);
        rag_sparse_index* index = nullptr;
        status = rag_sparse_build(corpus, ix_k1, ix_b, &index);
        if (status == RAG_OK) {
            status = rag_sparse_save(index, resolve(ix_out).c_str());
        }
        if (status == RAG_OK) {
            std::printf("indexed %lld documents, %lld terms -> %s\n",
                        static_cast<long long>(rag_sparse_doc_count(index)),
                        static_cast<long long>(rag_sparse_term_count(index)),
                        ix_out.c_str());
        }
        rag_sparse_close(index);
        rag_corpus_close(corpus);
        return status == RAG_OK ? 0 : report_failure(status);
    }

    if (embed_cmd->parsed()) {
        auto resolve = [&](const std::string& p) {
            return p.empty() || p.front() == '/' ? p : workdir + "/" + p;
        };
        rag_status status = rag_embeddings_import(resolve(em_in).c_str(),
                                                  resolve(em_out).c_str());
        if (status != RAG_OK) return report_failure(status);
        rag_embeddings* embeddings = nullptr;
        status = rag_embeddings_open(resolve(em_out).c_str(), &embeddings);
        if (status != RAG_OK) return report_failure(status);
        std::printf("imported %llu vectors of dim %u -> %s\n",
                    static_cast<unsigned long long>(
                        rag_embeddings_count(embeddings)),
                    rag_embeddings_dim(embeddings), em_out.c_str());
        rag_embeddings_close(embeddings);
        return 0;
    }

    if (retrieve_cmd->parsed()) {
        OwnedString out;
        rag_status status = rag_retrieve(
            config_path.c_str(), overrides_arg, workdir.c_str(),
            rt_query_id.empty() ? nullptr : rt_query_id.c_str(), rt_k,
            &out.value);
        if (status != RAG_OK) return report_failure(status);
        const json doc = json::parse(out.value);
        for (const auto& query : doc.at("queries")) {
            std::printf("query %s\n",
                        query.at("id").get<std::string>().c_str());
            for (const auto& row : query.at("results")) {
                std::printf("  %3d  %-12s  %.6f  %s\n",
                            row.at("rank").get<int>(),
                            row.at("label").get<std::string>().c_str(),
                            row.at("score").get<double>(),
                            row.at("passage_id").get<std::string>().c_str());
            }
        }
        return 0;
    }

    if (compose_cmd->parsed()) {
        (void)cp_dry_run;  // composing never generates; flag kept for parity
        OwnedString out;
        rag_status status =
            rag_compose(config_path.c_str(), overrides_arg, workdir.c_str(),
                        cp_query_id.c_str(), &out.value);
        if (status != RAG_OK) return report_failure(status);
        std::fwrite(out.value, 1, std::strlen(out.value), stdout);
        std::printf("\n");
        return 0;
    }

    if (run_cmd->parsed()) {
        OwnedString out;
        rag_status status = rag_run(config_path.c_str(), overrides_arg,
                                    workdir.c_str(), &out.value);
        if (status != RAG_OK) return report_failure(status);
        const json summary = json::parse(out.value);
        for (const auto& cell : summary.at("cells")) {
            std::printf("cell %-40s accuracy %.4f  (%d queries%s)\n",
                        cell.at("report").get<std::string>().c_str(),
                        cell.at("accuracy").get<double>(),
                        cell.at("n_queries").get<int>(),
                        cell.at("n_budget_limited").get<int>() > 0
                            ? ", budget-limited"
                            : "");
        }
        if (summary.contains("table_csv_path")) {
            std::printf("table -> %s\n",
                        summary.at("table_csv_path").get<std::string>().c_str());
        }
        std::printf("%s", summary.at("table_csv").get<std::string>().c_str());
        return 0;
    }

    if (report_cmd->parsed()) {
        if (rp_report.empty() == rp_dir.empty()) {
            std::fprintf(stderr,
                         "error: report needs exactly one of --report or "
                         "--run-dir\n");
            return 1;
        }
        auto resolve = [&](const std::string& p) {
            return p.empty() || p.front() == '/' ? p : workdir + "/" + p;
        };
        OwnedString out;
        rag_status status =
            rp_report.empty()
                ? rag_report_table(resolve(rp_dir).c_str(), rp_format.c_str(),
                                   &out.value)
                : rag_report_render(resolve(rp_report).c_str(),
                                    rp_format.c_str(), &out.value);
        if (status != RAG_OK) return report_failure(status);
        std::fputs(out.value, stdout);
        return 0;
    }

    return 0;
}
