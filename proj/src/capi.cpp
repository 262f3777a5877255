#include "raglab.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "raglab/config.hpp"
#include "raglab/corpus.hpp"
#include "raglab/dense_index.hpp"
#include "raglab/error.hpp"
#include "raglab/evaluation.hpp"
#include "raglab/experiment.hpp"
#include "raglab/sparse_index.hpp"
#include "raglab/version.hpp"

using nlohmann::json;

struct rag_corpus {
    raglab::Corpus corpus;
};

struct rag_sparse_index {
    raglab::sparse::SparseIndex index;
};

struct rag_embeddings {
    raglab::dense::EmbeddingMatrix matrix;
};

namespace {

thread_local std::string g_last_error;

rag_status status_of(const raglab::Error& e) {
    switch (e.kind()) {
        case raglab::ErrorKind::invalid_argument:
            return RAG_ERR_INVALID_ARGUMENT;
        case raglab::ErrorKind::parse: return RAG_ERR_PARSE;
        case raglab::ErrorKind::io: return RAG_ERR_IO;
        case raglab::ErrorKind::validation: return RAG_ERR_VALIDATION;
        case raglab::ErrorKind::runtime: return RAG_ERR_RUNTIME;
    }
    return RAG_ERR_RUNTIME;
}

template <typename Fn>
rag_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return RAG_OK;
    } catch (const raglab::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RAG_ERR_RUNTIME;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(::operator new(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool ok, const char* message) {
    if (!ok) {
        raglab::fail(raglab::ErrorKind::invalid_argument, message);
    }
}

json scored_to_json(const std::vector<raglab::ScoredDoc>& docs,
                    bool with_labels) {
    json results = json::array();
    for (const auto& d : docs) {
        json row{{"passage_id", d.passage_id},
                 {"score", d.score},
                 {"rank", d.rank}};
        if (with_labels) {
            row["label"] = d.label ? raglab::to_string(*d.label) : "";
        }
        results.push_back(std::move(row));
    }
    return results;
}

raglab::ExperimentConfig load_config_args(const char* config_path,
                                          const char* overrides_json,
                                          const char* workdir) {
    require(config_path != nullptr, "config_path must not be NULL");
    json overrides = json::object();
    if (overrides_json && overrides_json[0] != '\0') {
        overrides = json::parse(overrides_json, nullptr, false);
        if (overrides.is_discarded() || !overrides.is_object()) {
            raglab::fail(raglab::ErrorKind::parse,
                         "overrides must be a JSON object");
        }
    }
    const std::filesystem::path wd =
        workdir && workdir[0] != '\0' ? std::filesystem::path(workdir)
                                      : std::filesystem::current_path();
    std::filesystem::path file(config_path);
    if (file.is_relative()) file = wd / file;
    return raglab::load_config(file, overrides, wd);
}

}  // namespace

extern "C" {

const char* rag_version(void) { return raglab::kVersion; }

const char* rag_last_error(void) { return g_last_error.c_str(); }

void rag_string_free(char* s) { ::operator delete(s); }

rag_status rag_corpus_open(const char* corpus_path, const char* gold_path,
                           const char* queries_path, rag_corpus** out) {
    return guarded([&] {
        require(corpus_path != nullptr, "corpus_path must not be NULL");
        require(out != nullptr, "out must not be NULL");
        require(gold_path == nullptr || queries_path != nullptr,
                "gold_path needs queries_path for gold references");
        raglab::Corpus corpus = raglab::ingest_corpus(corpus_path);
        if (queries_path) {
            auto records = raglab::load_queries(queries_path);
            raglab::Corpus gold;
            if (gold_path) gold = raglab::ingest_corpus(gold_path);
            corpus = raglab::merge_gold(std::move(corpus), records, gold);
        }
        *out = new rag_corpus{std::move(corpus)};
    });
}

void rag_corpus_close(rag_corpus* corpus) { delete corpus; }

int64_t rag_corpus_count(const rag_corpus* corpus) {
    return corpus ? static_cast<int64_t>(corpus->corpus.document_count()) : 0;
}

rag_status rag_sparse_build(const rag_corpus* corpus, double k1, double b,
                            rag_sparse_index** out) {
    return guarded([&] {
        require(corpus != nullptr, "corpus must not be NULL");
        require(out != nullptr, "out must not be NULL");
        *out = new rag_sparse_index{raglab::sparse::SparseIndex::build(
            corpus->corpus, raglab::sparse::Bm25Params{k1, b})};
    });
}

rag_status rag_sparse_open(const char* path, rag_sparse_index** out) {
    return guarded([&] {
        require(path != nullptr, "path must not be NULL");
        require(out != nullptr, "out must not be NULL");
        *out = new rag_sparse_index{raglab::sparse::SparseIndex::load(path)};
    });
}

rag_status rag_sparse_save(const rag_sparse_index* index, const char* path) {
    return guarded([&] {
        require(index != nullptr, "index must not be NULL");
        require(path != nullptr, "path must not be NULL");
        index->index.save(path);
    });
}

void rag_sparse_close(rag_sparse_index* index) { delete index; }

int64_t rag_sparse_doc_count(const rag_sparse_index* index) {
    return index ? static_cast<int64_t>(index->index.doc_count()) : 0;
}

int64_t rag_sparse_term_count(const rag_sparse_index* index) {
    return index ? static_cast<int64_t>(index->index.term_count()) : 0;
}

rag_status rag_sparse_search(const rag_sparse_index* index,
                             const char* question, int32_t k,
                             char** json_out) {
    return guarded([&] {
        require(index != nullptr, "index must not be NULL");
        require(question != nullptr, "question must not be NULL");
        require(json_out != nullptr, "json_out must not be NULL");
        const auto results = index->index.search(question, k);
        *json_out =
            dup_string(json{{"results", scored_to_json(results, false)}}.dump());
    });
}

rag_status rag_embeddings_import(const char* jsonl_path,
                                 const char* rge_path) {
    return guarded([&] {
        require(jsonl_path != nullptr, "jsonl_path must not be NULL");
        require(rge_path != nullptr, "rge_path must not be NULL");
        std::ifstream in(jsonl_path);
        if (!in) {
            raglab::fail(raglab::ErrorKind::io,
                         std::string("cannot open '") + jsonl_path + "'");
        }
        std::vector<std::string> ids;
        std::vector<float> data;
        std::uint32_t dim = 0;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json obj = json::parse(line, nullptr, false);
            if (obj.is_discarded() || !obj.is_object() ||
                !obj.contains("id") || !obj["id"].is_string() ||
                !obj.contains("vector") || !obj["vector"].is_array()) {
                raglab::fail(raglab::ErrorKind::parse,
                             std::string(jsonl_path) + ":" +
                                 std::to_string(line_no) +
                                 ": expected {\"id\": ..., \"vector\": [...]}");
            }
            const auto& vec = obj["vector"];
            if (dim == 0) {
                dim = static_cast<std::uint32_t>(vec.size());
                if (dim == 0) {
                    raglab::fail(raglab::ErrorKind::parse,
                                 std::string(jsonl_path) + ":" +
                                     std::to_string(line_no) +
                                     ": vector must not be empty");
                }
            } else if (vec.size() != dim) {
                raglab::fail(raglab::ErrorKind::parse,
                             std::string(jsonl_path) + ":" +
                                 std::to_string(line_no) +
                                 ": vector has " + std::to_string(vec.size()) +
                                 " components, expected " +
                                 std::to_string(dim));
            }
            for (const auto& v : vec) {
                if (!v.is_number()) {
                    raglab::fail(raglab::ErrorKind::parse,
                                 std::string(jsonl_path) + ":" +
                                     std::to_string(line_no) +
                                     ": vector components must be numbers");
                }
                data.push_back(v.get<float>());
            }
            ids.push_back(obj["id"].get<std::string>());
        }
        auto matrix = raglab::dense::EmbeddingMatrix::from_rows(
            std::move(ids), std::move(data), dim == 0 ? 1 : dim);
        matrix.save(rge_path);
    });
}

rag_status rag_embeddings_open(const char* path, rag_embeddings** out) {
    return guarded([&] {
        require(path != nullptr, "path must not be NULL");
        require(out != nullptr, "out must not be NULL");
        *out = new rag_embeddings{raglab::dense::EmbeddingMatrix::load(path)};
    });
}

void rag_embeddings_close(rag_embeddings* embeddings) { delete embeddings; }

uint32_t rag_embeddings_dim(const rag_embeddings* embeddings) {
    return embeddings ? embeddings->matrix.dim() : 0;
}

uint64_t rag_embeddings_count(const rag_embeddings* embeddings) {
    return embeddings ? embeddings->matrix.count() : 0;
}

rag_status rag_dense_search(const rag_embeddings* embeddings,
                            const float* query, uint32_t dim, int32_t k,
                            char** json_out) {
    return guarded([&] {
        require(embeddings != nullptr, "embeddings must not be NULL");
        require(query != nullptr, "query must not be NULL");
        require(json_out != nullptr, "json_out must not be NULL");
        const auto results = raglab::dense::search(
            embeddings->matrix, std::span<const float>(query, dim), k);
        *json_out =
            dup_string(json{{"results", scored_to_json(results, false)}}.dump());
    });
}

rag_status rag_config_resolve(const char* config_path,
                              const char* overrides_json, const char* workdir,
                              char** resolved_json_out) {
    return guarded([&] {
        require(resolved_json_out != nullptr,
                "resolved_json_out must not be NULL");
        const auto config =
            load_config_args(config_path, overrides_json, workdir);
        *resolved_json_out = dup_string(config.to_json().dump(2) + "\n");
    });
}

rag_status rag_compose(const char* config_path, const char* overrides_json,
                       const char* workdir, const char* query_id,
                       char** prompt_out) {
    return guarded([&] {
        require(query_id != nullptr, "query_id must not be NULL");
        require(prompt_out != nullptr, "prompt_out must not be NULL");
        const auto config =
            load_config_args(config_path, overrides_json, workdir);
        const auto ws = raglab::experiment::load_workspace(config);
        const auto plan = raglab::experiment::compose_for_query(
            ws, config, ws.record(query_id));
        *prompt_out = dup_string(plan.text);
    });
}

rag_status rag_retrieve(const char* config_path, const char* overrides_json,
                        const char* workdir, const char* query_id, int32_t k,
                        char** json_out) {
    return guarded([&] {
        require(json_out != nullptr, "json_out must not be NULL");
        const auto config =
            load_config_args(config_path, overrides_json, workdir);
        const auto ws = raglab::experiment::load_workspace(config);
        json queries = json::array();
        auto run_one = [&](const raglab::QueryRecord& record) {
            const auto results =
                raglab::experiment::retrieve_labeled(ws, config, record, k);
            queries.push_back(json{{"id", record.id},
                                   {"results", scored_to_json(results, true)}});
        };
        if (query_id) {
            run_one(ws.record(query_id));
        } else {
            for (const auto& record : ws.records) run_one(record);
        }
        *json_out = dup_string(json{{"queries", queries}}.dump(2) + "\n");
    });
}

rag_status rag_run(const char* config_path, const char* overrides_json,
                   const char* workdir, char** summary_json_out) {
    return guarded([&] {
        require(summary_json_out != nullptr,
                "summary_json_out must not be NULL");
        const auto config =
            load_config_args(config_path, overrides_json, workdir);
        const auto outcome = raglab::experiment::run(config);
        json cells = json::array();
        for (const auto& cell : outcome.cells) {
            cells.push_back(json{{"report", cell.report_path.string()},
                                 {"manifest", cell.manifest_path.string()},
                                 {"accuracy", cell.report.accuracy},
                                 {"n_queries", cell.report.n_queries},
                                 {"n_budget_limited",
                                  cell.report.n_budget_limited}});
        }
        json summary{{"cells", cells},
                     {"table_csv", outcome.table_csv},
                     {"table_markdown", outcome.table_markdown}};
        if (!outcome.table_csv_path.empty()) {
            summary["table_csv_path"] = outcome.table_csv_path.string();
            summary["table_md_path"] = outcome.table_md_path.string();
        }
        *summary_json_out = dup_string(summary.dump(2) + "\n");
    });
}

rag_status rag_report_render(const char* report_path, const char* format,
                             char** text_out) {
    return guarded([&] {
        require(report_path != nullptr, "report_path must not be NULL");
        require(format != nullptr, "format must not be NULL");
        require(text_out != nullptr, "text_out must not be NULL");
        const auto fmt = raglab::eval::report_format_from_string(format);
        if (!fmt) {
            raglab::fail(raglab::ErrorKind::invalid_argument,
                         "format must be csv or markdown");
        }
        std::ifstream in(report_path);
        if (!in) {
            raglab::fail(raglab::ErrorKind::io,
                         std::string("cannot open '") + report_path + "'");
        }
        json doc = json::parse(in, nullptr, false);
        if (doc.is_discarded()) {
            raglab::fail(raglab::ErrorKind::parse,
                         std::string("'") + report_path +
                             "' is not valid JSON");
        }
        const auto report = raglab::eval::EvalReport::from_json(doc);
        *text_out = dup_string(raglab::eval::render_report(report, *fmt));
    });
}

rag_status rag_report_table(const char* run_dir, const char* format,
                            char** text_out) {
    return guarded([&] {
        require(run_dir != nullptr, "run_dir must not be NULL");
        require(format != nullptr, "format must not be NULL");
        require(text_out != nullptr, "text_out must not be NULL");
        const auto fmt = raglab::eval::report_format_from_string(format);
        if (!fmt) {
            raglab::fail(raglab::ErrorKind::invalid_argument,
                         "format must be csv or markdown");
        }
        *text_out = dup_string(
            raglab::experiment::table_from_run_dir(run_dir, *fmt));
    });
}

}  // extern "C"
