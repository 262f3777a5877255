/*
 * raglab C API — retrieval-and-prompt-composition laboratory.
 *
 * All functions return RAG_OK on success; on failure they return a status
 * code and leave a message readable through rag_last_error() (thread-local).
 * Strings written through char** out-parameters are heap-allocated and must
 * be released with rag_string_free(). Opaque handles are released with
 * their _close() function; every handle is immutable once created and safe
 * to share across threads.
 */

#ifndef RAGLAB_H
#define RAGLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rag_status {
    RAG_OK = 0,
    RAG_ERR_INVALID_ARGUMENT = 1,
    RAG_ERR_PARSE = 2,
    RAG_ERR_IO = 3,
    RAG_ERR_VALIDATION = 4,
    RAG_ERR_RUNTIME = 5,
} rag_status;

typedef struct rag_corpus rag_corpus;
typedef struct rag_sparse_index rag_sparse_index;
typedef struct rag_embeddings rag_embeddings;

const char* rag_version(void);

/* Message for the calling thread's most recent failure ("" if none). */
const char* rag_last_error(void);

void rag_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Corpus                                                              */
/* ------------------------------------------------------------------ */

/*
 * Loads a corpus file (one JSON object per line: id, title, text, optional
 * origin). When gold_path is non-NULL its passages are merged for every
 * query in queries_path that references them; queries_path may be NULL only
 * if gold_path is NULL too.
 */
rag_status rag_corpus_open(const char* corpus_path, const char* gold_path,
                           const char* queries_path, rag_corpus** out);
void rag_corpus_close(rag_corpus* corpus);
int64_t rag_corpus_count(const rag_corpus* corpus);

/* ------------------------------------------------------------------ */
/* Sparse (BM25) index                                                 */
/* ------------------------------------------------------------------ */

rag_status rag_sparse_build(const rag_corpus* corpus, double k1, double b,
                            rag_sparse_index** out);
rag_status rag_sparse_open(const char* path, rag_sparse_index** out);
rag_status rag_sparse_save(const rag_sparse_index* index, const char* path);
void rag_sparse_close(rag_sparse_index* index);
int64_t rag_sparse_doc_count(const rag_sparse_index* index);
int64_t rag_sparse_term_count(const rag_sparse_index* index);

/*
 * Top-k BM25 search. *json_out receives
 *   {"results":[{"passage_id":...,"score":...,"rank":...}, ...]}
 */
rag_status rag_sparse_search(const rag_sparse_index* index,
                             const char* question, int32_t k, char** json_out);

/* ------------------------------------------------------------------ */
/* Dense (flat inner-product) index                                    */
/* ------------------------------------------------------------------ */

/*
 * Converts embeddings from JSONL ({"id": "...", "vector": [...]} per line)
 * into the binary embedding format at rge_path.
 */
rag_status rag_embeddings_import(const char* jsonl_path, const char* rge_path);
rag_status rag_embeddings_open(const char* path, rag_embeddings** out);
void rag_embeddings_close(rag_embeddings* embeddings);
uint32_t rag_embeddings_dim(const rag_embeddings* embeddings);
uint64_t rag_embeddings_count(const rag_embeddings* embeddings);

/* Exact top-k inner-product scan; same JSON shape as rag_sparse_search. */
rag_status rag_dense_search(const rag_embeddings* embeddings,
                            const float* query, uint32_t dim, int32_t k,
                            char** json_out);

/* ------------------------------------------------------------------ */
/* Config-driven experiments                                           */
/* ------------------------------------------------------------------ */

/*
 * The functions below load the JSON config at config_path, deep-merge the
 * optional overrides_json document onto it, resolve relative paths against
 * workdir (NULL = current directory) and validate, reporting every problem
 * at once. A run manifest is accepted wherever a config is.
 */

rag_status rag_config_resolve(const char* config_path,
                              const char* overrides_json, const char* workdir,
                              char** resolved_json_out);

/* Exact prompt bytes the run pipeline would send for one query. */
rag_status rag_compose(const char* config_path, const char* overrides_json,
                       const char* workdir, const char* query_id,
                       char** prompt_out);

/*
 * Labeled top-k retrieval under the config's retriever. query_id NULL runs
 * every query. *json_out receives
 *   {"queries":[{"id":...,"results":[{"passage_id","score","rank","label"}]}]}
 */
rag_status rag_retrieve(const char* config_path, const char* overrides_json,
                        const char* workdir, const char* query_id, int32_t k,
                        char** json_out);

/*
 * Runs the configured experiment (or preset grid), writing report, manifest
 * and table files into the config's output_dir. *summary_json_out receives
 * {"cells":[{"report","manifest","accuracy","n_queries"}...],
 *  "table_csv": "...", ...}.
 */
rag_status rag_run(const char* config_path, const char* overrides_json,
                   const char* workdir, char** summary_json_out);

/* Renders one report file as "csv" or "markdown". */
rag_status rag_report_render(const char* report_path, const char* format,
                             char** text_out);

/* Aggregates every report_*.json under run_dir into the preset's table. */
rag_status rag_report_table(const char* run_dir, const char* format,
                            char** text_out);

#ifdef __cplusplus
}
#endif

#endif /* RAGLAB_H */
