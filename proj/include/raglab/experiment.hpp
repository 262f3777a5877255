#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "raglab/config.hpp"
#include "raglab/corpus.hpp"
#include "raglab/dense_index.hpp"
#include "raglab/evaluation.hpp"
#include "raglab/prompt.hpp"
#include "raglab/sparse_index.hpp"

namespace raglab::experiment {

/// Everything a run needs loaded into memory: the gold-merged corpus, the
/// query set, whichever retriever the config selects, and the token counter.
struct Workspace {
    Corpus corpus;
    Corpus alt_corpus;
    std::vector<QueryRecord> records;
    std::optional<sparse::SparseIndex> sparse;
    std::optional<dense::EmbeddingMatrix> doc_embeddings;
    std::optional<dense::EmbeddingMatrix> query_embeddings;
    std::vector<std::string> lexicon;
    prompt::TokenCounter counter;

    const QueryRecord& record(std::string_view query_id) const;
};

Workspace load_workspace(const ExperimentConfig& config);

/// Top-k retrieval for one query with taxonomy labels attached.
std::vector<ScoredDoc> retrieve_labeled(const Workspace& ws,
                                        const ExperimentConfig& config,
                                        const QueryRecord& record, int k);

/// The exact prompt the run pipeline would send for this query.
prompt::PromptPlan compose_for_query(const Workspace& ws,
                                     const ExperimentConfig& config,
                                     const QueryRecord& record);

struct RunResult {
    eval::EvalReport report;
    std::filesystem::path report_path;
    std::filesystem::path manifest_path;
};

/// Runs one experiment cell end to end and writes <stem>.json plus a
/// manifest that reproduces the run when fed back as a config.
RunResult run_experiment(const ExperimentConfig& config, const Workspace& ws,
                         const std::string& report_stem = "report",
                         const std::string& manifest_stem = "manifest");

RunResult run_experiment(const ExperimentConfig& config);

struct PresetOutcome {
    std::vector<RunResult> cells;
    std::string table_csv;
    std::string table_markdown;
    std::filesystem::path table_csv_path;   // empty for single-cell runs
    std::filesystem::path table_md_path;
};

/// Dispatches on config.preset: expands the preset's cell grid (or runs the
/// single configured cell) and writes the aggregate table files.
PresetOutcome run(const ExperimentConfig& config);

/// Builds the rows x columns accuracy table from cell report files in a run
/// directory. Cells with budget-dropped documents render empty.
std::string table_from_run_dir(const std::filesystem::path& dir,
                               eval::ReportFormat format);

const std::vector<std::string>& default_lexicon();

}  // namespace raglab::experiment
