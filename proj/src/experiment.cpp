#include "raglab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "raglab/error.hpp"
#include "raglab/gateway.hpp"
#include "raglab/taxonomy.hpp"
#include "raglab/util.hpp"
#include "raglab/version.hpp"

namespace raglab::experiment {

using nlohmann::json;

const std::vector<std::string>& default_lexicon() {
    static const std::vector<std::string> words{
        "apple",   "brick",   "candle", "dragon", "ember",   "forest",
        "garden",  "harbor",  "island", "jigsaw", "kettle",  "lantern",
        "meadow",  "needle",  "orchid", "pebble", "quiver",  "ribbon",
        "saddle",  "timber",  "umbrella", "violet", "walnut", "xylophone",
        "yonder",  "zephyr",  "anchor", "bucket", "copper",  "drizzle",
        "engine",  "feather", "glacier", "hammer", "ivory",  "jungle",
        "kitten",  "ladder",  "marble", "nutmeg", "oyster",  "pocket",
        "quartz",  "rocket",  "shadow", "tunnel", "urchin",  "velvet",
        "whisker", "yarn",    "zipper", "basket", "cinder",  "dome",
        "easel",   "fiddle",  "grove",  "hinge",  "ingot",   "jelly",
        "knoll",   "lagoon",  "mitten", "nectar"};
    return words;
}

const QueryRecord& Workspace::record(std::string_view query_id) const {
    for (const auto& r : records) {
        if (r.id == query_id) return r;
    }
    fail(ErrorKind::invalid_argument,
         "unknown query id '" + std::string(query_id) + "'");
}

namespace {

std::vector<std::string> load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::io, "cannot open lexicon '" + path.string() + "'");
    }
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (!line.empty()) words.push_back(line);
    }
    if (words.empty()) {
        fail(ErrorKind::validation,
             "lexicon '" + path.string() + "' contains no words");
    }
    return words;
}

std::string sanitize_label(const std::string& label) {
    std::string out;
    for (char c : label) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
    }
    return out.empty() ? "x" : out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::io, "cannot write '" + path.string() + "'");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        fail(ErrorKind::io, "short write to '" + path.string() + "'");
    }
}

/// Grid column comparator: near < mid < far, numeric labels ascending,
/// "fill" after numbers, anything else lexicographic.
int label_rank(const std::string& label) {
    if (label == "near") return 0;
    if (label == "mid") return 1;
    if (label == "far") return 2;
    return 3;
}

bool numeric_label(const std::string& s, long& value) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    value = std::stol(s);
    return true;
}

bool label_less(const std::string& a, const std::string& b) {
    const int ra = label_rank(a);
    const int rb = label_rank(b);
    if (ra != 3 || rb != 3) return ra < rb;
    long na = 0;
    long nb = 0;
    const bool a_num = numeric_label(a, na);
    const bool b_num = numeric_label(b, nb);
    if (a_num && b_num) return na < nb;
    if (a_num != b_num) return a_num;  // numbers before words like "fill"
    return a < b;
}

struct GridCell {
    std::string row;
    std::string col;  // empty = baseline, replicated across all columns
    std::optional<double> accuracy;
};

std::string render_cells(const std::vector<GridCell>& cells,
                         const std::string& row_header,
                         eval::ReportFormat format) {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    for (const auto& cell : cells) {
        if (std::find(rows.begin(), rows.end(), cell.row) == rows.end()) {
            rows.push_back(cell.row);
        }
        if (!cell.col.empty() &&
            std::find(cols.begin(), cols.end(), cell.col) == cols.end()) {
            cols.push_back(cell.col);
        }
    }
    std::sort(rows.begin(), rows.end(), label_less);
    std::sort(cols.begin(), cols.end(), label_less);
    if (cols.empty()) cols.push_back("accuracy");

    std::map<std::pair<std::string, std::string>, double> values;
    for (const auto& cell : cells) {
        if (!cell.accuracy) continue;
        if (cell.col.empty()) {
            for (const auto& col : cols) values[{cell.row, col}] = *cell.accuracy;
        } else {
            values[{cell.row, cell.col}] = *cell.accuracy;
        }
    }
    return eval::render_grid(row_header, rows, cols, values, format);
}

struct QueryOutcome {
    eval::PerQuery row;
    bool budget_limited = false;
    std::vector<ScoredDoc> retrieved;
};

struct QueryDocs {
    prompt::DocsByClass docs;
    std::vector<ScoredDoc> retrieved;
    std::string note;
};

QueryDocs build_query_docs(const Workspace& ws, const ExperimentConfig& config,
                           const prompt::PromptSchema& schema,
                           const QueryRecord& record) {
    QueryDocs out;
    const bool wants_gold = schema.has(prompt::SlotClass::gold);
    const bool wants_retrieved = schema.has(prompt::SlotClass::retrieved);
    const bool wants_distracting = schema.has(prompt::SlotClass::distracting);
    const bool wants_random = schema.has(prompt::SlotClass::random);
    const std::string gold_id =
        record.gold_passage_id ? *record.gold_passage_id : "";

    if (config.retriever != RetrieverKind::none) {
        const int corpus_size = static_cast<int>(ws.corpus.document_count());
        int k = 0;
        if (!config.eval_topk.empty()) {
            k = *std::max_element(config.eval_topk.begin(),
                                  config.eval_topk.end());
        }
        if (wants_retrieved) k = std::max(k, config.n_retrieved);
        if (wants_distracting && config.n_distracting > 0) {
            k = std::max(k, std::max(2 * config.n_distracting, 10));
        }
        k = std::min(k, corpus_size);
        if (k > 0) {
            out.retrieved = retrieve_labeled(ws, config, record, k);
            if (wants_distracting && config.n_distracting > 0) {
                // Grow the candidate set until enough answer-free documents
                // turn up or the whole corpus has been ranked.
                auto distracting_hits = [&]() {
                    int n = 0;
                    for (const auto& d : out.retrieved) {
                        if (d.label == DocLabel::distracting) ++n;
                    }
                    return n;
                };
                while (distracting_hits() < config.n_distracting &&
                       static_cast<int>(out.retrieved.size()) < corpus_size) {
                    k = std::min(corpus_size, k * 2);
                    out.retrieved = retrieve_labeled(ws, config, record, k);
                }
            }
        }
    }

    std::unordered_set<std::string> used;
    if (wants_gold) {
        if (gold_id.empty()) {
            fail(ErrorKind::validation,
                 "schema has a gold slot but query '" + record.id +
                     "' has no gold_passage_id");
        }
        const Passage& gold = ws.corpus.at(gold_id);
        out.docs.gold.emplace_back(
            gold, taxonomy::classify(gold, record,
                                     Provenance::retrieved_at_rank(0)));
        used.insert(gold_id);
    }
    if (wants_retrieved) {
        for (const auto& scored : out.retrieved) {
            if (static_cast<int>(out.docs.retrieved.size()) >=
                config.n_retrieved) {
                break;
            }
            if (used.count(scored.passage_id)) continue;
            out.docs.retrieved.emplace_back(ws.corpus.at(scored.passage_id),
                                            scored.label.value());
            used.insert(scored.passage_id);
        }
        if (static_cast<int>(out.docs.retrieved.size()) < config.n_retrieved) {
            out.note += "retrieved slot short: " +
                        std::to_string(out.docs.retrieved.size()) + "/" +
                        std::to_string(config.n_retrieved) + "; ";
        }
    }
    if (wants_distracting) {
        for (const auto& scored : out.retrieved) {
            if (static_cast<int>(out.docs.distracting.size()) >=
                config.n_distracting) {
                break;
            }
            if (scored.label != DocLabel::distracting) continue;
            if (used.count(scored.passage_id)) continue;
            out.docs.distracting.emplace_back(ws.corpus.at(scored.passage_id),
                                              DocLabel::distracting);
            used.insert(scored.passage_id);
        }
        if (static_cast<int>(out.docs.distracting.size()) <
            config.n_distracting) {
            out.note += "distracting slot short: " +
                        std::to_string(out.docs.distracting.size()) + "/" +
                        std::to_string(config.n_distracting) + "; ";
        }
    }
    if (wants_random && config.n_random > 0) {
        std::unordered_set<std::string> exclude = used;
        if (!gold_id.empty()) exclude.insert(gold_id);
        prompt::NoiseStream stream(
            prompt::NoiseSource{config.noise_kind,
                                util::mix_seed(config.seed_sampling, record.id)},
            &ws.corpus, &ws.alt_corpus, ws.lexicon, config.nonsense_words,
            std::move(exclude));
        for (int i = 0; i < config.n_random; ++i) {
            auto doc = stream.next();
            if (!doc) {
                out.note += "random slot short: " + std::to_string(i) + "/" +
                            std::to_string(config.n_random) + "; ";
                break;
            }
            out.docs.random.emplace_back(
                *doc, taxonomy::classify(
                          *doc, record, Provenance::sampled_random()));
            used.insert(doc->id);
        }
    }
    return out;
}

prompt::PromptPlan compose_plan(const Workspace& ws,
                                const ExperimentConfig& config,
                                const prompt::PromptSchema& schema,
                                const QueryRecord& record, QueryDocs& docs) {
    prompt::ComposeOptions options;
    options.gold_position = config.gold_position;

    std::optional<prompt::NoiseStream> pad_stream;
    if (config.pad_to_budget) {
        std::unordered_set<std::string> exclude;
        if (record.gold_passage_id) exclude.insert(*record.gold_passage_id);
        for (const auto* list : {&docs.docs.gold, &docs.docs.retrieved,
                                 &docs.docs.distracting, &docs.docs.random}) {
            for (const auto& [p, _] : *list) exclude.insert(p.id);
        }
        pad_stream.emplace(
            prompt::NoiseSource{config.noise_kind,
                                util::mix_seed(config.seed_noise, record.id)},
            &ws.corpus, &ws.alt_corpus, ws.lexicon, config.nonsense_words,
            std::move(exclude));
        options.pad_stream = &*pad_stream;
        options.pad_layout = config.pad_layout;
    }
    return prompt::compose(schema, config.instruction, record, docs.docs,
                           config.budget_tokens, ws.counter, options);
}

}  // namespace

Workspace load_workspace(const ExperimentConfig& config) {
    Workspace ws;
    ws.corpus = ingest_corpus(config.paths.corpus);
    ws.records = load_queries(config.paths.queries);
    Corpus gold_texts;
    if (!config.paths.gold.empty()) {
        gold_texts = ingest_corpus(config.paths.gold);
    }
    ws.corpus = merge_gold(std::move(ws.corpus), ws.records, gold_texts);
    if (!config.paths.alt_corpus.empty()) {
        ws.alt_corpus = ingest_corpus(config.paths.alt_corpus);
    }

    if (config.retriever == RetrieverKind::sparse) {
        if (!config.paths.sparse_index.empty()) {
            ws.sparse = sparse::SparseIndex::load(config.paths.sparse_index);
        } else {
            ws.sparse = sparse::SparseIndex::build(ws.corpus, config.bm25);
        }
    } else if (config.retriever == RetrieverKind::dense) {
        ws.doc_embeddings =
            dense::EmbeddingMatrix::load(config.paths.doc_embeddings);
        ws.query_embeddings =
            dense::EmbeddingMatrix::load(config.paths.query_embeddings);
        for (std::uint64_t i = 0; i < ws.doc_embeddings->count(); ++i) {
            if (!ws.corpus.contains(ws.doc_embeddings->id(i))) {
                fail(ErrorKind::validation,
                     "document embedding id '" + ws.doc_embeddings->id(i) +
                         "' is not in the corpus");
            }
        }
        for (const auto& record : ws.records) {
            if (!ws.query_embeddings->find(record.id)) {
                fail(ErrorKind::validation,
                     "query '" + record.id + "' has no query embedding");
            }
        }
    }

    ws.lexicon = config.paths.lexicon.empty()
                     ? default_lexicon()
                     : load_lexicon(config.paths.lexicon);

    if (config.counter == "http") {
        ws.counter = gateway::http_token_counter(config.http);
    } else {
        ws.counter = prompt::approx_counter();
    }
    return ws;
}

std::vector<ScoredDoc> retrieve_labeled(const Workspace& ws,
                                        const ExperimentConfig& config,
                                        const QueryRecord& record, int k) {
    std::vector<ScoredDoc> results;
    if (config.retriever == RetrieverKind::sparse) {
        results = ws.sparse->search(record.question, k);
    } else if (config.retriever == RetrieverKind::dense) {
        auto row = ws.query_embeddings->find(record.id);
        if (!row) {
            fail(ErrorKind::validation,
                 "query '" + record.id + "' has no query embedding");
        }
        results = dense::search(*ws.doc_embeddings,
                                ws.query_embeddings->row(*row), k);
    } else {
        fail(ErrorKind::invalid_argument, "no retriever configured");
    }
    for (auto& scored : results) {
        scored.label = taxonomy::classify(
            ws.corpus.at(scored.passage_id), record,
            Provenance::retrieved_at_rank(scored.rank));
    }
    return results;
}

prompt::PromptPlan compose_for_query(const Workspace& ws,
                                     const ExperimentConfig& config,
                                     const QueryRecord& record) {
    const auto schema = prompt::PromptSchema::parse(config.schema);
    QueryDocs docs = build_query_docs(ws, config, schema, record);
    return compose_plan(ws, config, schema, record, docs);
}

RunResult run_experiment(const ExperimentConfig& config, const Workspace& ws,
                         const std::string& report_stem,
                         const std::string& manifest_stem) {
    if (config.output_dir.empty()) {
        fail(ErrorKind::validation,
             "output_dir: required to run an experiment");
    }
    const auto schema = prompt::PromptSchema::parse(config.schema);
    if (schema.has(prompt::SlotClass::gold)) {
        std::vector<std::string> missing;
        for (const auto& record : ws.records) {
            if (!record.gold_passage_id) missing.push_back(record.id);
        }
        if (!missing.empty()) {
            std::string ids;
            for (std::size_t i = 0; i < missing.size() && i < 5; ++i) {
                if (i > 0) ids += ", ";
                ids += missing[i];
            }
            fail(ErrorKind::validation,
                 "schema has a gold slot but " +
                     std::to_string(missing.size()) +
                     " queries lack gold_passage_id (" + ids + ")");
        }
    }
    if (ws.records.empty()) {
        fail(ErrorKind::validation, "query file contains no queries");
    }

    std::unique_ptr<gateway::Backend> backend;
    if (config.backend == gateway::BackendKind::mock) {
        backend = std::make_unique<gateway::MockBackend>(
            config.mock_mode, config.mock_bias_p, config.seed_mock);
    } else {
        backend = std::make_unique<gateway::HttpBackend>(config.http);
    }

    const std::size_t n = ws.records.size();
    std::vector<QueryOutcome> outcomes(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            const QueryRecord& record = ws.records[i];
            QueryOutcome& outcome = outcomes[i];
            outcome.row.query_id = record.id;
            try {
                QueryDocs docs = build_query_docs(ws, config, schema, record);
                outcome.retrieved = std::move(docs.retrieved);
                docs.retrieved.clear();
                prompt::PromptPlan plan =
                    compose_plan(ws, config, schema, record, docs);
                if (plan.dropped_docs > 0) {
                    outcome.budget_limited = true;
                    docs.note += "budget dropped " +
                                 std::to_string(plan.dropped_docs) +
                                 " documents; ";
                }
                gateway::GenerationResult result = gateway::generate(
                    plan, config.generation, *backend, record);
                outcome.row.response = result.text;
                outcome.row.correct =
                    eval::score_response(result.text, record.answers);
                outcome.row.note = docs.note;
            } catch (const std::exception& e) {
                outcome.row.response.clear();
                outcome.row.correct = false;
                outcome.row.note = std::string("error: ") + e.what();
            }
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(config.max_in_flight), n);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    eval::EvalReport report;
    report.config_echo = config.to_json();
    report.n_queries = static_cast<int>(n);
    int correct = 0;
    for (auto& outcome : outcomes) {
        if (outcome.row.correct) ++correct;
        if (outcome.budget_limited) ++report.n_budget_limited;
        report.per_query.push_back(std::move(outcome.row));
    }
    std::sort(report.per_query.begin(), report.per_query.end(),
              [](const eval::PerQuery& a, const eval::PerQuery& b) {
                  return a.query_id < b.query_id;
              });
    report.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (config.gold_position) {
        report.per_position[prompt::to_string(*config.gold_position)] =
            report.accuracy;
    }
    if (!config.eval_topk.empty()) {
        std::map<std::string, std::vector<ScoredDoc>> retrieved_map;
        for (std::size_t i = 0; i < n; ++i) {
            retrieved_map[ws.records[i].id] = std::move(outcomes[i].retrieved);
        }
        report.topk_accuracy = eval::topk_accuracy(retrieved_map, ws.records,
                                                   config.eval_topk, ws.corpus);
    }

    std::filesystem::create_directories(config.output_dir);
    RunResult result;
    result.report = std::move(report);
    result.report_path = config.output_dir / (report_stem + ".json");
    result.manifest_path = config.output_dir / (manifest_stem + ".json");
    write_text_file(result.report_path, result.report.to_json().dump(2) + "\n");

    json checksums = json::object();
    auto add_checksum = [&](const char* key, const std::filesystem::path& p) {
        if (!p.empty()) checksums[key] = util::file_checksum(p);
    };
    add_checksum("corpus", config.paths.corpus);
    add_checksum("queries", config.paths.queries);
    add_checksum("gold", config.paths.gold);
    add_checksum("alt_corpus", config.paths.alt_corpus);
    add_checksum("doc_embeddings", config.paths.doc_embeddings);
    add_checksum("query_embeddings", config.paths.query_embeddings);
    add_checksum("lexicon", config.paths.lexicon);
    add_checksum("sparse_index", config.paths.sparse_index);
    json manifest{{"resolved_config", result.report.config_echo},
                  {"checksums", checksums},
                  {"raglab_version", kVersion}};
    write_text_file(result.manifest_path, manifest.dump(2) + "\n");
    return result;
}

RunResult run_experiment(const ExperimentConfig& config) {
    const Workspace ws = load_workspace(config);
    return run_experiment(config, ws);
}

namespace {

struct CellSpec {
    ExperimentConfig config;
    std::string stem;
};

std::vector<CellSpec> expand_preset(const ExperimentConfig& base) {
    std::vector<CellSpec> cells;
    auto add_cell = [&](ExperimentConfig cell) {
        cell.preset = base.preset;
        const std::string row = sanitize_label(cell.grid_row);
        const std::string col =
            cell.grid_col.empty() ? "baseline" : sanitize_label(cell.grid_col);
        cells.push_back(CellSpec{std::move(cell), "report_" + row + "_" + col});
    };
    static const prompt::GoldPosition kPositions[] = {
        prompt::GoldPosition::near, prompt::GoldPosition::mid,
        prompt::GoldPosition::far};

    if (base.preset == "distracting-sweep" || base.preset == "noise-sweep") {
        const bool distracting = base.preset == "distracting-sweep";
        for (int count : {0, 1, 2, 4, 8, 16}) {
            if (count == 0) {
                ExperimentConfig cell = base;
                cell.schema = "I,gold,Q";
                cell.gold_position.reset();
                cell.n_distracting = 0;
                cell.n_random = 0;
                cell.pad_to_budget = false;
                cell.grid_row = "0";
                cell.grid_col = "";
                add_cell(std::move(cell));
                continue;
            }
            for (auto position : kPositions) {
                ExperimentConfig cell = base;
                cell.schema = distracting ? "I,distracting,gold,Q"
                                          : "I,random,gold,Q";
                cell.gold_position = position;
                cell.n_distracting = distracting ? count : 0;
                cell.n_random = distracting ? 0 : count;
                cell.pad_to_budget = false;
                cell.grid_row = std::to_string(count);
                cell.grid_col = prompt::to_string(position);
                add_cell(std::move(cell));
            }
        }
    } else if (base.preset == "gold-position") {
        const int count = base.n_distracting > 0 ? base.n_distracting : 4;
        for (auto position : kPositions) {
            ExperimentConfig cell = base;
            cell.schema = "I,distracting,gold,Q";
            cell.gold_position = position;
            cell.n_distracting = count;
            cell.n_random = 0;
            cell.pad_to_budget = false;
            cell.grid_row = std::to_string(count);
            cell.grid_col = prompt::to_string(position);
            add_cell(std::move(cell));
        }
    } else if (base.preset == "rag-in-practice" ||
               base.preset == "retriever-tradeoff") {
        const std::vector<int> counts = base.preset == "rag-in-practice"
                                            ? std::vector<int>{1, 2, 4, 10}
                                            : std::vector<int>{3, 4, 5};
        for (int count : counts) {
            for (bool padded : {false, true}) {
                ExperimentConfig cell = base;
                cell.schema = "I,random,retrieved,Q";
                cell.gold_position.reset();
                cell.n_retrieved = count;
                cell.n_distracting = 0;
                cell.n_random = 0;
                cell.pad_to_budget = padded;
                cell.pad_layout = prompt::PadLayout::before_context;
                cell.grid_row = std::to_string(count);
                cell.grid_col = padded ? "fill" : "0";
                add_cell(std::move(cell));
            }
        }
    } else {
        fail(ErrorKind::validation, "unknown preset '" + base.preset + "'");
    }
    return cells;
}

void require_retriever(const ExperimentConfig& base) {
    if (base.retriever == RetrieverKind::none) {
        fail(ErrorKind::validation,
             "preset '" + base.preset + "' needs retriever.kind to be set");
    }
}

}  // namespace

PresetOutcome run(const ExperimentConfig& config) {
    PresetOutcome outcome;
    if (config.preset.empty()) {
        RunResult cell = run_experiment(config);
        outcome.table_csv =
            eval::render_report(cell.report, eval::ReportFormat::csv);
        outcome.table_markdown =
            eval::render_report(cell.report, eval::ReportFormat::markdown);
        outcome.cells.push_back(std::move(cell));
        return outcome;
    }
    if (config.preset == "distracting-sweep" ||
        config.preset == "gold-position" ||
        config.preset == "rag-in-practice" ||
        config.preset == "retriever-tradeoff") {
        require_retriever(config);
    }

    std::vector<CellSpec> specs = expand_preset(config);
    const Workspace ws = load_workspace(config);

    std::vector<GridCell> grid;
    for (auto& spec : specs) {
        RunResult cell = run_experiment(
            spec.config, ws, spec.stem,
            "manifest" + spec.stem.substr(std::string("report").size()));
        GridCell gc;
        gc.row = spec.config.grid_row;
        gc.col = spec.config.grid_col;
        if (cell.report.n_budget_limited == 0) {
            gc.accuracy = cell.report.accuracy;
        }
        grid.push_back(std::move(gc));
        outcome.cells.push_back(std::move(cell));
    }

    const std::string row_header =
        (config.preset == "rag-in-practice" ||
         config.preset == "retriever-tradeoff")
            ? "n_retrieved"
            : "n_docs";
    outcome.table_csv =
        render_cells(grid, row_header, eval::ReportFormat::csv);
    outcome.table_markdown =
        render_cells(grid, row_header, eval::ReportFormat::markdown);
    outcome.table_csv_path = config.output_dir / "table.csv";
    outcome.table_md_path = config.output_dir / "table.md";
    write_text_file(outcome.table_csv_path, outcome.table_csv);
    write_text_file(outcome.table_md_path, outcome.table_markdown);
    return outcome;
}

std::string table_from_run_dir(const std::filesystem::path& dir,
                               eval::ReportFormat format) {
    if (!std::filesystem::is_directory(dir)) {
        fail(ErrorKind::io, "'" + dir.string() + "' is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.rfind("report", 0) == 0 &&
            entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        fail(ErrorKind::io,
             "no report*.json files in '" + dir.string() + "'");
    }
    std::sort(files.begin(), files.end());

    std::vector<GridCell> grid;
    std::string row_header = "n_docs";
    for (const auto& file : files) {
        std::ifstream in(file);
        json doc = json::parse(in, nullptr, false);
        if (doc.is_discarded()) {
            fail(ErrorKind::parse, "'" + file.string() + "' is not valid JSON");
        }
        const eval::EvalReport report = eval::EvalReport::from_json(doc);
        GridCell cell;
        if (report.config_echo.contains("grid")) {
            cell.row = report.config_echo.at("grid").value("row", "");
            cell.col = report.config_echo.at("grid").value("col", "");
        }
        const std::string preset = report.config_echo.value("preset", "");
        if (preset == "rag-in-practice" || preset == "retriever-tradeoff") {
            row_header = "n_retrieved";
        }
        if (cell.row.empty()) {
            int injected = 0;
            if (report.config_echo.contains("counts")) {
                const auto& counts = report.config_echo.at("counts");
                injected = counts.value("distracting", 0) +
                           counts.value("random", 0);
            }
            cell.row = std::to_string(injected);
        }
        if (report.n_budget_limited == 0) cell.accuracy = report.accuracy;
        grid.push_back(std::move(cell));
    }
    return render_cells(grid, row_header, format);
}

}  // namespace raglab::experiment
