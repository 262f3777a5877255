#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "raglab/corpus.hpp"
#include "raglab/types.hpp"

namespace raglab::eval {

struct PerQuery {
    std::string query_id;
    std::string response;
    bool correct = false;
    std::string note;  // e.g. backend failure or budget-drop diagnostics
};

/// One experiment cell's results. Serialization is key-sorted and
/// timestamp-free, so identical runs produce identical bytes.
struct EvalReport {
    nlohmann::json config_echo;
    int n_queries = 0;
    double accuracy = 0.0;
    std::map<std::string, double> per_position;  // "near" / "mid" / "far"
    std::map<int, double> topk_accuracy;
    std::vector<PerQuery> per_query;  // ascending query id
    int n_budget_limited = 0;

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
};

/// Containment accuracy for a single response; delegates to
/// taxonomy::contains_answer.
bool score_response(std::string_view response,
                    const std::vector<std::string>& answers);

/// For each k, the fraction of queries whose top-k retrieved list holds at
/// least one answer-bearing passage. Each query needs a list of length
/// >= max(ks) or one covering the whole corpus.
std::map<int, double> topk_accuracy(
    const std::map<std::string, std::vector<ScoredDoc>>& retrieved,
    const std::vector<QueryRecord>& records, const std::vector<int>& ks,
    const Corpus& corpus);

enum class ReportFormat { csv, markdown };

std::optional<ReportFormat> report_format_from_string(std::string_view s);

/// Renders one report as a table row: the injected-document count, then one
/// accuracy column per gold position present (near, mid, far in that
/// order), or a single accuracy column when no positions were swept.
/// Numeric cells use 4 decimal places.
std::string render_report(const EvalReport& report, ReportFormat format);

/// Grid of accuracies across experiment cells. Empty cells render blank.
std::string render_grid(
    const std::string& row_header, const std::vector<std::string>& row_labels,
    const std::vector<std::string>& col_labels,
    const std::map<std::pair<std::string, std::string>, double>& cells,
    ReportFormat format);

}  // namespace raglab::eval
