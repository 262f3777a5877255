#include "raglab/evaluation.hpp"

#include <algorithm>

#include "raglab/error.hpp"
#include "raglab/taxonomy.hpp"
#include "raglab/util.hpp"

namespace raglab::eval {

using nlohmann::json;

json EvalReport::to_json() const {
    json per_query_json = json::array();
    for (const auto& row : per_query) {
        per_query_json.push_back(json{{"id", row.query_id},
                                      {"response", row.response},
                                      {"correct", row.correct},
                                      {"note", row.note}});
    }
    json topk = json::object();
    for (const auto& [k, v] : topk_accuracy) {
        topk[std::to_string(k)] = v;
    }
    return json{{"config_echo", config_echo},
                {"n_queries", n_queries},
                {"accuracy", accuracy},
                {"per_position", per_position},
                {"topk_accuracy", topk},
                {"per_query", per_query_json},
                {"n_budget_limited", n_budget_limited}};
}

EvalReport EvalReport::from_json(const json& j) {
    if (!j.is_object() || !j.contains("accuracy") || !j.contains("per_query")) {
        fail(ErrorKind::parse, "not an evaluation report");
    }
    EvalReport r;
    r.config_echo = j.value("config_echo", json::object());
    r.n_queries = j.value("n_queries", 0);
    r.accuracy = j.value("accuracy", 0.0);
    if (j.contains("per_position")) {
        for (const auto& [k, v] : j.at("per_position").items()) {
            r.per_position[k] = v.get<double>();
        }
    }
    if (j.contains("topk_accuracy")) {
        for (const auto& [k, v] : j.at("topk_accuracy").items()) {
            r.topk_accuracy[std::stoi(k)] = v.get<double>();
        }
    }
    for (const auto& row : j.at("per_query")) {
        PerQuery q;
        q.query_id = row.value("id", "");
        q.response = row.value("response", "");
        q.correct = row.value("correct", false);
        q.note = row.value("note", "");
        r.per_query.push_back(std::move(q));
    }
    r.n_budget_limited = j.value("n_budget_limited", 0);
    return r;
}

bool score_response(std::string_view response,
                    const std::vector<std::string>& answers) {
    return taxonomy::contains_answer(response, answers);
}

std::map<int, double> topk_accuracy(
    const std::map<std::string, std::vector<ScoredDoc>>& retrieved,
    const std::vector<QueryRecord>& records, const std::vector<int>& ks,
    const Corpus& corpus) {
    if (records.empty()) {
        fail(ErrorKind::invalid_argument, "top-k accuracy needs >= 1 query");
    }
    int max_k = 0;
    for (int k : ks) {
        if (k < 1) fail(ErrorKind::invalid_argument, "k values must be >= 1");
        max_k = std::max(max_k, k);
    }

    std::map<int, double> out;
    if (ks.empty()) return out;

    // Rank of the first answer-bearing passage per query (0 = none found).
    std::vector<int> first_hit;
    first_hit.reserve(records.size());
    for (const auto& record : records) {
        auto it = retrieved.find(record.id);
        if (it == retrieved.end()) {
            fail(ErrorKind::invalid_argument,
                 "no retrieval list for query '" + record.id + "'");
        }
        const auto& list = it->second;
        if (list.size() < static_cast<std::size_t>(max_k) &&
            list.size() < corpus.document_count()) {
            fail(ErrorKind::invalid_argument,
                 "retrieval list for query '" + record.id + "' has " +
                     std::to_string(list.size()) + " entries; need " +
                     std::to_string(max_k) + " or the full corpus");
        }
        int hit = 0;
        for (std::size_t r = 0; r < list.size(); ++r) {
            const Passage& passage = corpus.at(list[r].passage_id);
            if (taxonomy::contains_answer(passage.text, record.answers)) {
                hit = static_cast<int>(r + 1);
                break;
            }
        }
        first_hit.push_back(hit);
    }

    for (int k : ks) {
        int hits = 0;
        for (int h : first_hit) {
            if (h > 0 && h <= k) ++hits;
        }
        out[k] = static_cast<double>(hits) / static_cast<double>(records.size());
    }
    return out;
}

std::optional<ReportFormat> report_format_from_string(std::string_view s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    return std::nullopt;
}

namespace {

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows,
                         ReportFormat format) {
    std::string out;
    if (format == ReportFormat::csv) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i > 0) out.push_back(',');
            out += csv_quote(header[i]);
        }
        out.push_back('\n');
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i > 0) out.push_back(',');
                out += csv_quote(row[i]);
            }
            out.push_back('\n');
        }
        return out;
    }
    out += "|";
    for (const auto& h : header) out += " " + h + " |";
    out += "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& row : rows) {
        out += "|";
        for (const auto& cell : row) out += " " + cell + " |";
        out += "\n";
    }
    return out;
}

int injected_count(const nlohmann::json& config_echo) {
    int n = 0;
    if (config_echo.is_object() && config_echo.contains("counts")) {
        const auto& counts = config_echo.at("counts");
        n += counts.value("distracting", 0);
        n += counts.value("random", 0);
    }
    return n;
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
    static const char* kPositions[] = {"near", "mid", "far"};
    std::vector<std::string> header{"n_docs"};
    std::vector<std::string> row{
        std::to_string(injected_count(report.config_echo))};
    bool any_position = false;
    for (const char* pos : kPositions) {
        auto it = report.per_position.find(pos);
        if (it != report.per_position.end()) {
            header.emplace_back(pos);
            row.push_back(util::format_fixed(it->second, 4));
            any_position = true;
        }
    }
    if (!any_position) {
        header.emplace_back("accuracy");
        row.push_back(util::format_fixed(report.accuracy, 4));
    }
    for (const auto& [k, v] : report.topk_accuracy) {
        header.push_back("top" + std::to_string(k));
        row.push_back(util::format_fixed(v, 4));
    }
    return render_table(header, {row}, format);
}

std::string render_grid(
    const std::string& row_header, const std::vector<std::string>& row_labels,
    const std::vector<std::string>& col_labels,
    const std::map<std::pair<std::string, std::string>, double>& cells,
    ReportFormat format) {
    std::vector<std::string> header{row_header};
    header.insert(header.end(), col_labels.begin(), col_labels.end());
    std::vector<std::vector<std::string>> rows;
    for (const auto& row_label : row_labels) {
        std::vector<std::string> row{row_label};
        for (const auto& col_label : col_labels) {
            auto it = cells.find({row_label, col_label});
            row.push_back(it == cells.end()
                              ? std::string()
                              : util::format_fixed(it->second, 4));
        }
        rows.push_back(std::move(row));
    }
    return render_table(header, rows, format);
}

}  // namespace raglab::eval
