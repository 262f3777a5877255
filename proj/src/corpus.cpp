#include "raglab/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "raglab/error.hpp"
#include "raglab/text.hpp"

namespace raglab {

using nlohmann::json;

void Corpus::add(Passage passage) {
    if (passage.id.empty()) {
        fail(ErrorKind::invalid_argument, "passage id must not be empty");
    }
    auto [it, inserted] = passages_.emplace(passage.id, std::move(passage));
    if (!inserted) {
        fail(ErrorKind::invalid_argument,
             "duplicate passage id '" + it->first + "'");
    }
}

bool Corpus::contains(std::string_view id) const {
    return passages_.find(id) != passages_.end();
}

const Passage* Corpus::find(std::string_view id) const {
    auto it = passages_.find(id);
    return it == passages_.end() ? nullptr : &it->second;
}

const Passage& Corpus::at(std::string_view id) const {
    const Passage* p = find(id);
    if (!p) {
        fail(ErrorKind::invalid_argument,
             "unknown passage id '" + std::string(id) + "'");
    }
    return *p;
}

std::vector<std::string> Corpus::ids() const {
    std::vector<std::string> out;
    out.reserve(passages_.size());
    for (const auto& [id, _] : passages_) out.push_back(id);
    return out;
}

std::vector<Passage> segment_document(std::string_view title,
                                      std::string_view raw_text,
                                      int window,
                                      Origin origin) {
    if (window < 1) {
        fail(ErrorKind::invalid_argument, "segmentation window must be >= 1");
    }
    const auto words = text::whitespace_words(raw_text);
    std::vector<Passage> out;
    if (words.empty()) return out;

    std::string safe_title(title);
    for (char& c : safe_title) {
        if (c == '#') c = '-';
    }

    const std::size_t w = static_cast<std::size_t>(window);
    for (std::size_t start = 0, index = 0; start < words.size();
         start += w, ++index) {
        const std::size_t end = std::min(words.size(), start + w);
        std::string body;
        for (std::size_t i = start; i < end; ++i) {
            if (i > start) body.push_back(' ');
            body.append(words[i]);
        }
        Passage p;
        p.id = safe_title + "#" + std::to_string(index);
        p.title = std::string(title);
        p.text = std::move(body);
        p.word_count = static_cast<int>(end - start);
        p.origin = origin;
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

json parse_line(const std::string& line, const std::filesystem::path& path,
                std::size_t line_no) {
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        fail(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) +
                                   ": not a JSON object");
    }
    return obj;
}

std::string require_string(const json& obj, const char* key,
                           const std::filesystem::path& path,
                           std::size_t line_no) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        fail(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) +
                                   ": missing string field '" + key + "'");
    }
    return it->get<std::string>();
}

}  // namespace

Corpus ingest_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::io, "cannot open corpus file '" + path.string() + "'");
    }
    Corpus corpus;
    std::unordered_map<std::string, std::size_t> first_line_of;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json obj = parse_line(line, path, line_no);

        Passage p;
        p.id = require_string(obj, "id", path, line_no);
        p.title = require_string(obj, "title", path, line_no);
        p.text = require_string(obj, "text", path, line_no);
        p.word_count = text::word_count(p.text);
        if (auto it = obj.find("origin"); it != obj.end()) {
            if (!it->is_string()) {
                fail(ErrorKind::parse, path.string() + ":" +
                                           std::to_string(line_no) +
                                           ": origin must be a string");
            }
            auto origin = origin_from_string(it->get<std::string>());
            if (!origin) {
                fail(ErrorKind::parse, path.string() + ":" +
                                           std::to_string(line_no) +
                                           ": unknown origin '" +
                                           it->get<std::string>() + "'");
            }
            p.origin = *origin;
        }

        auto [dup_it, inserted] = first_line_of.emplace(p.id, line_no);
        if (!inserted) {
            fail(ErrorKind::parse,
                 path.string() + ": duplicate passage id '" + p.id +
                     "' on lines " + std::to_string(dup_it->second) + " and " +
                     std::to_string(line_no));
        }
        corpus.add(std::move(p));
    }
    return corpus;
}

std::vector<QueryRecord> load_queries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::io, "cannot open query file '" + path.string() + "'");
    }
    std::vector<QueryRecord> records;
    std::unordered_map<std::string, std::size_t> first_line_of;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json obj = parse_line(line, path, line_no);

        QueryRecord r;
        r.id = require_string(obj, "id", path, line_no);
        r.question = require_string(obj, "question", path, line_no);
        auto answers_it = obj.find("answers");
        if (answers_it == obj.end() || !answers_it->is_array() ||
            answers_it->empty()) {
            fail(ErrorKind::parse, path.string() + ":" +
                                       std::to_string(line_no) +
                                       ": answers must be a non-empty array");
        }
        for (const auto& a : *answers_it) {
            if (!a.is_string()) {
                fail(ErrorKind::parse, path.string() + ":" +
                                           std::to_string(line_no) +
                                           ": answers must be strings");
            }
            r.answers.push_back(a.get<std::string>());
        }
        if (auto it = obj.find("gold_passage_id");
            it != obj.end() && !it->is_null()) {
            if (!it->is_string()) {
                fail(ErrorKind::parse, path.string() + ":" +
                                           std::to_string(line_no) +
                                           ": gold_passage_id must be a string");
            }
            r.gold_passage_id = it->get<std::string>();
        }

        auto [dup_it, inserted] = first_line_of.emplace(r.id, line_no);
        if (!inserted) {
            fail(ErrorKind::parse,
                 path.string() + ": duplicate query id '" + r.id +
                     "' on lines " + std::to_string(dup_it->second) + " and " +
                     std::to_string(line_no));
        }
        records.push_back(std::move(r));
    }
    return records;
}

Corpus merge_gold(Corpus corpus,
                  const std::vector<QueryRecord>& records,
                  const Corpus& gold_texts) {
    for (const auto& record : records) {
        if (!record.gold_passage_id) continue;
        const std::string& gid = *record.gold_passage_id;
        if (corpus.contains(gid)) continue;
        const Passage* gold = gold_texts.find(gid);
        if (!gold) {
            fail(ErrorKind::validation,
                 "query '" + record.id + "' references gold passage '" + gid +
                     "' that is neither in the corpus nor in the gold set");
        }
        Passage merged = *gold;
        merged.origin = Origin::gold_merged;
        merged.word_count = text::word_count(merged.text);
        corpus.add(std::move(merged));
    }
    return corpus;
}

}  // namespace raglab
