#include "raglab/taxonomy.hpp"

#include <iostream>
#include <mutex>

#include "raglab/error.hpp"
#include "raglab/text.hpp"

namespace raglab::taxonomy {
namespace {

std::mutex warn_mutex;
WarnHandler warn_handler = [](const std::string& msg) {
    std::cerr << "[raglab] warning: " << msg << "\n";
};

void warn(const std::string& msg) {
    std::lock_guard<std::mutex> lock(warn_mutex);
    if (warn_handler) warn_handler(msg);
}

bool is_subsequence_at(const std::vector<std::string>& haystack,
                       const std::vector<std::string>& needle,
                       std::size_t pos) {
    for (std::size_t i = 0; i < needle.size(); ++i) {
        if (haystack[pos + i] != needle[i]) return false;
    }
    return true;
}

}  // namespace

std::string normalize(std::string_view s) { return text::normalize(s); }

bool contains_answer(std::string_view text_in,
                     const std::vector<std::string>& answers) {
    if (answers.empty()) {
        fail(ErrorKind::invalid_argument, "answer list must not be empty");
    }
    const auto words = text::tokenize(text_in);
    for (const auto& answer : answers) {
        const auto needle = text::tokenize(answer);
        if (needle.empty() || needle.size() > words.size()) continue;
        for (std::size_t pos = 0; pos + needle.size() <= words.size(); ++pos) {
            if (is_subsequence_at(words, needle, pos)) return true;
        }
    }
    return false;
}

WarnHandler set_warn_handler(WarnHandler handler) {
    std::lock_guard<std::mutex> lock(warn_mutex);
    std::swap(warn_handler, handler);
    return handler;
}

DocLabel classify(const Passage& doc, const QueryRecord& record,
                  const Provenance& provenance) {
    if (record.answers.empty()) {
        fail(ErrorKind::invalid_argument,
             "query '" + record.id + "' has no answers");
    }
    const bool is_gold =
        record.gold_passage_id && doc.id == *record.gold_passage_id;

    if (provenance.kind == Provenance::Kind::sampled_random) {
        if (is_gold) {
            fail(ErrorKind::invalid_argument,
                 "sampled random document '" + doc.id +
                     "' is the gold passage of query '" + record.id +
                     "'; resample upstream");
        }
        return DocLabel::random;
    }

    if (is_gold) {
        if (!contains_answer(doc.text, record.answers)) {
            warn("gold passage '" + doc.id + "' for query '" + record.id +
                 "' contains none of the accepted answers");
        }
        return DocLabel::gold;
    }
    return contains_answer(doc.text, record.answers) ? DocLabel::relevant
                                                     : DocLabel::distracting;
}

}  // namespace raglab::taxonomy
