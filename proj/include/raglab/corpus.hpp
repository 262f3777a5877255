#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "raglab/types.hpp"

namespace raglab {

/// Id-keyed passage collection. Immutable once built; iteration is always in
/// ascending id order, so everything derived from a corpus is independent of
/// ingestion order.
class Corpus {
public:
    Corpus() = default;

    /// Adds a passage. Duplicate ids are an invalid_argument error.
    void add(Passage passage);

    bool contains(std::string_view id) const;
    const Passage* find(std::string_view id) const;

    /// Lookup that must succeed; throws invalid_argument otherwise.
    const Passage& at(std::string_view id) const;

    std::size_t document_count() const { return passages_.size(); }
    bool empty() const { return passages_.empty(); }

    /// Passage ids in ascending order.
    std::vector<std::string> ids() const;

    const std::map<std::string, Passage, std::less<>>& passages() const {
        return passages_;
    }

private:
    std::map<std::string, Passage, std::less<>> passages_;
};

/// Splits raw text into consecutive windows of `window` whitespace words.
/// The final passage keeps the remainder (1..window words). Passage ids are
/// "<title>#<index>" with '#' in the title replaced by '-'.
std::vector<Passage> segment_document(std::string_view title,
                                      std::string_view raw_text,
                                      int window,
                                      Origin origin = Origin::main_corpus);

/// Reads a corpus file: UTF-8, one JSON object per line with fields
/// id, title, text and optional origin (default "main_corpus").
Corpus ingest_corpus(const std::filesystem::path& path);

/// Reads a query file: one JSON object per line with fields id, question,
/// answers (non-empty array of strings) and optional gold_passage_id.
std::vector<QueryRecord> load_queries(const std::filesystem::path& path);

/// Adds every gold passage referenced by `records` to `corpus`, pulling
/// missing ones from `gold_texts` with origin gold_merged. Idempotent.
Corpus merge_gold(Corpus corpus,
                  const std::vector<QueryRecord>& records,
                  const Corpus& gold_texts);

}  // namespace raglab
