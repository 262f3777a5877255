#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "raglab/corpus.hpp"
#include "raglab/types.hpp"

namespace raglab::sparse {

/// Lowercased maximal alphanumeric runs; the index's one text analyzer.
/// No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view s);

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

struct Posting {
    std::uint32_t doc = 0;  // slot in the id-sorted document table
    std::uint32_t tf = 0;
};

/// Inverted index with Okapi BM25 scoring:
///   score(q, d) = sum over query terms of
///       IDF(t) * tf*(k1+1) / (tf + k1*(1 - b + b*len/avg_len))
///   IDF(t) = ln(1 + (N - df + 0.5)/(df + 0.5))
/// Immutable once built; searches are safe to run concurrently.
class SparseIndex {
public:
    static SparseIndex build(const Corpus& corpus, Bm25Params params = {});

    static SparseIndex load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// BM25 score of one passage against a pre-tokenized query. Query terms
    /// contribute in list order; duplicates contribute once per occurrence.
    double score(const std::vector<std::string>& query_terms,
                 std::string_view passage_id) const;

    /// Top-k passages for a raw question, score descending, ties broken by
    /// passage id ascending. Passages matching no query term score 0 and
    /// participate in the tie-break when k exceeds the matching set.
    std::vector<ScoredDoc> search(std::string_view question, int k) const;

    std::size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    const Bm25Params& params() const { return params_; }
    std::size_t term_count() const { return postings_.size(); }

    const std::vector<Posting>* postings(std::string_view term) const;
    int doc_length(std::string_view passage_id) const;
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }

private:
    std::size_t slot_of(std::string_view passage_id) const;
    double term_contribution(double idf, std::uint32_t tf,
                             std::uint32_t len) const;

    std::vector<std::string> doc_ids_;       // ascending
    std::vector<std::uint32_t> doc_lengths_;  // aligned to doc_ids_
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    Bm25Params params_;
    double avg_doc_length_ = 0.0;
};

}  // namespace raglab::sparse
