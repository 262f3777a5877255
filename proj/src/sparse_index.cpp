#include "raglab/sparse_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "raglab/error.hpp"
#include "raglab/text.hpp"

namespace raglab::sparse {
namespace {

constexpr char kMagic[4] = {'R', 'G', 'S', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& value, const char* what) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) {
        fail(ErrorKind::parse,
             std::string("sparse index file truncated while reading ") + what);
    }
}

void write_string(std::ofstream& out, const std::string& s) {
    if (s.size() > 0xFFFF) {
        fail(ErrorKind::invalid_argument,
             "string too long for index file: " + s.substr(0, 40) + "...");
    }
    const auto len = static_cast<std::uint16_t>(s.size());
    write_pod(out, len);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in, const char* what) {
    std::uint16_t len = 0;
    read_pod(in, len, what);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) {
        fail(ErrorKind::parse,
             std::string("sparse index file truncated while reading ") + what);
    }
    return s;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
    return text::tokenize(s);
}

SparseIndex SparseIndex::build(const Corpus& corpus, Bm25Params params) {
    if (corpus.empty()) {
        fail(ErrorKind::invalid_argument,
             "cannot build a sparse index over an empty corpus");
    }
    SparseIndex index;
    index.params_ = params;
    index.doc_ids_.reserve(corpus.document_count());
    index.doc_lengths_.reserve(corpus.document_count());

    double total_len = 0.0;
    // Corpus iteration is id-sorted, so slots ascend with passage ids and
    // posting lists come out sorted without an extra pass.
    for (const auto& [id, passage] : corpus.passages()) {
        const auto slot = static_cast<std::uint32_t>(index.doc_ids_.size());
        const auto terms = tokenize(passage.text);
        index.doc_ids_.push_back(id);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
        total_len += static_cast<double>(terms.size());

        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : terms) ++tf[t];
        for (const auto& [term, count] : tf) {
            index.postings_[term].push_back(Posting{slot, count});
        }
    }
    index.avg_doc_length_ = total_len / static_cast<double>(index.doc_ids_.size());
    return index;
}

std::size_t SparseIndex::slot_of(std::string_view passage_id) const {
    auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), passage_id);
    if (it == doc_ids_.end() || *it != passage_id) {
        fail(ErrorKind::invalid_argument,
             "unknown passage id '" + std::string(passage_id) + "'");
    }
    return static_cast<std::size_t>(it - doc_ids_.begin());
}

double SparseIndex::term_contribution(double idf, std::uint32_t tf,
                                      std::uint32_t len) const {
    const double tfd = static_cast<double>(tf);
    const double norm =
        params_.k1 * (1.0 - params_.b +
                      params_.b * static_cast<double>(len) / avg_doc_length_);
    return idf * (tfd * (params_.k1 + 1.0)) / (tfd + norm);
}

const std::vector<Posting>* SparseIndex::postings(std::string_view term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
}

int SparseIndex::doc_length(std::string_view passage_id) const {
    return static_cast<int>(doc_lengths_[slot_of(passage_id)]);
}

double SparseIndex::score(const std::vector<std::string>& query_terms,
                          std::string_view passage_id) const {
    const std::size_t slot = slot_of(passage_id);
    const double n_docs = static_cast<double>(doc_ids_.size());
    double total = 0.0;
    for (const auto& term : query_terms) {
        const auto* list = postings(term);
        if (!list) continue;
        const double df = static_cast<double>(list->size());
        auto it = std::lower_bound(
            list->begin(), list->end(), slot,
            [](const Posting& p, std::size_t s) { return p.doc < s; });
        if (it == list->end() || it->doc != slot) continue;
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        total += term_contribution(idf, it->tf, doc_lengths_[slot]);
    }
    return total;
}

std::vector<ScoredDoc> SparseIndex::search(std::string_view question,
                                           int k) const {
    if (k < 1) {
        fail(ErrorKind::invalid_argument, "k must be >= 1");
    }
    const auto query_terms = tokenize(question);
    const std::size_t n = doc_ids_.size();
    const double n_docs = static_cast<double>(n);

    // Term-at-a-time accumulation in query order, so per-document sums add
    // contributions in exactly the order score() does.
    std::vector<double> acc(n, 0.0);
    std::vector<std::uint8_t> touched(n, 0);
    for (const auto& term : query_terms) {
        const auto* list = postings(term);
        if (!list) continue;
        const double df = static_cast<double>(list->size());
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const Posting& p : *list) {
            acc[p.doc] += term_contribution(idf, p.tf, doc_lengths_[p.doc]);
            touched[p.doc] = 1;
        }
    }

    std::vector<std::uint32_t> matched;
    for (std::uint32_t slot = 0; slot < n; ++slot) {
        if (touched[slot]) matched.push_back(slot);
    }
    // Slots ascend with ids, so slot order is the id tie-break.
    std::stable_sort(matched.begin(), matched.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                         if (acc[a] != acc[b]) return acc[a] > acc[b];
                         return a < b;
                     });

    const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    std::vector<ScoredDoc> out;
    out.reserve(want);
    for (std::uint32_t slot : matched) {
        if (out.size() == want) break;
        out.push_back(ScoredDoc{doc_ids_[slot], acc[slot],
                                static_cast<int>(out.size() + 1), std::nullopt});
    }
    if (out.size() < want) {
        for (std::uint32_t slot = 0; slot < n && out.size() < want; ++slot) {
            if (touched[slot]) continue;
            out.push_back(ScoredDoc{doc_ids_[slot], 0.0,
                                    static_cast<int>(out.size() + 1),
                                    std::nullopt});
        }
    }
    return out;
}

void SparseIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::io, "cannot write sparse index '" + path.string() + "'");
    }
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, params_.k1);
    write_pod(out, params_.b);
    write_pod(out, avg_doc_length_);
    write_pod(out, static_cast<std::uint64_t>(doc_ids_.size()));
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        write_string(out, doc_ids_[i]);
        write_pod(out, doc_lengths_[i]);
    }
    write_pod(out, static_cast<std::uint64_t>(postings_.size()));
    for (const auto& [term, list] : postings_) {
        write_string(out, term);
        write_pod(out, static_cast<std::uint64_t>(list.size()));
        for (const Posting& p : list) {
            write_pod(out, p.doc);
            write_pod(out, p.tf);
        }
    }
    if (!out) {
        fail(ErrorKind::io, "short write to '" + path.string() + "'");
    }
}

SparseIndex SparseIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::io, "cannot open sparse index '" + path.string() + "'");
    }
    char magic[4] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        fail(ErrorKind::parse,
             "'" + path.string() + "' is not a sparse index file (bad magic)");
    }
    std::uint32_t version = 0;
    read_pod(in, version, "version");
    if (version != kVersion) {
        fail(ErrorKind::parse, "unsupported sparse index version " +
                                   std::to_string(version) + " in '" +
                                   path.string() + "'");
    }
    SparseIndex index;
    read_pod(in, index.params_.k1, "k1");
    read_pod(in, index.params_.b, "b");
    read_pod(in, index.avg_doc_length_, "avg_doc_length");
    std::uint64_t n_docs = 0;
    read_pod(in, n_docs, "doc count");
    index.doc_ids_.reserve(n_docs);
    index.doc_lengths_.reserve(n_docs);
    for (std::uint64_t i = 0; i < n_docs; ++i) {
        index.doc_ids_.push_back(read_string(in, "doc id"));
        std::uint32_t len = 0;
        read_pod(in, len, "doc length");
        index.doc_lengths_.push_back(len);
        if (i > 0 && !(index.doc_ids_[i - 1] < index.doc_ids_[i])) {
            fail(ErrorKind::parse,
                 "document table in '" + path.string() + "' is not id-sorted");
        }
    }
    std::uint64_t n_terms = 0;
    read_pod(in, n_terms, "term count");
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        std::string term = read_string(in, "term");
        std::uint64_t n_postings = 0;
        read_pod(in, n_postings, "posting count");
        std::vector<Posting> list;
        list.reserve(n_postings);
        for (std::uint64_t i = 0; i < n_postings; ++i) {
            Posting p;
            read_pod(in, p.doc, "posting doc");
            read_pod(in, p.tf, "posting tf");
            if (p.doc >= n_docs) {
                fail(ErrorKind::parse, "posting in '" + path.string() +
                                           "' references unknown document slot");
            }
            list.push_back(p);
        }
        index.postings_.emplace(std::move(term), std::move(list));
    }
    return index;
}

}  // namespace raglab::sparse
