#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace raglab {

enum class Origin {
    main_corpus,
    gold_merged,
    alternate_corpus,
    synthetic,
};

const char* to_string(Origin origin);
std::optional<Origin> origin_from_string(std::string_view s);

/// One retrievable text unit.
struct Passage {
    std::string id;
    std::string title;
    std::string text;
    int word_count = 0;  // whitespace-delimited tokens in text
    Origin origin = Origin::main_corpus;
};

/// A question, its accepted answer strings, and the id of its gold passage.
struct QueryRecord {
    std::string id;
    std::string question;
    std::vector<std::string> answers;  // never empty for a valid record
    std::optional<std::string> gold_passage_id;
};

enum class DocLabel {
    gold,
    relevant,
    distracting,
    random,
};

const char* to_string(DocLabel label);
std::optional<DocLabel> doc_label_from_string(std::string_view s);

/// A passage reference with retrieval score, 1-based rank and optional label.
struct ScoredDoc {
    std::string passage_id;
    double score = 0.0;
    int rank = 0;
    std::optional<DocLabel> label;
};

/// How a document entered the pipeline, prior to classification.
struct Provenance {
    enum class Kind { retrieved, sampled_random };

    Kind kind = Kind::retrieved;
    int rank = 0;  // 1-based retrieval rank; 0 for sampled documents

    static Provenance retrieved_at_rank(int rank) {
        return Provenance{Kind::retrieved, rank};
    }
    static Provenance sampled_random() {
        return Provenance{Kind::sampled_random, 0};
    }
};

}  // namespace raglab
