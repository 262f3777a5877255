#include "raglab/types.hpp"

namespace raglab {

const char* to_string(Origin origin) {
    switch (origin) {
        case Origin::main_corpus: return "main_corpus";
        case Origin::gold_merged: return "gold_merged";
        case Origin::alternate_corpus: return "alternate_corpus";
        case Origin::synthetic: return "synthetic";
    }
    return "main_corpus";
}

std::optional<Origin> origin_from_string(std::string_view s) {
    if (s == "main_corpus") return Origin::main_corpus;
    if (s == "gold_merged") return Origin::gold_merged;
    if (s == "alternate_corpus") return Origin::alternate_corpus;
    if (s == "synthetic") return Origin::synthetic;
    return std::nullopt;
}

const char* to_string(DocLabel label) {
    switch (label) {
        case DocLabel::gold: return "gold";
        case DocLabel::relevant: return "relevant";
        case DocLabel::distracting: return "distracting";
        case DocLabel::random: return "random";
    }
    return "random";
}

std::optional<DocLabel> doc_label_from_string(std::string_view s) {
    if (s == "gold") return DocLabel::gold;
    if (s == "relevant") return DocLabel::relevant;
    if (s == "distracting") return DocLabel::distracting;
    if (s == "random") return DocLabel::random;
    return std::nullopt;
}

}  // namespace raglab
