#include "raglab/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "raglab/error.hpp"
#include "raglab/text.hpp"
#include "raglab/util.hpp"

namespace raglab::prompt {

const char* to_string(SlotClass slot) {
    switch (slot) {
        case SlotClass::instruction: return "I";
        case SlotClass::gold: return "gold";
        case SlotClass::retrieved: return "retrieved";
        case SlotClass::distracting: return "distracting";
        case SlotClass::random: return "random";
        case SlotClass::query: return "Q";
    }
    return "?";
}

PromptSchema PromptSchema::parse(std::string_view spec) {
    PromptSchema schema;
    std::size_t start = 0;
    std::vector<std::string> parts;
    while (start <= spec.size()) {
        std::size_t comma = spec.find(',', start);
        if (comma == std::string_view::npos) comma = spec.size();
        std::string_view token = spec.substr(start, comma - start);
        while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
        parts.emplace_back(token);
        if (comma == spec.size()) break;
        start = comma + 1;
    }
    for (const auto& part : parts) {
        SlotClass slot;
        if (part == "I") slot = SlotClass::instruction;
        else if (part == "Q") slot = SlotClass::query;
        else if (part == "gold") slot = SlotClass::gold;
        else if (part == "retrieved") slot = SlotClass::retrieved;
        else if (part == "distracting") slot = SlotClass::distracting;
        else if (part == "random") slot = SlotClass::random;
        else {
            fail(ErrorKind::validation,
                 "schema '" + std::string(spec) + "': unknown slot '" + part +
                     "' (expected I, gold, retrieved, distracting, random, Q)");
        }
        if (schema.has(slot)) {
            fail(ErrorKind::validation, "schema '" + std::string(spec) +
                                            "': slot '" + part +
                                            "' appears more than once");
        }
        schema.slots.push_back(slot);
    }
    if (schema.slots.size() < 2 ||
        schema.slots.front() != SlotClass::instruction ||
        schema.slots.back() != SlotClass::query) {
        fail(ErrorKind::validation,
             "schema '" + std::string(spec) +
                 "': must start with I and end with Q");
    }
    return schema;
}

std::string PromptSchema::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i > 0) out.push_back(',');
        out += prompt::to_string(slots[i]);
    }
    return out;
}

bool PromptSchema::has(SlotClass slot) const {
    return std::find(slots.begin(), slots.end(), slot) != slots.end();
}

std::vector<SlotClass> PromptSchema::interior() const {
    std::vector<SlotClass> out;
    for (SlotClass s : slots) {
        if (s != SlotClass::instruction && s != SlotClass::query) {
            out.push_back(s);
        }
    }
    return out;
}

const char* to_string(GoldPosition position) {
    switch (position) {
        case GoldPosition::near: return "near";
        case GoldPosition::mid: return "mid";
        case GoldPosition::far: return "far";
    }
    return "near";
}

std::optional<GoldPosition> gold_position_from_string(std::string_view s) {
    if (s == "near") return GoldPosition::near;
    if (s == "mid") return GoldPosition::mid;
    if (s == "far") return GoldPosition::far;
    return std::nullopt;
}

int TokenCounter::count(std::string_view text) const {
    if (count_fn) return count_fn(text);
    return static_cast<int>(
        std::ceil(1.35 * static_cast<double>(text::word_count(text))));
}

TokenCounter approx_counter() { return TokenCounter{}; }

int count_tokens(std::string_view text, const TokenCounter& counter) {
    return counter.count(text);
}

std::vector<LabeledDoc> place_gold(std::vector<LabeledDoc> context,
                                   LabeledDoc gold, GoldPosition position) {
    for (const auto& [doc, _] : context) {
        if (doc.id == gold.first.id) {
            fail(ErrorKind::invalid_argument,
                 "gold passage '" + gold.first.id + "' already in context");
        }
    }
    switch (position) {
        case GoldPosition::near:
            context.push_back(std::move(gold));
            break;
        case GoldPosition::far:
            context.insert(context.begin(), std::move(gold));
            break;
        case GoldPosition::mid: {
            const auto at = static_cast<std::ptrdiff_t>(context.size() / 2);
            context.insert(context.begin() + at, std::move(gold));
            break;
        }
    }
    return context;
}

std::vector<Passage> sample_random(
    const Corpus& corpus, int n, std::uint64_t seed,
    const std::unordered_set<std::string>& exclude) {
    if (n < 0) {
        fail(ErrorKind::invalid_argument, "sample size must be >= 0");
    }
    if (n == 0) return {};
    std::vector<const Passage*> pool;
    pool.reserve(corpus.document_count());
    for (const auto& [id, passage] : corpus.passages()) {
        if (!exclude.count(id)) pool.push_back(&passage);
    }
    if (pool.size() < static_cast<std::size_t>(n)) {
        fail(ErrorKind::invalid_argument,
             "cannot sample " + std::to_string(n) + " passages from a pool of " +
                 std::to_string(pool.size()));
    }
    std::mt19937_64 rng(seed);
    std::vector<Passage> out;
    out.reserve(n);
    // Partial Fisher-Yates over the id-sorted pool.
    for (int i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        out.push_back(*pool[i]);
    }
    return out;
}

Passage nonsense_passage(int n_words, std::uint64_t seed,
                         const std::vector<std::string>& lexicon) {
    if (lexicon.empty()) {
        fail(ErrorKind::invalid_argument, "nonsense lexicon must not be empty");
    }
    if (n_words < 1) {
        fail(ErrorKind::invalid_argument, "nonsense passage needs >= 1 word");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, lexicon.size() - 1);
    std::string body;
    for (int i = 0; i < n_words; ++i) {
        if (i > 0) body.push_back(' ');
        body += lexicon[pick(rng)];
    }
    Passage p;
    p.id = "nonsense#" + std::to_string(seed);
    p.title = "Nonsense";
    p.text = std::move(body);
    p.word_count = n_words;
    p.origin = Origin::synthetic;
    return p;
}

const char* to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::same_corpus: return "same_corpus";
        case NoiseKind::alternate_corpus: return "alternate_corpus";
        case NoiseKind::nonsense_words: return "nonsense_words";
    }
    return "same_corpus";
}

std::optional<NoiseKind> noise_kind_from_string(std::string_view s) {
    if (s == "same_corpus") return NoiseKind::same_corpus;
    if (s == "alternate_corpus") return NoiseKind::alternate_corpus;
    if (s == "nonsense_words") return NoiseKind::nonsense_words;
    return std::nullopt;
}

NoiseStream::NoiseStream(NoiseSource source, const Corpus* main_corpus,
                         const Corpus* alternate_corpus,
                         std::vector<std::string> lexicon, int nonsense_words,
                         std::unordered_set<std::string> exclude)
    : source_(source),
      lexicon_(std::move(lexicon)),
      nonsense_words_(nonsense_words) {
    if (source_.kind == NoiseKind::nonsense_words) {
        if (lexicon_.empty()) {
            fail(ErrorKind::invalid_argument,
                 "nonsense noise needs a non-empty lexicon");
        }
        return;
    }
    const Corpus* corpus = source_.kind == NoiseKind::same_corpus
                               ? main_corpus
                               : alternate_corpus;
    if (!corpus) {
        fail(ErrorKind::invalid_argument,
             std::string(to_string(source_.kind)) +
                 " noise needs its corpus to be configured");
    }
    std::vector<const Passage*> pool;
    for (const auto& [id, passage] : corpus->passages()) {
        if (!exclude.count(id)) pool.push_back(&passage);
    }
    std::mt19937_64 rng(source_.seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool_.reserve(pool.size());
    for (const Passage* p : pool) {
        Passage copy = *p;
        if (source_.kind == NoiseKind::alternate_corpus) {
            copy.origin = Origin::alternate_corpus;
        }
        pool_.push_back(std::move(copy));
    }
}

std::optional<Passage> NoiseStream::next() {
    if (source_.kind == NoiseKind::nonsense_words) {
        const std::uint64_t word_seed =
            util::mix_seed(source_.seed, draw_index_);
        Passage p = nonsense_passage(nonsense_words_, word_seed, lexicon_);
        p.id = "nonsense#" + std::to_string(source_.seed) + "-" +
               std::to_string(draw_index_);
        ++draw_index_;
        return p;
    }
    if (pool_pos_ >= pool_.size()) return std::nullopt;
    return pool_[pool_pos_++];
}

std::string render(std::string_view instruction,
                   const std::vector<LabeledDoc>& docs,
                   std::string_view question) {
    std::string out;
    out += instruction;
    out += "\n\nDocuments:\n";
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const Passage& p = docs[i].first;
        out += "Document [" + std::to_string(i + 1) + "] (Title: " + p.title +
               ") " + p.text + "\n";
    }
    out += "\nQuestion: ";
    out += question;
    out += "\nAnswer:";
    return out;
}

const char* to_string(PadLayout layout) {
    switch (layout) {
        case PadLayout::before_context: return "before_context";
        case PadLayout::after_context: return "after_context";
        case PadLayout::split_mid: return "split_mid";
    }
    return "before_context";
}

std::optional<PadLayout> pad_layout_from_string(std::string_view s) {
    if (s == "before_context") return PadLayout::before_context;
    if (s == "after_context") return PadLayout::after_context;
    if (s == "split_mid") return PadLayout::split_mid;
    return std::nullopt;
}

std::vector<LabeledDoc> pad_with_random(std::vector<LabeledDoc> context,
                                        NoiseStream& noise,
                                        std::string_view instruction,
                                        std::string_view question, int budget,
                                        const TokenCounter& counter,
                                        PadLayout layout) {
    std::vector<LabeledDoc> before;
    std::vector<LabeledDoc> after;
    auto assemble = [&]() {
        std::vector<LabeledDoc> all;
        all.reserve(before.size() + context.size() + after.size());
        all.insert(all.end(), before.begin(), before.end());
        all.insert(all.end(), context.begin(), context.end());
        all.insert(all.end(), after.begin(), after.end());
        return all;
    };
    if (counter.count(render(instruction, assemble(), question)) > budget) {
        fail(ErrorKind::invalid_argument,
             "context does not fit the budget before padding");
    }
    std::size_t added = 0;
    while (true) {
        auto doc = noise.next();
        if (!doc) break;
        LabeledDoc labeled{std::move(*doc), DocLabel::random};
        bool to_before = layout == PadLayout::before_context ||
                         (layout == PadLayout::split_mid && added % 2 == 0);
        auto& side = to_before ? before : after;
        side.push_back(std::move(labeled));
        if (counter.count(render(instruction, assemble(), question)) > budget) {
            side.pop_back();
            break;
        }
        ++added;
    }
    return assemble();
}

const std::vector<LabeledDoc>* DocsByClass::for_slot(SlotClass slot) const {
    switch (slot) {
        case SlotClass::gold: return &gold;
        case SlotClass::retrieved: return &retrieved;
        case SlotClass::distracting: return &distracting;
        case SlotClass::random: return &random;
        default: return nullptr;
    }
}

PromptPlan compose(const PromptSchema& schema, std::string_view instruction,
                   const QueryRecord& record, const DocsByClass& docs,
                   int budget, const TokenCounter& counter,
                   const ComposeOptions& options) {
    PromptPlan plan;
    plan.instruction = std::string(instruction);
    plan.question = record.question;
    plan.budget = budget;

    const int bare = counter.count(render(instruction, {}, record.question));
    if (bare > budget) {
        fail(ErrorKind::invalid_argument,
             "instruction and query alone need " + std::to_string(bare) +
                 " tokens but the budget is " + std::to_string(budget));
    }

    const bool reposition_gold =
        options.gold_position.has_value() && schema.has(SlotClass::gold) &&
        !docs.gold.empty();

    std::vector<LabeledDoc> context;
    for (SlotClass slot : schema.interior()) {
        if (slot == SlotClass::gold && reposition_gold) continue;
        if (const auto* list = docs.for_slot(slot)) {
            context.insert(context.end(), list->begin(), list->end());
        }
    }
    if (reposition_gold) {
        for (const auto& gold : docs.gold) {
            context = place_gold(std::move(context), gold,
                                 *options.gold_position);
        }
    }

    // Budget enforcement: drop whole documents starting with the one
    // farthest from the query.
    while (!context.empty() &&
           counter.count(render(instruction, context, record.question)) >
               budget) {
        context.erase(context.begin());
        ++plan.dropped_docs;
    }

    if (options.pad_stream) {
        context =
            pad_with_random(std::move(context), *options.pad_stream,
                            instruction, record.question, budget, counter,
                            options.pad_layout);
    }

    plan.context_docs = std::move(context);
    plan.text = render(instruction, plan.context_docs, record.question);
    plan.token_count = counter.count(plan.text);
    return plan;
}

}  // namespace raglab::prompt
