#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "raglab/corpus.hpp"
#include "raglab/types.hpp"

namespace raglab::prompt {

enum class SlotClass {
    instruction,
    gold,
    retrieved,
    distracting,
    random,
    query,
};

const char* to_string(SlotClass slot);

/// Ordered slot classes; instruction first, query last, no class repeated.
/// Parsed from the compact notation "I,random,gold,Q".
struct PromptSchema {
    std::vector<SlotClass> slots;

    static PromptSchema parse(std::string_view spec);
    std::string to_string() const;
    bool has(SlotClass slot) const;
    /// Slots between instruction and query, in order.
    std::vector<SlotClass> interior() const;
};

enum class GoldPosition { near, mid, far };

const char* to_string(GoldPosition position);
std::optional<GoldPosition> gold_position_from_string(std::string_view s);

/// Token counting for context budgeting. The default approximation is
/// ceil(1.35 * whitespace words); exact counters (e.g. a model server's
/// tokenize endpoint) plug in through count_fn.
struct TokenCounter {
    std::string name = "approx";
    std::function<int(std::string_view)> count_fn;

    int count(std::string_view text) const;
};

TokenCounter approx_counter();

int count_tokens(std::string_view text, const TokenCounter& counter);

using LabeledDoc = std::pair<Passage, DocLabel>;

/// Inserts the gold document:
///   near — last (adjacent to the query)
///   far  — first (as far as possible from the query)
///   mid  — index floor(n/2) of the resulting list
/// Relative order of other documents is preserved.
std::vector<LabeledDoc> place_gold(std::vector<LabeledDoc> context,
                                   LabeledDoc gold, GoldPosition position);

/// n distinct passages drawn without replacement, none from `exclude`,
/// deterministic under seed. Candidates are considered in ascending id
/// order, so the draw is independent of how the corpus was built.
std::vector<Passage> sample_random(
    const Corpus& corpus, int n, std::uint64_t seed,
    const std::unordered_set<std::string>& exclude);

/// A passage of exactly n_words words drawn uniformly with replacement from
/// the lexicon; origin synthetic, deterministic under seed.
Passage nonsense_passage(int n_words, std::uint64_t seed,
                         const std::vector<std::string>& lexicon);

enum class NoiseKind { same_corpus, alternate_corpus, nonsense_words };

const char* to_string(NoiseKind kind);
std::optional<NoiseKind> noise_kind_from_string(std::string_view s);

struct NoiseSource {
    NoiseKind kind = NoiseKind::same_corpus;
    std::uint64_t seed = 0;
};

/// Deterministic document sequence for one prompt's noise. Corpus-backed
/// kinds draw a random permutation of the non-excluded passages and are
/// finite; nonsense_words is unbounded.
class NoiseStream {
public:
    NoiseStream(NoiseSource source, const Corpus* main_corpus,
                const Corpus* alternate_corpus,
                std::vector<std::string> lexicon, int nonsense_words,
                std::unordered_set<std::string> exclude);

    std::optional<Passage> next();
    NoiseKind kind() const { return source_.kind; }

private:
    NoiseSource source_;
    std::vector<Passage> pool_;   // pre-shuffled, corpus kinds only
    std::size_t pool_pos_ = 0;
    std::vector<std::string> lexicon_;
    int nonsense_words_ = 100;
    std::uint64_t draw_index_ = 0;
};

/// The rendered prompt bytes:
///   <instruction>\n\nDocuments:\n<doc lines>\n\nQuestion: <q>\nAnswer:
/// with each document on its own "Document [i] (Title: <t>) <text>" line.
std::string render(std::string_view instruction,
                   const std::vector<LabeledDoc>& docs,
                   std::string_view question);

enum class PadLayout { before_context, after_context, split_mid };

const char* to_string(PadLayout layout);
std::optional<PadLayout> pad_layout_from_string(std::string_view s);

/// Adds noise documents around the existing context until the next one
/// would push the rendered prompt past the budget. before_context puts
/// noise ahead of the context, after_context behind it, split_mid
/// alternates (first doc before, second after, ...). Existing context is
/// never removed or reordered.
std::vector<LabeledDoc> pad_with_random(std::vector<LabeledDoc> context,
                                        NoiseStream& noise,
                                        std::string_view instruction,
                                        std::string_view question, int budget,
                                        const TokenCounter& counter,
                                        PadLayout layout);

struct DocsByClass {
    std::vector<LabeledDoc> gold;
    std::vector<LabeledDoc> retrieved;
    std::vector<LabeledDoc> distracting;
    std::vector<LabeledDoc> random;

    const std::vector<LabeledDoc>* for_slot(SlotClass slot) const;
};

struct PromptPlan {
    std::string instruction;
    std::vector<LabeledDoc> context_docs;
    std::string question;
    std::string text;  // exact bytes a backend receives
    int token_count = 0;
    int budget = 0;
    int dropped_docs = 0;  // whole documents dropped to satisfy the budget
};

struct ComposeOptions {
    /// Overrides the gold slot's schema position via place_gold.
    std::optional<GoldPosition> gold_position;
    /// When set, pads the realized context to the budget.
    NoiseStream* pad_stream = nullptr;
    PadLayout pad_layout = PadLayout::before_context;
};

/// Realizes the schema into an ordered context, applies gold placement and
/// optional padding, enforces the budget by dropping whole documents from
/// the end farthest from the query, and renders the final prompt.
/// Instruction and query are never dropped; if they alone exceed the
/// budget, composition fails.
PromptPlan compose(const PromptSchema& schema, std::string_view instruction,
                   const QueryRecord& record, const DocsByClass& docs,
                   int budget, const TokenCounter& counter,
                   const ComposeOptions& options = {});

}  // namespace raglab::prompt
