#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "raglab/gateway.hpp"
#include "raglab/prompt.hpp"
#include "raglab/sparse_index.hpp"

namespace raglab {

extern const char* kDefaultInstruction;

enum class RetrieverKind { none, sparse, dense };

const char* to_string(RetrieverKind kind);

struct PathsConfig {
    std::filesystem::path corpus;
    std::filesystem::path queries;
    std::filesystem::path gold;             // optional
    std::filesystem::path alt_corpus;       // optional
    std::filesystem::path doc_embeddings;   // dense retriever
    std::filesystem::path query_embeddings; // dense retriever
    std::filesystem::path lexicon;          // optional nonsense word list
    std::filesystem::path sparse_index;     // optional prebuilt index
};

/// Fully resolved experiment cell. Produced only by load/validate, which
/// reports every problem at once with its config path.
struct ExperimentConfig {
    std::string preset;  // empty = single cell
    PathsConfig paths;

    RetrieverKind retriever = RetrieverKind::none;
    sparse::Bm25Params bm25;

    std::string schema = "I,gold,Q";
    std::optional<prompt::GoldPosition> gold_position;

    int n_retrieved = 0;
    int n_distracting = 0;
    int n_random = 0;

    prompt::NoiseKind noise_kind = prompt::NoiseKind::same_corpus;
    bool pad_to_budget = false;
    prompt::PadLayout pad_layout = prompt::PadLayout::before_context;
    int nonsense_words = 100;

    int budget_tokens = 0;  // resolved to limit - max_new_tokens when unset
    std::string counter = "approx";  // "approx" | "http"

    gateway::GenerationParams generation;

    gateway::BackendKind backend = gateway::BackendKind::mock;
    gateway::OracleMode mock_mode = gateway::OracleMode::exact_extractive;
    double mock_bias_p = 1.0;
    gateway::HttpConfig http;

    std::uint64_t seed_sampling = 1;
    std::uint64_t seed_noise = 2;
    std::uint64_t seed_mock = 3;

    std::vector<int> eval_topk;
    int max_in_flight = 4;

    std::string instruction = kDefaultInstruction;
    std::filesystem::path output_dir;

    // Placement of this cell in a preset's results grid.
    std::string grid_row;
    std::string grid_col;

    nlohmann::json to_json() const;
};

/// Deep-merges `overrides` onto `base`: objects merge recursively, anything
/// else is replaced.
nlohmann::json merge_config(nlohmann::json base,
                            const nlohmann::json& overrides);

/// Validates and resolves a config document. Relative paths resolve against
/// `workdir`. A document with a "resolved_config" key (a run manifest) is
/// unwrapped first, so a manifest re-runs its experiment.
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& workdir);

ExperimentConfig load_config(const std::filesystem::path& file,
                             const nlohmann::json& overrides,
                             const std::filesystem::path& workdir);

}  // namespace raglab
