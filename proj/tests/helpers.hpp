#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "raglab/corpus.hpp"
#include "raglab/types.hpp"

namespace testutil {

inline std::string random_word(std::mt19937_64& rng, int max_len = 8) {
    static const char* alphabet = "abcdefghijklmnopqrstuvwxyz";
    std::uniform_int_distribution<int> len(1, max_len);
    std::uniform_int_distribution<int> pick(0, 25);
    std::string w;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) w.push_back(alphabet[pick(rng)]);
    return w;
}

inline std::string random_text(std::mt19937_64& rng, int n_words,
                               int vocab = 0) {
    std::string text;
    std::uniform_int_distribution<int> pick(0, vocab > 0 ? vocab - 1 : 0);
    for (int i = 0; i < n_words; ++i) {
        if (i > 0) text.push_back(' ');
        if (vocab > 0) {
            text += "w" + std::to_string(pick(rng));
        } else {
            text += random_word(rng);
        }
    }
    return text;
}

inline raglab::Passage passage(std::string id, std::string text,
                               std::string title = "t") {
    raglab::Passage p;
    p.id = std::move(id);
    p.title = std::move(title);
    p.text = std::move(text);
    p.word_count = 0;
    for (std::size_t i = 0; i < p.text.size();) {
        while (i < p.text.size() && p.text[i] == ' ') ++i;
        if (i < p.text.size()) ++p.word_count;
        while (i < p.text.size() && p.text[i] != ' ') ++i;
    }
    return p;
}

inline raglab::QueryRecord query(std::string id, std::string question,
                                 std::vector<std::string> answers,
                                 std::string gold_id = "") {
    raglab::QueryRecord r;
    r.id = std::move(id);
    r.question = std::move(question);
    r.answers = std::move(answers);
    if (!gold_id.empty()) r.gold_passage_id = std::move(gold_id);
    return r;
}

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("raglab_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const {
        return path_ / name;
    }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace testutil
