#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "raglab/types.hpp"

namespace raglab::dense {

/// Row-major store of 32-bit embedding vectors with id-aligned rows.
/// Immutable after construction; concurrent queries are safe.
///
/// File format (little-endian): magic "RGE1", u32 version = 1, u32 dim,
/// u64 count, count*dim float32 row-major, then count id entries of
/// u16 byte-length + UTF-8 bytes.
class EmbeddingMatrix {
public:
    static EmbeddingMatrix from_rows(std::vector<std::string> ids,
                                     std::vector<float> data,
                                     std::uint32_t dim);

    static EmbeddingMatrix load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::uint32_t dim() const { return dim_; }
    std::uint64_t count() const { return ids_.size(); }

    std::span<const float> row(std::uint64_t i) const {
        return {data_.data() + i * dim_, dim_};
    }
    const std::string& id(std::uint64_t i) const { return ids_[i]; }
    std::optional<std::uint64_t> find(std::string_view id) const;

private:
    std::uint32_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::uint64_t> by_id_;
};

/// Inner product accumulated in 64-bit precision, sequentially over
/// components. Dimension mismatch is an error.
double dot(std::span<const float> a, std::span<const float> b);

/// Exact top-k by inner product: full scan, score descending, ties broken by
/// passage id ascending. Only across-row work is parallel; each row's
/// accumulation is sequential, so results are identical for any thread
/// count. threads = 0 uses the hardware concurrency.
std::vector<ScoredDoc> search(const EmbeddingMatrix& matrix,
                              std::span<const float> query, int k,
                              unsigned threads = 0);

/// Softmax over raw retrieval scores with max-subtraction stabilization.
std::vector<double> retrieval_distribution(std::span<const double> scores);

}  // namespace raglab::dense
