#include "raglab/dense_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "raglab/error.hpp"

namespace raglab::dense {
namespace {

constexpr char kMagic[4] = {'R', 'G', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

EmbeddingMatrix EmbeddingMatrix::from_rows(std::vector<std::string> ids,
                                           std::vector<float> data,
                                           std::uint32_t dim) {
    if (dim == 0) {
        fail(ErrorKind::invalid_argument, "embedding dim must be positive");
    }
    if (data.size() != ids.size() * static_cast<std::size_t>(dim)) {
        fail(ErrorKind::invalid_argument,
             "embedding data size " + std::to_string(data.size()) +
                 " does not match " + std::to_string(ids.size()) + " rows x " +
                 std::to_string(dim) + " dims");
    }
    for (float v : data) {
        if (!std::isfinite(v)) {
            fail(ErrorKind::invalid_argument,
                 "embedding matrix contains a non-finite value");
        }
    }
    EmbeddingMatrix m;
    m.dim_ = dim;
    m.ids_ = std::move(ids);
    m.data_ = std::move(data);
    m.by_id_.reserve(m.ids_.size());
    for (std::uint64_t i = 0; i < m.ids_.size(); ++i) {
        auto [it, inserted] = m.by_id_.emplace(m.ids_[i], i);
        if (!inserted) {
            fail(ErrorKind::invalid_argument,
                 "duplicate embedding id '" + m.ids_[i] + "'");
        }
    }
    return m;
}

std::optional<std::uint64_t> EmbeddingMatrix::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingMatrix::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::io, "cannot write embedding file '" + path.string() + "'");
    }
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    out.write(reinterpret_cast<const char*>(&dim_), sizeof(dim_));
    const std::uint64_t count = ids_.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(data_.data()),
              static_cast<std::streamsize>(data_.size() * sizeof(float)));
    for (const auto& id : ids_) {
        if (id.size() > 0xFFFF) {
            fail(ErrorKind::invalid_argument,
                 "embedding id longer than 65535 bytes");
        }
        const auto len = static_cast<std::uint16_t>(id.size());
        out.write(reinterpret_cast<const char*>(&len), sizeof(len));
        out.write(id.data(), len);
    }
    if (!out) {
        fail(ErrorKind::io, "short write to '" + path.string() + "'");
    }
}

EmbeddingMatrix EmbeddingMatrix::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::io, "cannot open embedding file '" + path.string() + "'");
    }
    char magic[4] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        fail(ErrorKind::parse,
             "'" + path.string() + "' is not an embedding file (bad magic)");
    }
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kVersion) {
        fail(ErrorKind::parse,
             "unsupported embedding file version " + std::to_string(version) +
                 " in '" + path.string() + "'");
    }
    std::uint32_t dim = 0;
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in) {
        fail(ErrorKind::parse,
             "embedding file '" + path.string() + "' truncated in header");
    }
    if (dim == 0) {
        fail(ErrorKind::parse,
             "embedding file '" + path.string() + "' declares dim 0");
    }

    std::vector<float> data(static_cast<std::size_t>(count) * dim);
    const auto vector_bytes =
        static_cast<std::streamsize>(data.size() * sizeof(float));
    in.read(reinterpret_cast<char*>(data.data()), vector_bytes);
    if (in.gcount() != vector_bytes) {
        fail(ErrorKind::parse, "embedding file '" + path.string() +
                                   "' truncated in vector section: expected " +
                                   std::to_string(vector_bytes) +
                                   " bytes, got " +
                                   std::to_string(in.gcount()));
    }
    for (float v : data) {
        if (!std::isfinite(v)) {
            fail(ErrorKind::parse, "embedding file '" + path.string() +
                                       "' contains a non-finite value");
        }
    }

    std::vector<std::string> ids;
    ids.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint16_t len = 0;
        in.read(reinterpret_cast<char*>(&len), sizeof(len));
        if (!in) {
            fail(ErrorKind::parse, "embedding file '" + path.string() +
                                       "' truncated in id section at entry " +
                                       std::to_string(i));
        }
        std::string id(len, '\0');
        in.read(id.data(), len);
        if (!in) {
            fail(ErrorKind::parse, "embedding file '" + path.string() +
                                       "' truncated in id section at entry " +
                                       std::to_string(i));
        }
        ids.push_back(std::move(id));
    }
    in.peek();
    if (!in.eof()) {
        fail(ErrorKind::parse, "embedding file '" + path.string() +
                                   "' has trailing bytes after the id section");
    }
    return from_rows(std::move(ids), std::move(data), dim);
}

double dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        fail(ErrorKind::invalid_argument,
             "dot product dimension mismatch: " + std::to_string(a.size()) +
                 " vs " + std::to_string(b.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

std::vector<ScoredDoc> search(const EmbeddingMatrix& matrix,
                              std::span<const float> query, int k,
                              unsigned threads) {
    if (k < 1) {
        fail(ErrorKind::invalid_argument, "k must be >= 1");
    }
    if (query.size() != matrix.dim()) {
        fail(ErrorKind::invalid_argument,
             "query dimension " + std::to_string(query.size()) +
                 " does not match matrix dim " + std::to_string(matrix.dim()));
    }
    for (float v : query) {
        if (!std::isfinite(v)) {
            fail(ErrorKind::invalid_argument, "query vector is not finite");
        }
    }
    const std::uint64_t n = matrix.count();
    if (n == 0) return {};

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(
        std::min<std::uint64_t>(threads, n));

    // Every row's score lands in a fixed slot; partitioning cannot affect
    // the result.
    std::vector<double> scores(n);
    auto scan = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            scores[i] = dot(query, matrix.row(i));
        }
    };
    if (threads <= 1) {
        scan(0, n);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        const std::uint64_t chunk = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t begin = t * chunk;
            const std::uint64_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(scan, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    const std::uint64_t want = std::min<std::uint64_t>(
        static_cast<std::uint64_t>(k), n);
    std::vector<std::uint64_t> order(n);
    for (std::uint64_t i = 0; i < n; ++i) order[i] = i;
    auto better = [&](std::uint64_t a, std::uint64_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return matrix.id(a) < matrix.id(b);
    };
    std::partial_sort(order.begin(),
                      order.begin() + static_cast<std::ptrdiff_t>(want),
                      order.end(), better);

    std::vector<ScoredDoc> out;
    out.reserve(want);
    for (std::uint64_t r = 0; r < want; ++r) {
        const std::uint64_t i = order[r];
        out.push_back(ScoredDoc{matrix.id(i), scores[i],
                                static_cast<int>(r + 1), std::nullopt});
    }
    return out;
}

std::vector<double> retrieval_distribution(std::span<const double> scores) {
    if (scores.empty()) {
        fail(ErrorKind::invalid_argument,
             "retrieval distribution needs at least one score");
    }
    double max_score = scores[0];
    for (double s : scores) {
        if (!std::isfinite(s)) {
            fail(ErrorKind::invalid_argument,
                 "retrieval distribution input contains a non-finite score");
        }
        max_score = std::max(max_score, s);
    }
    std::vector<double> out(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - max_score);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace raglab::dense
