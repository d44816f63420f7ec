#pragma once

// Pretrained word vectors and the queries fake-answer generation needs:
// top-k nearest neighbors under cosine similarity and the common-substring
// overlap filter. Tables are immutable after load; queries are const.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "hopbreak/common.hpp"

namespace hopbreak {

struct EmbedLoadReport {
    size_t loaded = 0;
    size_t skipped_bad_arity = 0;
    size_t skipped_duplicates = 0;
};

class EmbeddingTable {
public:
    EmbeddingTable() = default;

    EmbeddingTable(int dim, std::vector<std::string> words, Eigen::MatrixXd matrix)
        : dim_(dim), words_(std::move(words)), matrix_(std::move(matrix)) {
        if (matrix_.cols() != dim_ || matrix_.rows() != static_cast<Eigen::Index>(words_.size()))
            throw std::invalid_argument("EmbeddingTable: shape mismatch");
        for (size_t i = 0; i < words_.size(); ++i) vocab_.emplace(words_[i], i);
        norms_ = matrix_.rowwise().norm();
    }

    int dim() const { return dim_; }
    size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const Eigen::VectorXd& norms() const { return norms_; }

    // Lowercased form first, raw casing as fallback.
    std::optional<size_t> lookup(std::string_view word) const {
        auto it = vocab_.find(to_lower(word));
        if (it != vocab_.end()) return it->second;
        it = vocab_.find(std::string(word));
        if (it != vocab_.end()) return it->second;
        return std::nullopt;
    }

    Eigen::VectorXd row(size_t i) const { return matrix_.row(static_cast<Eigen::Index>(i)); }

private:
    int dim_ = 0;
    std::vector<std::string> words_;
    std::unordered_map<std::string, size_t> vocab_;
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd norms_;
};

// ---------------------------------------------------------------------------
// Loading

namespace detail {

inline bool parse_double(std::string_view tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace detail

// Whitespace-separated text, one word plus `dim` floats per line. Lines with
// the wrong arity are skipped and counted; duplicate words keep the first
// occurrence. A file yielding zero valid rows is a hard error.
inline EmbeddingTable load_embeddings(const std::filesystem::path& path, int dim,
                                      EmbedLoadReport* report = nullptr) {
    if (dim <= 0) throw std::invalid_argument("load_embeddings: dim must be positive");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file: " + path.string());

    std::vector<std::string> words;
    std::vector<double> values;
    std::unordered_map<std::string, size_t> seen;
    EmbedLoadReport rep;

    std::string line;
    std::vector<double> row(static_cast<size_t>(dim));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        size_t pos = 0;
        while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        std::string word = line.substr(0, pos);
        int got = 0;
        bool ok = !word.empty();
        while (ok && pos < line.size()) {
            while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
            if (pos >= line.size()) break;
            size_t end = pos;
            while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
            if (got >= dim) { ok = false; break; }
            double v;
            if (!detail::parse_double(std::string_view(line).substr(pos, end - pos), v)) { ok = false; break; }
            row[static_cast<size_t>(got++)] = v;
            pos = end;
        }
        if (!ok || got != dim) {
            rep.skipped_bad_arity++;
            continue;
        }
        if (seen.count(word)) {
            rep.skipped_duplicates++;
            continue;
        }
        seen.emplace(word, words.size());
        words.push_back(std::move(word));
        values.insert(values.end(), row.begin(), row.end());
    }
    rep.loaded = words.size();
    if (report) *report = rep;
    if (words.empty()) throw IoError("no valid embedding rows in " + path.string());

    Eigen::MatrixXd m(static_cast<Eigen::Index>(words.size()), dim);
    for (size_t i = 0; i < words.size(); ++i)
        for (int j = 0; j < dim; ++j)
            m(static_cast<Eigen::Index>(i), j) = values[i * static_cast<size_t>(dim) + static_cast<size_t>(j)];
    return EmbeddingTable(dim, std::move(words), std::move(m));
}

// Binary cache: magic + version + dim + count, then length-prefixed words and
// raw little-endian doubles. Reload must reproduce identical query results.
inline constexpr const char kEmbedCacheMagic[8] = {'H', 'B', 'E', 'C', '0', '0', '0', '1'};

inline void save_embedding_cache(const EmbeddingTable& t, const std::filesystem::path& path) {
    std::string out;
    out.append(kEmbedCacheMagic, sizeof(kEmbedCacheMagic));
    auto put_u64 = [&](uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (i * 8)) & 0xff));
    };
    put_u64(static_cast<uint64_t>(t.dim()));
    put_u64(t.size());
    for (const auto& w : t.words()) {
        put_u64(w.size());
        out.append(w);
    }
    for (size_t i = 0; i < t.size(); ++i) {
        for (int j = 0; j < t.dim(); ++j) {
            double v = t.matrix()(static_cast<Eigen::Index>(i), j);
            uint64_t bits;
            std::memcpy(&bits, &v, 8);
            put_u64(bits);
        }
    }
    atomic_write_file(path, out);
}

inline EmbeddingTable load_embedding_cache(const std::filesystem::path& path) {
    std::string data = read_file(path);
    size_t pos = 0;
    auto need = [&](size_t n) {
        if (pos + n > data.size()) throw IoError("embedding cache truncated: " + path.string());
    };
    need(sizeof(kEmbedCacheMagic));
    if (std::memcmp(data.data(), kEmbedCacheMagic, sizeof(kEmbedCacheMagic)) != 0)
        throw IoError("bad embedding cache header: " + path.string());
    pos = sizeof(kEmbedCacheMagic);
    auto get_u64 = [&]() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(data[pos + static_cast<size_t>(i)])) << (i * 8);
        pos += 8;
        return v;
    };
    int dim = static_cast<int>(get_u64());
    size_t count = get_u64();
    std::vector<std::string> words(count);
    for (size_t i = 0; i < count; ++i) {
        size_t len = get_u64();
        need(len);
        words[i] = data.substr(pos, len);
        pos += len;
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(count), dim);
    for (size_t i = 0; i < count; ++i) {
        for (int j = 0; j < dim; ++j) {
            uint64_t bits = get_u64();
            double v;
            std::memcpy(&v, &bits, 8);
            m(static_cast<Eigen::Index>(i), j) = v;
        }
    }
    return EmbeddingTable(dim, std::move(words), std::move(m));
}

// ---------------------------------------------------------------------------
// Queries

struct Neighbor {
    std::string word;
    double similarity = 0.0;
};

enum class SimilarityMetric { cosine, euclidean };

// Top-k by descending similarity, query word excluded, ties broken by
// vocabulary order. Returns nullopt for out-of-vocabulary queries (the
// caller's signal to fall back to pool sampling).
inline std::optional<std::vector<Neighbor>> nearest_neighbors(
    const EmbeddingTable& t, std::string_view word, int k,
    SimilarityMetric metric = SimilarityMetric::cosine) {
    if (k < 1) throw std::invalid_argument("nearest_neighbors: k must be >= 1");
    auto row_opt = t.lookup(word);
    if (!row_opt) return std::nullopt;
    const auto q_idx = static_cast<Eigen::Index>(*row_opt);
    Eigen::VectorXd q = t.matrix().row(q_idx);

    Eigen::VectorXd score;
    if (metric == SimilarityMetric::cosine) {
        double qn = t.norms()(q_idx);
        score = t.matrix() * q;
        for (Eigen::Index i = 0; i < score.size(); ++i) {
            double denom = t.norms()(i) * qn;
            score(i) = denom > 0 ? score(i) / denom : -1.0;
        }
    } else {
        // negated distance so "descending similarity" holds for both metrics
        score.resize(t.matrix().rows());
        for (Eigen::Index i = 0; i < score.size(); ++i)
            score(i) = -(t.matrix().row(i).transpose() - q).norm();
    }

    std::vector<Eigen::Index> order;
    order.reserve(t.size() - 1);
    for (Eigen::Index i = 0; i < score.size(); ++i)
        if (i != q_idx) order.push_back(i);
    size_t take = std::min<size_t>(static_cast<size_t>(k), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                          if (score(a) != score(b)) return score(a) > score(b);
                          return a < b;
                      });
    std::vector<Neighbor> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i)
        out.push_back({t.words()[static_cast<size_t>(order[i])], score(order[i])});
    return out;
}

// True iff a and b share a common substring strictly longer than `limit`,
// case-insensitively. Rolling-array DP over longest common suffixes.
inline bool has_substring_overlap(std::string_view a, std::string_view b, int limit) {
    if (limit < 0) limit = 0;
    std::string la = to_lower(a);
    std::string lb = to_lower(b);
    if (static_cast<int>(la.size()) <= limit || static_cast<int>(lb.size()) <= limit) return false;
    std::vector<int> prev(lb.size() + 1, 0), cur(lb.size() + 1, 0);
    for (size_t i = 1; i <= la.size(); ++i) {
        for (size_t j = 1; j <= lb.size(); ++j) {
            if (la[i - 1] == lb[j - 1]) {
                cur[j] = prev[j - 1] + 1;
                if (cur[j] > limit) return true;
            } else {
                cur[j] = 0;
            }
        }
        std::swap(prev, cur);
    }
    return false;
}

namespace detail {
inline std::optional<std::string> select_substitute(std::string_view word,
                                                    const std::vector<Neighbor>& neighbors,
                                                    int limit);
}

// First neighbor by similarity rank that passes the overlap filter against
// the query, and that neither contains nor is contained by it. None when the
// word is OOV or all k neighbors fail.
inline std::optional<std::string> substitution_candidate(const EmbeddingTable& t,
                                                         std::string_view word, int k = 10,
                                                         int limit = 3,
                                                         SimilarityMetric metric = SimilarityMetric::cosine) {
    auto neighbors = nearest_neighbors(t, word, k, metric);
    if (!neighbors) return std::nullopt;
    return detail::select_substitute(word, *neighbors, limit);
}

namespace detail {

// shared post-filter so the batched and per-word paths cannot diverge
inline std::optional<std::string> select_substitute(std::string_view word,
                                                    const std::vector<Neighbor>& neighbors,
                                                    int limit) {
    for (const auto& n : neighbors) {
        if (has_substring_overlap(word, n.word, limit)) continue;
        if (ci_contains(n.word, word) || ci_contains(word, n.word)) continue;
        return n.word;
    }
    return std::nullopt;
}

}  // namespace detail

// Memoized substitution lookup. Answer words repeat heavily across a dataset
// and each nearest-neighbor scan is a full pass over the vocabulary, so
// dataset-scale generation funnels queries through this cache. warm_up()
// batches the vocabulary scans of many queries into chunked matrix products,
// which is what makes whole-dataset generation against a 400k-word table
// finish in seconds instead of minutes; its results are identical to the
// per-word path. Safe to share across generation workers.
class Substituter {
public:
    Substituter(const EmbeddingTable& table, int k = 10, int limit = 3,
                SimilarityMetric metric = SimilarityMetric::cosine)
        : table_(table), k_(k), limit_(limit), metric_(metric) {}

    std::optional<std::string> operator()(const std::string& word) const {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = memo_.find(word);
            if (it != memo_.end()) return it->second;
        }
        auto result = substitution_candidate(table_, word, k_, limit_, metric_);
        std::lock_guard<std::mutex> lock(mu_);
        memo_.emplace(word, result);
        return result;
    }

    // Resolves a batch of queries through chunked GEMMs (cosine metric only;
    // other metrics fall back to per-word scans). Shards across workers; the
    // memo contents are identical for any worker count.
    void warm_up(const std::vector<std::string>& words, unsigned n_workers = 1) const {
        std::vector<std::string> todo;
        {
            std::lock_guard<std::mutex> lock(mu_);
            std::unordered_set<std::string> seen;
            for (const auto& w : words) {
                if (memo_.count(w) || !seen.insert(w).second) continue;
                todo.push_back(w);
            }
        }
        if (metric_ != SimilarityMetric::cosine) {
            for (const auto& w : todo) (*this)(w);
            return;
        }
        if (n_workers > 1 && todo.size() > 1) {
            unsigned workers = std::min<unsigned>(n_workers, static_cast<unsigned>(todo.size()));
            size_t shard = (todo.size() + workers - 1) / workers;
            std::vector<std::thread> threads;
            for (unsigned w = 0; w < workers; ++w) {
                size_t begin = w * shard;
                size_t end = std::min(todo.size(), begin + shard);
                if (begin >= end) break;
                threads.emplace_back([this, slice = std::vector<std::string>(
                                                todo.begin() + static_cast<std::ptrdiff_t>(begin),
                                                todo.begin() + static_cast<std::ptrdiff_t>(end))] {
                    warm_up_serial(slice);
                });
            }
            for (auto& t : threads) t.join();
            return;
        }
        warm_up_serial(todo);
    }

    const EmbeddingTable& table() const { return table_; }

private:
    void warm_up_serial(const std::vector<std::string>& todo) const {
        constexpr size_t kChunk = 64;
        const Eigen::MatrixXd& m = table_.matrix();
        for (size_t begin = 0; begin < todo.size(); begin += kChunk) {
            size_t count = std::min(kChunk, todo.size() - begin);
            std::vector<std::optional<size_t>> rows(count);
            Eigen::MatrixXd queries(table_.dim(), static_cast<Eigen::Index>(count));
            queries.setZero();
            for (size_t b = 0; b < count; ++b) {
                rows[b] = table_.lookup(todo[begin + b]);
                if (rows[b])
                    queries.col(static_cast<Eigen::Index>(b)) =
                        m.row(static_cast<Eigen::Index>(*rows[b])).transpose();
            }
            Eigen::MatrixXd dots = m * queries;  // |V| x count

            for (size_t b = 0; b < count; ++b) {
                const std::string& word = todo[begin + b];
                if (!rows[b]) {
                    std::lock_guard<std::mutex> lock(mu_);
                    memo_.emplace(word, std::nullopt);
                    continue;
                }
                auto q_idx = static_cast<Eigen::Index>(*rows[b]);
                double qn = table_.norms()(q_idx);
                Eigen::VectorXd score(m.rows());
                for (Eigen::Index i = 0; i < m.rows(); ++i) {
                    double denom = table_.norms()(i) * qn;
                    score(i) = denom > 0 ? dots(i, static_cast<Eigen::Index>(b)) / denom : -1.0;
                }
                std::vector<Eigen::Index> order;
                order.reserve(static_cast<size_t>(m.rows()) - 1);
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                    if (i != q_idx) order.push_back(i);
                size_t take = std::min<size_t>(static_cast<size_t>(k_), order.size());
                std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                                  order.end(), [&](Eigen::Index a, Eigen::Index c) {
                                      if (score(a) != score(c)) return score(a) > score(c);
                                      return a < c;
                                  });
                std::vector<Neighbor> neighbors;
                neighbors.reserve(take);
                for (size_t i = 0; i < take; ++i)
                    neighbors.push_back({table_.words()[static_cast<size_t>(order[i])], score(order[i])});
                auto result = detail::select_substitute(word, neighbors, limit_);
                std::lock_guard<std::mutex> lock(mu_);
                memo_.emplace(word, result);
            }
        }
    }

    const EmbeddingTable& table_;
    int k_;
    int limit_;
    SimilarityMetric metric_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::string, std::optional<std::string>> memo_;
};

}  // namespace hopbreak
