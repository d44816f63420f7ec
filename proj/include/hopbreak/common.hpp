#pragma once

// Shared plumbing: deterministic RNG streams, content hashing, atomic file
// writes, and the small string toolbox used across the pipeline.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hopbreak {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Errors

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AnswerNotLocated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Logging

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, quiet = 4 };

inline LogLevel& log_level() {
    static LogLevel level = LogLevel::warn;
    return level;
}

inline void log(LogLevel lvl, const std::string& msg) {
    static const char* names[] = {"debug", "info", "warn", "error"};
    if (lvl >= log_level() && lvl != LogLevel::quiet) {
        std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
    }
}

// ---------------------------------------------------------------------------
// Hashing

inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 14695981039346656037ULL) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Self-contained SHA-256, used for manifest content hashes.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset() {
        state_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                  0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
        buffer_len_ = 0;
        total_len_ = 0;
    }

    void update(const void* data, size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        total_len_ += len;
        while (len > 0) {
            size_t take = std::min(len, size_t(64) - buffer_len_);
            std::memcpy(buffer_.data() + buffer_len_, p, take);
            buffer_len_ += take;
            p += take;
            len -= take;
            if (buffer_len_ == 64) {
                process_block(buffer_.data());
                buffer_len_ = 0;
            }
        }
    }

    std::string hex_digest() {
        uint64_t bit_len = total_len_ * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (buffer_len_ != 56) update(&zero, 1);
        unsigned char len_bytes[8];
        for (int i = 7; i >= 0; --i) {
            len_bytes[7 - i] = static_cast<unsigned char>((bit_len >> (i * 8)) & 0xff);
        }
        std::memcpy(buffer_.data() + 56, len_bytes, 8);
        process_block(buffer_.data());
        static const char* hexd = "0123456789abcdef";
        std::string out;
        out.reserve(64);
        for (uint32_t w : state_) {
            for (int i = 28; i >= 0; i -= 4) out.push_back(hexd[(w >> i) & 0xf]);
        }
        return out;
    }

    static std::string of_string(std::string_view s) {
        Sha256 h;
        h.update(s.data(), s.size());
        return h.hex_digest();
    }

    static std::string of_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open file for hashing: " + path.string());
        Sha256 h;
        std::array<char, 1 << 16> buf;
        while (in) {
            in.read(buf.data(), buf.size());
            h.update(buf.data(), static_cast<size_t>(in.gcount()));
        }
        return h.hex_digest();
    }

private:
    static uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void process_block(const unsigned char* block) {
        static const uint32_t K[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
            0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
            0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
            0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
            0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
            0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
            0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
            0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
            0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
            0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
        uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (uint32_t(block[i * 4]) << 24) | (uint32_t(block[i * 4 + 1]) << 16) |
                   (uint32_t(block[i * 4 + 2]) << 8) | uint32_t(block[i * 4 + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
        uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
        for (int i = 0; i < 64; ++i) {
            uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            uint32_t ch = (e & f) ^ (~e & g);
            uint32_t t1 = h + S1 + ch + K[i] + w[i];
            uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            uint32_t t2 = S0 + maj;
            h = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        state_[0] += a; state_[1] += b; state_[2] += c; state_[3] += d;
        state_[4] += e; state_[5] += f; state_[6] += g; state_[7] += h;
    }

    std::array<uint32_t, 8> state_;
    std::array<unsigned char, 64> buffer_;
    size_t buffer_len_ = 0;
    uint64_t total_len_ = 0;
};

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// Every generated example derives its own stream from (seed, key), so a run
// partitioned across workers produces the same bytes as a serial run. The
// bounded-int and real draws avoid std::uniform_*_distribution, whose output
// is implementation-defined.

class SplitRng {
public:
    explicit SplitRng(uint64_t seed) : engine_(seed) {}

    SplitRng(uint64_t seed, std::string_view key)
        : engine_(fnv1a64(key, seed ^ 0x9e3779b97f4a7c15ULL)) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0, n)
    uint64_t uniform_int(uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        return next_u64() % n;
    }

    // uniform in [0, 1)
    double uniform_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform_real(double lo, double hi) {
        return lo + (hi - lo) * uniform_real();
    }

    // standard normal via Box-Muller, deterministic across platforms
    double normal() {
        double u1 = uniform_real();
        double u2 = uniform_real();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices out of [0, n), in draw order
    std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
        if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(uniform_int(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Strings

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool ci_equal(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) return false;
    }
    return true;
}

inline size_t ci_find(std::string_view haystack, std::string_view needle, size_t pos = 0) {
    if (needle.empty() || needle.size() > haystack.size()) return std::string::npos;
    for (size_t i = pos; i + needle.size() <= haystack.size(); ++i) {
        if (ci_equal(haystack.substr(i, needle.size()), needle)) return i;
    }
    return std::string::npos;
}

inline bool ci_contains(std::string_view haystack, std::string_view needle) {
    return ci_find(haystack, needle) != std::string::npos;
}

// Replaces every occurrence (case-insensitive) of `from` with `to`, looping
// until no occurrence remains so splice points cannot re-create `from`.
// Requires that `to` itself does not contain `from`.
inline std::string ci_replace_all(std::string_view text, std::string_view from,
                                  std::string_view to, int max_rounds = 16) {
    if (from.empty() || ci_contains(to, from)) {
        throw GenerationError("ci_replace_all: replacement would not terminate");
    }
    std::string cur(text);
    for (int round = 0; round < max_rounds; ++round) {
        if (!ci_contains(cur, from)) return cur;
        std::string next;
        next.reserve(cur.size());
        size_t pos = 0;
        while (pos < cur.size()) {
            size_t hit = ci_find(cur, from, pos);
            if (hit == std::string::npos) {
                next.append(cur, pos, std::string::npos);
                break;
            }
            next.append(cur, pos, hit - pos);
            next.append(to);
            pos = hit + from.size();
        }
        cur = std::move(next);
    }
    if (ci_contains(cur, from)) {
        throw GenerationError("ci_replace_all: no fixed point after max rounds");
    }
    return cur;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

// Splits a token into (leading punctuation, core, trailing punctuation).
struct TokenParts {
    std::string prefix;
    std::string core;
    std::string suffix;
};

inline TokenParts strip_punct_edges(std::string_view token) {
    size_t begin = 0;
    size_t end = token.size();
    auto is_word = [](unsigned char c) { return std::isalnum(c) != 0; };
    while (begin < end && !is_word(static_cast<unsigned char>(token[begin]))) ++begin;
    while (end > begin && !is_word(static_cast<unsigned char>(token[end - 1]))) --end;
    return {std::string(token.substr(0, begin)),
            std::string(token.substr(begin, end - begin)),
            std::string(token.substr(end))};
}

// Transfers the casing pattern of `original` onto `replacement`
// (all-caps, initial cap, else as-is). GloVe vocabularies are lowercase.
inline std::string match_case(std::string_view original, std::string replacement) {
    if (original.empty() || replacement.empty()) return replacement;
    bool all_upper = true;
    bool any_alpha = false;
    for (unsigned char c : original) {
        if (std::isalpha(c)) {
            any_alpha = true;
            if (!std::isupper(c)) { all_upper = false; break; }
        }
    }
    if (any_alpha && all_upper && original.size() > 1) {
        for (auto& c : replacement) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return replacement;
    }
    if (std::isupper(static_cast<unsigned char>(original[0]))) {
        replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
    }
    return replacement;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write via temp file in the same directory, then rename into place.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(fnv1a64(path.string()) & 0xffffff);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open temp file for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("rename failed for " + path.string() + ": " + ec.message());
    }
}

}  // namespace hopbreak
