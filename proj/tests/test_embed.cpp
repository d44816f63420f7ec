#include <catch2/catch_amalgamated.hpp>

#include "hopbreak/embed.hpp"
#include "support/fixtures.hpp"

using namespace hopbreak;
namespace ht = hopbreak::testing;

namespace {

// exhaustive cosine scan, full sort; independent of the production query path
std::vector<Neighbor> brute_force_neighbors(const EmbeddingTable& t, const std::string& word,
                                            int k) {
    auto idx = t.lookup(word);
    REQUIRE(idx.has_value());
    Eigen::VectorXd q = t.row(*idx);
    double qn = q.norm();
    std::vector<std::pair<double, size_t>> scored;
    for (size_t i = 0; i < t.size(); ++i) {
        if (i == *idx) continue;
        Eigen::VectorXd r = t.row(i);
        double denom = r.norm() * qn;
        scored.emplace_back(denom > 0 ? r.dot(q) / denom : -1.0, i);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<Neighbor> out;
    for (int i = 0; i < k && i < static_cast<int>(scored.size()); ++i)
        out.push_back({t.words()[scored[static_cast<size_t>(i)].second],
                       scored[static_cast<size_t>(i)].first});
    return out;
}

// longest common substring length > limit, checked by sliding every window of
// length limit+1 of a over b
bool overlap_oracle(const std::string& a, const std::string& b, int limit) {
    std::string la = to_lower(a);
    std::string lb = to_lower(b);
    size_t w = static_cast<size_t>(limit) + 1;
    if (la.size() < w || lb.size() < w) return false;
    for (size_t i = 0; i + w <= la.size(); ++i) {
        if (lb.find(la.substr(i, w)) != std::string::npos) return true;
    }
    return false;
}

EmbeddingTable random_table(size_t n, int dim, uint64_t seed) {
    SplitRng rng(seed, "random-table");
    std::vector<std::string> words;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), dim);
    for (size_t i = 0; i < n; ++i) {
        words.push_back("w" + std::to_string(i));
        for (int j = 0; j < dim; ++j) m(static_cast<Eigen::Index>(i), j) = rng.normal();
    }
    return EmbeddingTable(dim, std::move(words), std::move(m));
}

}  // namespace

TEST_CASE("load_embeddings") {
    ht::TempDir tmp("embed");
    SECTION("three-line toy file") {
        atomic_write_file(tmp.path() / "toy.txt", "cat 1.0 0.0\ndog 0.0 1.0\neel 0.5 0.5\n");
        EmbedLoadReport report;
        EmbeddingTable t = load_embeddings(tmp.path() / "toy.txt", 2, &report);
        CHECK(t.size() == 3);
        CHECK(t.dim() == 2);
        CHECK(report.loaded == 3);
        CHECK(report.skipped_bad_arity == 0);
    }
    SECTION("malformed line among ten is skipped and counted") {
        std::string content;
        for (int i = 0; i < 10; ++i) {
            if (i == 4) content += "broken 1.0\n";  // wrong arity
            else content += "word" + std::to_string(i) + " 0.5 0.5 0.5\n";
        }
        atomic_write_file(tmp.path() / "mixed.txt", content);
        EmbedLoadReport report;
        EmbeddingTable t = load_embeddings(tmp.path() / "mixed.txt", 3, &report);
        CHECK(t.size() == 9);
        CHECK(report.skipped_bad_arity == 1);
    }
    SECTION("non-numeric field is a bad line") {
        atomic_write_file(tmp.path() / "nan.txt", "ok 1.0 2.0\nbad x 2.0\n");
        EmbedLoadReport report;
        EmbeddingTable t = load_embeddings(tmp.path() / "nan.txt", 2, &report);
        CHECK(t.size() == 1);
        CHECK(report.skipped_bad_arity == 1);
    }
    SECTION("duplicates keep the first occurrence") {
        atomic_write_file(tmp.path() / "dup.txt", "cat 1.0 0.0\ncat 0.0 9.0\n");
        EmbedLoadReport report;
        EmbeddingTable t = load_embeddings(tmp.path() / "dup.txt", 2, &report);
        CHECK(t.size() == 1);
        CHECK(report.skipped_duplicates == 1);
        CHECK(t.row(0)(0) == 1.0);
    }
    SECTION("zero valid lines is fatal") {
        atomic_write_file(tmp.path() / "empty.txt", "junk\n");
        CHECK_THROWS_AS(load_embeddings(tmp.path() / "empty.txt", 2), IoError);
    }
}

TEST_CASE("nearest_neighbors") {
    EmbeddingTable toy = ht::make_toy_table();
    SECTION("engineered city cluster order") {
        auto ns = nearest_neighbors(toy, "mumbai", 10);
        REQUIRE(ns.has_value());
        REQUIRE_FALSE(ns->empty());
        CHECK((*ns)[0].word == "delhi");
        bool has_delhi = false;
        for (const auto& n : *ns)
            if (n.word == "delhi") has_delhi = true;
        CHECK(has_delhi);
    }
    SECTION("two-word table returns the single other word") {
        EmbeddingTable two(2, {"aa", "bb"}, (Eigen::MatrixXd(2, 2) << 1, 0, 0, 1).finished());
        auto ns = nearest_neighbors(two, "aa", 5);
        REQUIRE(ns.has_value());
        REQUIRE(ns->size() == 1);
        CHECK((*ns)[0].word == "bb");
    }
    SECTION("similarities are non-increasing") {
        auto ns = nearest_neighbors(toy, "goalkeeper", 20);
        REQUIRE(ns.has_value());
        for (size_t i = 1; i < ns->size(); ++i)
            CHECK((*ns)[i - 1].similarity >= (*ns)[i].similarity);
    }
    SECTION("OOV signals absence") {
        CHECK_FALSE(nearest_neighbors(toy, "zzzz", 3).has_value());
    }
    SECTION("query is case-normalized") {
        auto ns = nearest_neighbors(toy, "Mumbai", 3);
        REQUIRE(ns.has_value());
        CHECK((*ns)[0].word == "delhi");
    }
    SECTION("agrees with the exhaustive oracle on a random table") {
        EmbeddingTable t = random_table(300, 12, 2024);
        for (int trial = 0; trial < 25; ++trial) {
            std::string word = "w" + std::to_string(trial * 11 % 300);
            auto fast = nearest_neighbors(t, word, 10);
            auto slow = brute_force_neighbors(t, word, 10);
            REQUIRE(fast.has_value());
            REQUIRE(fast->size() == slow.size());
            for (size_t i = 0; i < slow.size(); ++i) {
                CHECK((*fast)[i].word == slow[i].word);
                CHECK((*fast)[i].similarity == Catch::Approx(slow[i].similarity).epsilon(1e-12));
            }
        }
    }
    SECTION("deterministic across calls") {
        auto a = nearest_neighbors(toy, "palace", 6);
        auto b = nearest_neighbors(toy, "palace", 6);
        REQUIRE(a.has_value());
        REQUIRE(b.has_value());
        REQUIRE(a->size() == b->size());
        for (size_t i = 0; i < a->size(); ++i) CHECK((*a)[i].word == (*b)[i].word);
    }
}

TEST_CASE("has_substring_overlap") {
    CHECK(has_substring_overlap("Goalkeeper", "goalkeepers", 3));
    CHECK_FALSE(has_substring_overlap("Mumbai", "Delhi", 3));
    CHECK(has_substring_overlap("abcdX", "Yabcd", 3));
    CHECK_FALSE(has_substring_overlap("abc", "abc", 3));  // length 3 is not > 3
    CHECK(has_substring_overlap("abcd", "abcd", 3));

    SECTION("randomized pairs match the window-scan oracle") {
        SplitRng rng(31);
        const std::string alphabet = "abcde";
        for (int trial = 0; trial < 500; ++trial) {
            auto rand_str = [&](size_t len) {
                std::string s;
                for (size_t i = 0; i < len; ++i)
                    s += alphabet[static_cast<size_t>(rng.uniform_int(alphabet.size()))];
                return s;
            };
            std::string a = rand_str(3 + rng.uniform_int(10));
            std::string b = rand_str(3 + rng.uniform_int(10));
            int limit = static_cast<int>(rng.uniform_int(5));
            CHECK(has_substring_overlap(a, b, limit) == overlap_oracle(a, b, limit));
        }
    }
}

TEST_CASE("substitution_candidate") {
    EmbeddingTable toy = ht::make_toy_table();
    SECTION("city substitution") {
        auto sub = substitution_candidate(toy, "mumbai");
        REQUIRE(sub.has_value());
        CHECK(*sub == "delhi");
    }
    SECTION("overlapping nearest neighbor is rejected") {
        auto sub = substitution_candidate(toy, "goalkeeper");
        REQUIRE(sub.has_value());
        CHECK(*sub == "defender");
    }
    SECTION("OOV word yields no candidate") {
        CHECK_FALSE(substitution_candidate(toy, "qqqq").has_value());
    }
    SECTION("no candidate when all k neighbors overlap") {
        // every other word shares a >3-char substring with the query
        std::vector<std::string> words = {"abcdef", "abcdeg", "abcdeh", "abcdei"};
        Eigen::MatrixXd m(4, 3);
        m << 1, 0, 0, 0.9, 0.1, 0, 0.8, 0.2, 0, 0.7, 0.3, 0;
        EmbeddingTable t(3, std::move(words), std::move(m));
        CHECK_FALSE(substitution_candidate(t, "abcdef", 3, 3).has_value());
    }
    SECTION("returned word never overlaps or equals the query") {
        EmbeddingTable t = ht::make_toy_table();
        for (const auto& cluster : ht::toy_clusters()) {
            for (const auto& w : cluster) {
                auto sub = substitution_candidate(t, w);
                if (!sub) continue;
                CHECK(*sub != w);
                CHECK_FALSE(has_substring_overlap(w, *sub, 3));
            }
        }
    }
}

TEST_CASE("binary cache reproduces query results") {
    ht::TempDir tmp("cache");
    EmbeddingTable t = random_table(120, 8, 55);
    save_embedding_cache(t, tmp.path() / "vectors.bin");
    EmbeddingTable back = load_embedding_cache(tmp.path() / "vectors.bin");
    REQUIRE(back.size() == t.size());
    REQUIRE(back.dim() == t.dim());
    for (int trial = 0; trial < 10; ++trial) {
        std::string word = "w" + std::to_string(trial * 7);
        auto a = nearest_neighbors(t, word, 10);
        auto b = nearest_neighbors(back, word, 10);
        REQUIRE(a.has_value());
        REQUIRE(b.has_value());
        REQUIRE(a->size() == b->size());
        for (size_t i = 0; i < a->size(); ++i) {
            CHECK((*a)[i].word == (*b)[i].word);
            CHECK((*a)[i].similarity == (*b)[i].similarity);
        }
    }
    SECTION("corrupt header is rejected") {
        atomic_write_file(tmp.path() / "bad.bin", "NOTACACHE");
        CHECK_THROWS_AS(load_embedding_cache(tmp.path() / "bad.bin"), IoError);
    }
}

TEST_CASE("euclidean metric is available behind the switch") {
    // two words equidistant in angle but not in distance
    std::vector<std::string> words = {"q", "near", "far"};
    Eigen::MatrixXd m(3, 2);
    m << 1, 0, 2, 0, 9, 0;  // all on one ray: cosine ties, distance does not
    EmbeddingTable t(2, std::move(words), std::move(m));
    auto euclid = nearest_neighbors(t, "q", 2, SimilarityMetric::euclidean);
    REQUIRE(euclid.has_value());
    CHECK((*euclid)[0].word == "near");
}

TEST_CASE("substituter memoizes consistently") {
    EmbeddingTable toy = ht::make_toy_table();
    Substituter sub(toy);
    auto first = sub("mumbai");
    auto second = sub("mumbai");
    REQUIRE(first.has_value());
    REQUIRE(second.has_value());
    CHECK(*first == *second);
    CHECK(*first == substitution_candidate(toy, "mumbai").value());
}

TEST_CASE("warmed substituter matches the per-word path exactly") {
    SECTION("engineered table, every vocabulary word plus OOV") {
        EmbeddingTable toy = ht::make_toy_table();
        Substituter warmed(toy);
        std::vector<std::string> queries;
        for (const auto& cluster : ht::toy_clusters())
            for (const auto& w : cluster) queries.push_back(w);
        queries.push_back("notaword");
        warmed.warm_up(queries);
        for (const auto& w : queries) {
            auto batch = warmed(w);
            auto direct = substitution_candidate(toy, w);
            INFO("word " << w);
            CHECK(batch == direct);
        }
    }
    SECTION("random table, chunk boundaries crossed") {
        EmbeddingTable t = random_table(400, 10, 909);
        Substituter warmed(t);
        std::vector<std::string> queries;
        for (int i = 0; i < 200; ++i) queries.push_back("w" + std::to_string(i));
        warmed.warm_up(queries);
        for (const auto& w : queries) {
            CHECK(warmed(w) == substitution_candidate(t, w));
        }
    }
    SECTION("parallel warm-up fills the same memo") {
        EmbeddingTable t = random_table(300, 8, 910);
        Substituter warmed(t);
        std::vector<std::string> queries;
        for (int i = 0; i < 150; ++i) queries.push_back("w" + std::to_string(i * 2));
        warmed.warm_up(queries, 4);
        for (const auto& w : queries) {
            CHECK(warmed(w) == substitution_candidate(t, w));
        }
    }
}
