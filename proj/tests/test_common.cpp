#include <catch2/catch_amalgamated.hpp>

#include "hopbreak/common.hpp"
#include "support/fixtures.hpp"

using namespace hopbreak;
namespace ht = hopbreak::testing;

TEST_CASE("sha256 known vectors") {
    CHECK(Sha256::of_string("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(Sha256::of_string("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(Sha256::of_string("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // one-million 'a' exercise of the block loop
    std::string million(1000000, 'a');
    CHECK(Sha256::of_string(million) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");

    SECTION("file hashing matches string hashing") {
        ht::TempDir tmp("sha");
        atomic_write_file(tmp.path() / "f.txt", "abc");
        CHECK(Sha256::of_file(tmp.path() / "f.txt") == Sha256::of_string("abc"));
    }
}

TEST_CASE("split rng streams") {
    SECTION("same key gives the same stream, different keys diverge") {
        SplitRng a(7, "example-1");
        SplitRng b(7, "example-1");
        SplitRng c(7, "example-2");
        bool all_same = true;
        bool any_diff = false;
        for (int i = 0; i < 16; ++i) {
            uint64_t va = a.next_u64();
            if (va != b.next_u64()) all_same = false;
            if (va != c.next_u64()) any_diff = true;
        }
        CHECK(all_same);
        CHECK(any_diff);
    }
    SECTION("uniform_real stays in [0, 1)") {
        SplitRng rng(3);
        for (int i = 0; i < 1000; ++i) {
            double v = rng.uniform_real();
            CHECK(v >= 0.0);
            CHECK(v < 1.0);
        }
    }
    SECTION("uniform_int bound and zero rejection") {
        SplitRng rng(4);
        for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_int(7) < 7);
        CHECK_THROWS_AS(rng.uniform_int(0), std::invalid_argument);
    }
    SECTION("sample_without_replacement yields distinct indices") {
        SplitRng rng(5);
        auto picks = rng.sample_without_replacement(20, 12);
        std::set<size_t> unique(picks.begin(), picks.end());
        CHECK(unique.size() == 12);
        for (size_t p : picks) CHECK(p < 20);
        CHECK_THROWS_AS(rng.sample_without_replacement(3, 4), std::invalid_argument);
    }
}

TEST_CASE("case-insensitive replacement") {
    CHECK(ci_replace_all("Mumbai and MUMBAI", "mumbai", "Delhi") == "Delhi and Delhi");
    CHECK(ci_replace_all("no hits here", "mumbai", "Delhi") == "no hits here");
    SECTION("splice points cannot resurrect the needle") {
        // replacing "aa" with "a" in "aaa" must reach a fixed point
        CHECK_FALSE(ci_contains(ci_replace_all("aaaa", "aa", "b"), "aa"));
        CHECK(ci_replace_all("aaaa", "aa", "b") == "bb");
        CHECK_FALSE(ci_contains(ci_replace_all("aaa", "aa", "x"), "aa"));
    }
    SECTION("replacement containing the needle is rejected") {
        CHECK_THROWS_AS(ci_replace_all("text", "ab", "xabx"), GenerationError);
    }
}

TEST_CASE("string helpers") {
    SECTION("strip_punct_edges") {
        TokenParts p = strip_punct_edges("\"Mumbai,\"");
        CHECK(p.prefix == "\"");
        CHECK(p.core == "Mumbai");
        CHECK(p.suffix == ",\"");
        CHECK(strip_punct_edges("plain").core == "plain");
        CHECK(strip_punct_edges("...").core.empty());
        CHECK(strip_punct_edges("World's").core == "World's");
    }
    SECTION("match_case mirrors capitalization") {
        CHECK(match_case("Mumbai", "delhi") == "Delhi");
        CHECK(match_case("mumbai", "delhi") == "delhi");
        CHECK(match_case("NATO", "pact") == "PACT");
        CHECK(match_case("", "delhi") == "delhi");
    }
    SECTION("split and join") {
        auto toks = split_whitespace("  a  bb\tccc \n");
        REQUIRE(toks.size() == 3);
        CHECK(join(toks, " ") == "a bb ccc");
        CHECK(split_whitespace("").empty());
    }
    SECTION("ci_find") {
        CHECK(ci_find("Peter Schmeichel", "schmei") == 6);
        CHECK(ci_find("abc", "abcd") == std::string::npos);
        CHECK(ci_find("aaa", "") == std::string::npos);
    }
}

TEST_CASE("atomic_write_file replaces content completely") {
    ht::TempDir tmp("atomic");
    auto path = tmp.path() / "nested" / "file.txt";
    atomic_write_file(path, "first");
    CHECK(read_file(path) == "first");
    atomic_write_file(path, "second, longer content");
    CHECK(read_file(path) == "second, longer content");
    // no temp litter left behind
    size_t entries = 0;
    for ([[maybe_unused]] auto& e : std::filesystem::directory_iterator(path.parent_path()))
        entries++;
    CHECK(entries == 1);
}
