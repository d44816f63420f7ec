#pragma once

// SQuAD-convention answer normalization: lowercase, strip punctuation,
// drop the articles a/an/the as whole words, collapse whitespace. This is
// the equality used by exact-match scoring and by fake-answer validity.

#include <string>
#include <string_view>

#include "hopbreak/common.hpp"

namespace hopbreak {

inline std::string normalize_answer(std::string_view s) {
    std::string lowered = to_lower(s);
    std::string no_punct;
    no_punct.reserve(lowered.size());
    for (unsigned char c : lowered) {
        if (std::ispunct(c)) continue;
        no_punct.push_back(static_cast<char>(c));
    }
    std::vector<std::string> tokens = split_whitespace(no_punct);
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (auto& t : tokens) {
        if (t == "a" || t == "an" || t == "the") continue;
        kept.push_back(std::move(t));
    }
    return join(kept, " ");
}

inline bool exact_match(std::string_view pred, std::string_view gold) {
    return normalize_answer(pred) == normalize_answer(gold);
}

}  // namespace hopbreak
