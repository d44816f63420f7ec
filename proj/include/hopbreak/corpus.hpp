#pragma once

// HotpotQA distractor-format datasets: loading, validation, answer location
// and basic statistics. The on-disk schema is a top-level array of
//   { "_id", "question", "answer", "type", "level",
//     "supporting_facts": [[title, sent_idx], ...],
//     "context": [[title, [sentence, ...]], ...] }
// and serialization writes the identical shape back.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopbreak/common.hpp"

namespace hopbreak {

using json = nlohmann::ordered_json;

struct Document {
    std::string title;
    std::vector<std::string> sentences;

    std::string text() const {
        std::string out;
        for (const auto& s : sentences) out += s;
        return out;
    }

    bool operator==(const Document&) const = default;
};

enum class QType { bridge, comparison };

inline std::string qtype_name(QType t) {
    return t == QType::bridge ? "bridge" : "comparison";
}

struct SupportingFact {
    std::string title;
    int sentence_index = 0;

    bool operator==(const SupportingFact&) const = default;
};

struct Example {
    std::string id;
    std::string question;
    std::string answer;
    std::vector<Document> context;
    std::vector<SupportingFact> supporting_facts;
    QType qtype = QType::bridge;
    std::string level;

    bool is_yes_no() const { return answer == "yes" || answer == "no"; }

    const Document* find_doc(const std::string& title) const {
        for (const auto& d : context)
            if (d.title == title) return &d;
        return nullptr;
    }

    // Distinct supporting titles in supporting_facts order.
    std::vector<std::string> supporting_titles() const {
        std::vector<std::string> out;
        for (const auto& sf : supporting_facts) {
            if (std::find(out.begin(), out.end(), sf.title) == out.end())
                out.push_back(sf.title);
        }
        return out;
    }

    bool operator==(const Example&) const = default;
};

using Dataset = std::vector<Example>;

struct Span {
    int doc_index = 0;
    int sentence_index = 0;
    int char_start = 0;
    int char_end = 0;

    bool operator==(const Span&) const = default;
};

struct SupportingPair {
    int p1_index = -1;  // supporting doc not designated answer-bearing
    int p2_index = -1;  // answer-bearing supporting doc
    bool both_contain_answer = false;
};

// ---------------------------------------------------------------------------
// Loading

struct RecordError {
    size_t record_index = 0;
    std::string id;  // empty when _id itself was unreadable
    std::string message;
};

struct LoadReport {
    Dataset dataset;
    std::vector<RecordError> errors;

    bool clean() const { return errors.empty(); }
};

namespace detail {

inline Example parse_example(const json& rec) {
    Example ex;
    if (!rec.is_object()) throw std::runtime_error("record is not an object");
    auto require = [&](const char* key) -> const json& {
        auto it = rec.find(key);
        if (it == rec.end()) throw std::runtime_error(std::string("missing field: ") + key);
        return *it;
    };
    ex.id = require("_id").get<std::string>();
    ex.question = require("question").get<std::string>();
    ex.answer = require("answer").get<std::string>();
    std::string type = require("type").get<std::string>();
    if (type == "bridge") ex.qtype = QType::bridge;
    else if (type == "comparison") ex.qtype = QType::comparison;
    else throw std::runtime_error("unknown type: " + type);
    ex.level = require("level").get<std::string>();
    for (const auto& sf : require("supporting_facts")) {
        if (!sf.is_array() || sf.size() != 2)
            throw std::runtime_error("supporting_facts entry is not [title, index]");
        SupportingFact fact;
        fact.title = sf[0].get<std::string>();
        fact.sentence_index = sf[1].get<int>();
        if (fact.sentence_index < 0)
            throw std::runtime_error("negative supporting-fact sentence index");
        ex.supporting_facts.push_back(std::move(fact));
    }
    for (const auto& cd : require("context")) {
        if (!cd.is_array() || cd.size() != 2)
            throw std::runtime_error("context entry is not [title, sentences]");
        Document doc;
        doc.title = cd[0].get<std::string>();
        for (const auto& s : cd[1]) doc.sentences.push_back(s.get<std::string>());
        ex.context.push_back(std::move(doc));
    }
    return ex;
}

}  // namespace detail

inline json example_to_json(const Example& ex) {
    json rec = json::object();
    rec["_id"] = ex.id;
    rec["question"] = ex.question;
    rec["answer"] = ex.answer;
    rec["type"] = qtype_name(ex.qtype);
    rec["level"] = ex.level;
    json sfs = json::array();
    for (const auto& sf : ex.supporting_facts) sfs.push_back(json::array({sf.title, sf.sentence_index}));
    rec["supporting_facts"] = std::move(sfs);
    json ctx = json::array();
    for (const auto& d : ex.context) ctx.push_back(json::array({d.title, d.sentences}));
    rec["context"] = std::move(ctx);
    return rec;
}

inline json dataset_to_json(const Dataset& ds) {
    json arr = json::array();
    for (const auto& ex : ds) arr.push_back(example_to_json(ex));
    return arr;
}

inline std::string serialize_dataset(const Dataset& ds) {
    return dataset_to_json(ds).dump();
}

// Schema-failing records are collected in the report, never silently dropped.
// Malformed JSON (unparseable file) throws IoError carrying the byte offset.
inline LoadReport load_dataset_from_string(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!root.is_array()) throw IoError("dataset root is not a JSON array");
    LoadReport report;
    report.dataset.reserve(root.size());
    for (size_t i = 0; i < root.size(); ++i) {
        try {
            report.dataset.push_back(detail::parse_example(root[i]));
        } catch (const std::exception& e) {
            std::string id;
            if (root[i].is_object() && root[i].contains("_id") && root[i]["_id"].is_string())
                id = root[i]["_id"].get<std::string>();
            report.errors.push_back({i, id, e.what()});
        }
    }
    return report;
}

inline LoadReport load_dataset(const std::filesystem::path& path) {
    return load_dataset_from_string(read_file(path));
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    atomic_write_file(path, serialize_dataset(ds));
}

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
    dangling_supporting_title,
    supporting_index_out_of_range,
    supporting_title_count,
    answer_not_in_supporting_docs,
    empty_title,
    empty_document,
};

struct Violation {
    ViolationKind kind;
    std::string detail;
};

using ValidationReport = std::vector<Violation>;

inline std::vector<Span> locate_answer_spans(const Example& ex, const Document& doc);

inline ValidationReport validate_example(const Example& ex) {
    ValidationReport report;
    for (const auto& sf : ex.supporting_facts) {
        const Document* doc = ex.find_doc(sf.title);
        if (!doc) {
            report.push_back({ViolationKind::dangling_supporting_title,
                              "supporting fact cites absent title: " + sf.title});
        } else if (sf.sentence_index >= static_cast<int>(doc->sentences.size())) {
            report.push_back({ViolationKind::supporting_index_out_of_range,
                              sf.title + "[" + std::to_string(sf.sentence_index) + "] out of range"});
        }
    }
    if (ex.supporting_titles().size() != 2) {
        report.push_back({ViolationKind::supporting_title_count,
                          "expected 2 distinct supporting titles, got " +
                              std::to_string(ex.supporting_titles().size())});
    }
    for (const auto& d : ex.context) {
        if (d.title.empty()) report.push_back({ViolationKind::empty_title, "context document with empty title"});
        if (d.sentences.empty())
            report.push_back({ViolationKind::empty_document, "empty document: " + d.title});
    }
    // yes/no answers are exempt from the span check
    if (!ex.is_yes_no()) {
        bool found = false;
        for (const auto& title : ex.supporting_titles()) {
            const Document* doc = ex.find_doc(title);
            if (doc && !locate_answer_spans(ex, *doc).empty()) { found = true; break; }
        }
        if (!found) {
            report.push_back({ViolationKind::answer_not_in_supporting_docs,
                              "answer not found in any supporting document: " + ex.answer});
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Answer location

namespace detail {

// Non-overlapping left-to-right matches of `needle` in `text`.
inline std::vector<std::pair<int, int>> scan_matches(std::string_view text, std::string_view needle,
                                                     bool case_sensitive) {
    std::vector<std::pair<int, int>> out;
    if (needle.empty()) return out;
    size_t pos = 0;
    while (pos + needle.size() <= text.size()) {
        size_t hit = case_sensitive ? text.find(needle, pos) : ci_find(text, needle, pos);
        if (hit == std::string::npos) break;
        out.emplace_back(static_cast<int>(hit), static_cast<int>(hit + needle.size()));
        pos = hit + needle.size();
    }
    return out;
}

}  // namespace detail

// Case-sensitive matches first; falls back to case-insensitive when none.
// Spans never overlap and each decodes to the answer under the mode used.
inline std::vector<Span> locate_answer_spans(const Example& ex, const Document& doc) {
    int doc_index = -1;
    for (size_t i = 0; i < ex.context.size(); ++i) {
        if (&ex.context[i] == &doc) { doc_index = static_cast<int>(i); break; }
    }
    if (doc_index < 0) {
        for (size_t i = 0; i < ex.context.size(); ++i) {
            if (ex.context[i].title == doc.title) { doc_index = static_cast<int>(i); break; }
        }
    }
    for (bool case_sensitive : {true, false}) {
        std::vector<Span> spans;
        for (size_t s = 0; s < doc.sentences.size(); ++s) {
            for (auto [b, e] : detail::scan_matches(doc.sentences[s], ex.answer, case_sensitive)) {
                spans.push_back({doc_index, static_cast<int>(s), b, e});
            }
        }
        if (!spans.empty()) return spans;
    }
    return {};
}

// p2 = answer-bearing supporting document. When both supporting docs contain
// the answer, p2 is the one whose title appears first in supporting_facts
// order and both_contain_answer is set.
inline SupportingPair find_supporting_pair(const Example& ex) {
    if (ex.qtype != QType::bridge)
        throw std::invalid_argument("find_supporting_pair: example is not bridge-type: " + ex.id);
    if (ex.is_yes_no())
        throw std::invalid_argument("find_supporting_pair: yes/no answer has no answer span: " + ex.id);
    auto titles = ex.supporting_titles();
    if (titles.size() != 2)
        throw std::invalid_argument("find_supporting_pair: need exactly 2 supporting titles: " + ex.id);

    int idx[2] = {-1, -1};
    bool has_answer[2] = {false, false};
    for (int t = 0; t < 2; ++t) {
        for (size_t i = 0; i < ex.context.size(); ++i) {
            if (ex.context[i].title == titles[t]) { idx[t] = static_cast<int>(i); break; }
        }
        if (idx[t] < 0)
            throw std::invalid_argument("find_supporting_pair: supporting doc missing from context: " + titles[t]);
        has_answer[t] = !locate_answer_spans(ex, ex.context[idx[t]]).empty();
    }
    if (!has_answer[0] && !has_answer[1])
        throw AnswerNotLocated("answer not found in either supporting doc of example " + ex.id);

    SupportingPair pair;
    pair.both_contain_answer = has_answer[0] && has_answer[1];
    int p2_slot = has_answer[0] ? 0 : 1;  // file order wins ties
    pair.p2_index = idx[p2_slot];
    pair.p1_index = idx[1 - p2_slot];
    return pair;
}

// ---------------------------------------------------------------------------
// Statistics

struct Stats {
    size_t examples = 0;
    std::map<std::string, size_t> by_qtype;
    std::map<std::string, size_t> by_level;
    size_t documents = 0;
    size_t sentences = 0;
    std::map<std::string, size_t> title_multiset;

    double comparison_fraction() const {
        auto it = by_qtype.find("comparison");
        if (examples == 0 || it == by_qtype.end()) return 0.0;
        return static_cast<double>(it->second) / static_cast<double>(examples);
    }
};

inline Stats dataset_stats(const Dataset& ds) {
    Stats st;
    st.examples = ds.size();
    for (const auto& ex : ds) {
        st.by_qtype[qtype_name(ex.qtype)]++;
        st.by_level[ex.level]++;
        st.documents += ex.context.size();
        for (const auto& d : ex.context) {
            st.sentences += d.sentences.size();
            st.title_multiset[d.title]++;
        }
    }
    return st;
}

inline json stats_to_json(const Stats& st) {
    json j = json::object();
    j["examples"] = st.examples;
    j["by_qtype"] = st.by_qtype;
    j["by_level"] = st.by_level;
    j["documents"] = st.documents;
    j["sentences"] = st.sentences;
    j["distinct_titles"] = st.title_multiset.size();
    j["comparison_fraction"] = st.comparison_fraction();
    return j;
}

}  // namespace hopbreak
