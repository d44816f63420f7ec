#pragma once

// Evaluation and auditing: exact-match scoring with per-type breakdown,
// the regular-vs-adversarial failure partition, reasoning-shortcut detection
// by content-word overlap, and the machine-checkable generation audit.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hopbreak/advgen.hpp"
#include "hopbreak/corpus.hpp"
#include "hopbreak/normalize.hpp"
#include "hopbreak/stopwords.hpp"

namespace hopbreak {

// ---------------------------------------------------------------------------
// Predictions

struct Prediction {
    std::string id;
    std::string answer;
    std::optional<std::vector<SupportingFact>> supporting_facts;
};

// Official prediction shape: {"answer": {id: str}, "sp": {id: [[title, i], ...]}}
inline std::vector<Prediction> parse_predictions(const json& root) {
    if (!root.is_object() || !root.contains("answer"))
        throw IoError("prediction file must be an object with an \"answer\" map");
    std::vector<Prediction> out;
    std::unordered_map<std::string, size_t> index;
    for (const auto& [id, ans] : root.at("answer").items()) {
        if (index.count(id)) throw std::invalid_argument("duplicate prediction id: " + id);
        index.emplace(id, out.size());
        out.push_back({id, ans.get<std::string>(), std::nullopt});
    }
    if (root.contains("sp")) {
        for (const auto& [id, sp] : root.at("sp").items()) {
            auto it = index.find(id);
            if (it == index.end()) continue;
            std::vector<SupportingFact> facts;
            for (const auto& f : sp) facts.push_back({f[0].get<std::string>(), f[1].get<int>()});
            out[it->second].supporting_facts = std::move(facts);
        }
    }
    return out;
}

inline std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    json root;
    try {
        root = json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("prediction JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    return parse_predictions(root);
}

// ---------------------------------------------------------------------------
// Exact-match evaluation

struct EMReport {
    double overall_em = 0.0;
    std::map<std::string, std::pair<size_t, size_t>> by_qtype;  // type -> (correct, total)
    std::set<std::string> successes;
    std::set<std::string> failures;
    std::vector<std::string> missing;  // evaluated as wrong, reported
    std::optional<double> span_overlap_rate;

    size_t evaluated() const { return successes.size() + failures.size(); }
};

inline EMReport evaluate(const std::vector<Prediction>& preds, const Dataset& ds) {
    std::unordered_map<std::string, const Prediction*> by_id;
    for (const auto& p : preds) {
        if (!by_id.emplace(p.id, &p).second)
            throw std::invalid_argument("duplicate prediction id: " + p.id);
    }
    std::unordered_set<std::string> ds_ids;
    for (const auto& ex : ds) ds_ids.insert(ex.id);
    for (const auto& p : preds) {
        if (!ds_ids.count(p.id))
            throw std::invalid_argument("prediction id not in dataset: " + p.id);
    }

    EMReport report;
    size_t correct = 0;
    for (const auto& ex : ds) {
        auto it = by_id.find(ex.id);
        bool em = false;
        if (it == by_id.end()) {
            report.missing.push_back(ex.id);
        } else {
            em = exact_match(it->second->answer, ex.answer);
        }
        auto& bucket = report.by_qtype[qtype_name(ex.qtype)];
        bucket.second++;
        if (em) {
            bucket.first++;
            correct++;
            report.successes.insert(ex.id);
        } else {
            report.failures.insert(ex.id);
        }
    }
    report.overall_em = ds.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(ds.size());
    return report;
}

inline json em_report_to_json(const EMReport& r) {
    json j = json::object();
    j["overall_em"] = r.overall_em;
    json by_type = json::object();
    for (const auto& [type, counts] : r.by_qtype) {
        by_type[type] = {{"correct", counts.first},
                         {"total", counts.second},
                         {"em", counts.second ? static_cast<double>(counts.first) / counts.second : 0.0}};
    }
    j["by_qtype"] = std::move(by_type);
    j["evaluated"] = r.evaluated();
    j["missing_predictions"] = r.missing;
    if (r.span_overlap_rate) j["span_overlap_rate"] = *r.span_overlap_rate;
    return j;
}

// ---------------------------------------------------------------------------
// Failure partition (regular vs adversarial evaluation)

struct FailureAnalysis {
    std::set<std::string> regular_successes;
    std::set<std::string> model_successes;  // still correct on the adversarial set
    std::set<std::string> model_failures;   // wrong on the adversarial set
    std::optional<double> span_overlap_rate;  // failures whose prediction appears in an adversarial doc
    size_t overlap_count = 0;
};

inline FailureAnalysis partition_outcomes(const std::vector<Prediction>& preds_regular,
                                          const std::vector<Prediction>& preds_adv,
                                          const Dataset& ds, const Dataset& advds,
                                          const ProvenanceFile& provenance) {
    EMReport regular = evaluate(preds_regular, ds);

    std::unordered_map<std::string, const Prediction*> adv_by_id;
    for (const auto& p : preds_adv) {
        if (!adv_by_id.emplace(p.id, &p).second)
            throw std::invalid_argument("duplicate prediction id: " + p.id);
    }
    std::unordered_map<std::string, const Example*> adv_examples;
    for (const auto& ex : advds) adv_examples.emplace(ex.id, &ex);

    FailureAnalysis fa;
    fa.regular_successes = regular.successes;
    for (const auto& ex : ds) {
        if (!regular.successes.count(ex.id)) continue;
        auto pred_it = adv_by_id.find(ex.id);
        bool em = pred_it != adv_by_id.end() && exact_match(pred_it->second->answer, ex.answer);
        if (em) {
            fa.model_successes.insert(ex.id);
            continue;
        }
        fa.model_failures.insert(ex.id);
        if (pred_it == adv_by_id.end()) continue;

        auto prov_it = provenance.by_id.find(ex.id);
        if (prov_it == provenance.by_id.end())
            throw std::invalid_argument("missing provenance for example: " + ex.id);
        auto adv_ex_it = adv_examples.find(ex.id);
        if (adv_ex_it == adv_examples.end())
            throw std::invalid_argument("missing adversarial example: " + ex.id);
        const auto& prov = provenance.records[prov_it->second];
        const std::string& predicted = pred_it->second->answer;
        bool overlaps = false;
        for (const auto& doc : prov.docs) {
            if (doc.final_position < 0 ||
                doc.final_position >= static_cast<int>(adv_ex_it->second->context.size()))
                continue;
            const Document& adv_doc = adv_ex_it->second->context[static_cast<size_t>(doc.final_position)];
            if (!predicted.empty() &&
                (ci_contains(adv_doc.text(), predicted) || ci_contains(adv_doc.title, predicted))) {
                overlaps = true;
                break;
            }
        }
        if (overlaps) fa.overlap_count++;
    }
    if (!fa.model_failures.empty()) {
        fa.span_overlap_rate =
            static_cast<double>(fa.overlap_count) / static_cast<double>(fa.model_failures.size());
    }
    return fa;
}

inline json failure_analysis_to_json(const FailureAnalysis& fa) {
    json j = json::object();
    j["regular_successes"] = fa.regular_successes.size();
    j["model_successes"] = fa.model_successes.size();
    j["model_failures"] = fa.model_failures.size();
    if (fa.span_overlap_rate) j["span_overlap_rate"] = *fa.span_overlap_rate;
    j["overlap_count"] = fa.overlap_count;
    j["model_failure_ids"] = std::vector<std::string>(fa.model_failures.begin(), fa.model_failures.end());
    return j;
}

// ---------------------------------------------------------------------------
// Shortcut detection

struct ShortcutReport {
    std::string id;
    bool flagged = false;
    double best_distractor_score = 0.0;
    double answer_sentence_score = 0.0;
    double margin = 0.0;
};

namespace detail {

inline std::set<std::string> content_words(std::string_view text) {
    std::set<std::string> out;
    for (const auto& tok : split_whitespace(normalize_answer(text))) {
        if (!is_stopword(tok)) out.insert(tok);
    }
    return out;
}

inline double overlap_score(const std::set<std::string>& question_words,
                            std::string_view sentence) {
    if (question_words.empty()) return 0.0;
    auto sentence_words = content_words(sentence);
    size_t hit = 0;
    for (const auto& w : sentence_words)
        if (question_words.count(w)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(question_words.size());
}

}  // namespace detail

// Scores every context sentence by normalized content-word overlap with the
// question. Flagged when the best answer-bearing sentence of the
// answer-bearing supporting doc beats every non-supporting sentence by at
// least tau. Invariant to context document order.
inline ShortcutReport detect_shortcut(const Example& ex, double tau = 0.2) {
    if (ex.qtype != QType::bridge)
        throw std::invalid_argument("detect_shortcut: bridge-type examples only: " + ex.id);
    if (ex.is_yes_no())
        throw std::invalid_argument("detect_shortcut: span answers only: " + ex.id);

    ShortcutReport report;
    report.id = ex.id;
    auto question_words = detail::content_words(ex.question);
    if (question_words.empty()) return report;

    SupportingPair pair = find_supporting_pair(ex);
    const Document& p2 = ex.context[static_cast<size_t>(pair.p2_index)];
    auto supporting = ex.supporting_titles();

    for (const auto& sentence : p2.sentences) {
        if (!ci_contains(sentence, ex.answer)) continue;
        report.answer_sentence_score =
            std::max(report.answer_sentence_score, detail::overlap_score(question_words, sentence));
    }
    for (const auto& doc : ex.context) {
        if (std::find(supporting.begin(), supporting.end(), doc.title) != supporting.end()) continue;
        for (const auto& sentence : doc.sentences) {
            report.best_distractor_score =
                std::max(report.best_distractor_score, detail::overlap_score(question_words, sentence));
        }
    }
    report.margin = report.answer_sentence_score - report.best_distractor_score;
    report.flagged = report.margin >= tau;
    return report;
}

inline json shortcut_report_to_json(const ShortcutReport& r) {
    return json{{"id", r.id},
                {"flagged", r.flagged},
                {"answer_sentence_score", r.answer_sentence_score},
                {"best_distractor_score", r.best_distractor_score},
                {"margin", r.margin}};
}

// ---------------------------------------------------------------------------
// Generation audit

enum class AuditCheck {
    supporting_docs_intact,   // (a) both originals verbatim in the new context
    answer_preserved,         // (b) answer still in the answer-bearing doc
    no_answer_in_adversary,   // (c) adversarial docs never contain the answer
    no_supporting_title,      // (d) adversarial docs never contain a supporting title
    fake_differs,             // (e) normalized fake != normalized original
    context_size,             // (f) replacement arithmetic holds
    passthrough_identical,    // untouched records byte-identical
    coverage,                 // no example dropped
};

inline const char* audit_check_name(AuditCheck c) {
    switch (c) {
        case AuditCheck::supporting_docs_intact: return "supporting_docs_intact";
        case AuditCheck::answer_preserved: return "answer_preserved";
        case AuditCheck::no_answer_in_adversary: return "no_answer_in_adversary";
        case AuditCheck::no_supporting_title: return "no_supporting_title";
        case AuditCheck::fake_differs: return "fake_differs";
        case AuditCheck::context_size: return "context_size";
        case AuditCheck::passthrough_identical: return "passthrough_identical";
        case AuditCheck::coverage: return "coverage";
    }
    return "?";
}

struct AuditReport {
    struct Tally {
        size_t passed = 0;
        size_t failed = 0;
        std::vector<std::string> violation_ids;
    };
    std::map<std::string, Tally> checks;
    size_t records_audited = 0;

    bool all_passed() const {
        for (const auto& [_, t] : checks)
            if (t.failed) return false;
        return true;
    }

    void note(AuditCheck check, bool ok, const std::string& id) {
        auto& tally = checks[audit_check_name(check)];
        if (ok) {
            tally.passed++;
        } else {
            tally.failed++;
            if (tally.violation_ids.size() < 50) tally.violation_ids.push_back(id);
        }
    }
};

inline AuditReport audit_adversarial(const Dataset& original, const Dataset& adversarial,
                                     const ProvenanceFile& provenance) {
    std::unordered_map<std::string, const Example*> orig_by_id;
    for (const auto& ex : original) orig_by_id.emplace(ex.id, &ex);
    std::unordered_map<std::string, const Example*> adv_by_id;
    for (const auto& ex : adversarial) adv_by_id.emplace(ex.id, &ex);

    AuditReport report;
    for (const auto& ex : original) {
        bool covered = adv_by_id.count(ex.id) > 0 && provenance.by_id.count(ex.id) > 0;
        report.note(AuditCheck::coverage, covered, ex.id);
    }

    for (const auto& rec : provenance.records) {
        auto orig_it = orig_by_id.find(rec.id);
        auto adv_it = adv_by_id.find(rec.id);
        if (orig_it == orig_by_id.end() || adv_it == adv_by_id.end()) continue;
        const Example& orig = *orig_it->second;
        const Example& adv = *adv_it->second;
        report.records_audited++;

        if (rec.untouched) {
            report.note(AuditCheck::passthrough_identical,
                        serialize_dataset({orig}) == serialize_dataset({adv}), rec.id);
            continue;
        }

        auto supporting = orig.supporting_titles();

        // (a) both original supporting documents appear verbatim
        bool intact = true;
        for (const auto& title : supporting) {
            const Document* orig_doc = orig.find_doc(title);
            bool present = false;
            for (const auto& d : adv.context) {
                if (orig_doc && d == *orig_doc) { present = true; break; }
            }
            if (!present) { intact = false; break; }
        }
        report.note(AuditCheck::supporting_docs_intact, intact, rec.id);

        // (b) the original answer is still answerable from the supporting docs
        bool answer_ok = false;
        for (const auto& title : supporting) {
            const Document* doc = adv.find_doc(title);
            if (doc && !locate_answer_spans(adv, *doc).empty()) { answer_ok = true; break; }
        }
        report.note(AuditCheck::answer_preserved, answer_ok, rec.id);

        // (c)(d)(e) per adversarial document
        bool no_answer = true;
        bool no_title = true;
        bool fake_ok = true;
        for (const auto& doc_prov : rec.docs) {
            if (doc_prov.final_position < 0 ||
                doc_prov.final_position >= static_cast<int>(adv.context.size())) {
                no_answer = no_title = false;
                break;
            }
            const Document& adv_doc = adv.context[static_cast<size_t>(doc_prov.final_position)];
            std::string full_text = adv_doc.title + " " + adv_doc.text();
            if (ci_contains(full_text, orig.answer)) no_answer = false;
            for (const auto& title : supporting)
                if (ci_contains(full_text, title)) no_title = false;
            if (normalize_answer(doc_prov.fake_answer.fake) ==
                normalize_answer(doc_prov.fake_answer.original))
                fake_ok = false;
        }
        report.note(AuditCheck::no_answer_in_adversary, no_answer, rec.id);
        report.note(AuditCheck::no_supporting_title, no_title, rec.id);
        report.note(AuditCheck::fake_differs, fake_ok, rec.id);

        // (f) every new doc replaced a non-supporting doc while slots remained
        size_t n_new = 0;
        for (const auto& doc_prov : rec.docs) {
            n_new++;
            if (doc_prov.balance_final_position >= 0) n_new++;
        }
        size_t expected = std::max(orig.context.size(), n_new + 2);
        report.note(AuditCheck::context_size, adv.context.size() == expected, rec.id);
    }
    return report;
}

inline json audit_report_to_json(const AuditReport& r) {
    json j = json::object();
    j["records_audited"] = r.records_audited;
    j["all_passed"] = r.all_passed();
    json checks = json::object();
    for (const auto& [name, tally] : r.checks) {
        checks[name] = {{"passed", tally.passed},
                        {"failed", tally.failed},
                        {"violation_ids", tally.violation_ids}};
    }
    j["checks"] = std::move(checks);
    return j;
}

// ---------------------------------------------------------------------------
// Manual-verification sampling

// Seeded uniform sample without replacement, rendered for human review of
// fake-answer contradictions.
inline std::vector<std::pair<Example, std::string>> sample_for_manual_check(
    const Dataset& advds, const ProvenanceFile& provenance, size_t n, uint64_t seed) {
    if (n > advds.size())
        throw std::invalid_argument("sample_for_manual_check: n exceeds dataset size");
    SplitRng rng(seed, "manual-check");
    auto picks = rng.sample_without_replacement(advds.size(), n);

    std::vector<std::pair<Example, std::string>> out;
    out.reserve(n);
    for (size_t idx : picks) {
        const Example& ex = advds[idx];
        std::string r;
        r += "id: " + ex.id + "\n";
        r += "question: " + ex.question + "\n";
        r += "answer: " + ex.answer + "\n";
        auto prov_it = provenance.by_id.find(ex.id);
        std::unordered_set<int> adv_positions;
        if (prov_it != provenance.by_id.end()) {
            for (const auto& d : provenance.records[prov_it->second].docs) {
                adv_positions.insert(d.final_position);
                r += "fake answer: \"" + d.fake_answer.fake + "\" (" +
                     fake_mode_name(d.fake_answer.mode) + ") under title \"" + d.fake_title + "\"\n";
            }
        }
        for (size_t i = 0; i < ex.context.size(); ++i) {
            bool adv = adv_positions.count(static_cast<int>(i)) > 0;
            r += std::string(adv ? ">> ADVERSARIAL " : "   ") + "[" + std::to_string(i) + "] " +
                 ex.context[i].title + "\n";
            if (adv) {
                for (const auto& s : ex.context[i].sentences) r += "      " + s + "\n";
            }
        }
        out.emplace_back(ex, std::move(r));
    }
    return out;
}

}  // namespace hopbreak
