#pragma once

// AddDoc: perturb the answer-bearing supporting document of a bridge question
// into an adversarial distractor. The perturbed copy carries a fake answer
// and resampled titles, a genuine title-balancing document is added for each
// adversary, and the new documents replace random non-supporting documents.
// Comparison questions pass through untouched. Everything is deterministic
// under (config.seed, example id).

#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hopbreak/common.hpp"
#include "hopbreak/corpus.hpp"
#include "hopbreak/embed.hpp"
#include "hopbreak/normalize.hpp"
#include "hopbreak/stopwords.hpp"

namespace hopbreak {

enum class Placement { random_insert, prepend };
enum class PoolSource { train, dev };

inline std::string placement_name(Placement p) {
    return p == Placement::random_insert ? "random_insert" : "prepend";
}

inline std::string pool_source_name(PoolSource s) {
    return s == PoolSource::train ? "train" : "dev";
}

struct AdvConfig {
    int n_adv_docs = 4;  // per answer-bearing supporting document
    Placement placement = Placement::random_insert;
    PoolSource pool_source = PoolSource::dev;
    double adv_fraction_for_training = 0.4;
    uint64_t seed = 0;
    int glove_top_k = 10;
    int overlap_limit = 3;

    void validate() const {
        if (n_adv_docs < 1) throw std::invalid_argument("n_adv_docs must be >= 1");
        if (adv_fraction_for_training < 0.0 || adv_fraction_for_training > 1.0)
            throw std::invalid_argument("adv_fraction_for_training must be in [0,1]");
    }
};

// The four named variants from the adversarial evaluation grid.
inline std::optional<AdvConfig> variant_config(std::string_view name) {
    AdvConfig cfg;
    std::string key = to_lower(name);
    if (key == "add4docs-rand") { cfg.n_adv_docs = 4; cfg.placement = Placement::random_insert; }
    else if (key == "add4docs-prep") { cfg.n_adv_docs = 4; cfg.placement = Placement::prepend; }
    else if (key == "add8docs-rand") { cfg.n_adv_docs = 8; cfg.placement = Placement::random_insert; }
    else if (key == "add8docs-prep") { cfg.n_adv_docs = 8; cfg.placement = Placement::prepend; }
    else return std::nullopt;
    return cfg;
}

// ---------------------------------------------------------------------------
// Pools

struct Pools {
    PoolSource source = PoolSource::dev;
    std::vector<std::string> answer_pool;  // every answer, dataset order
    std::vector<std::string> title_pool;   // distinct context titles, first-seen order
    // title -> (example index, context index) of every document carrying it
    std::unordered_map<std::string, std::vector<std::pair<size_t, size_t>>> title_index;
    const Dataset* source_dataset = nullptr;  // must outlive the Pools
};

inline Pools build_pools(const Dataset& ds, PoolSource source) {
    if (ds.empty()) throw std::invalid_argument("build_pools: dataset is empty");
    Pools pools;
    pools.source = source;
    pools.source_dataset = &ds;
    std::unordered_set<std::string> seen_titles;
    for (size_t e = 0; e < ds.size(); ++e) {
        pools.answer_pool.push_back(ds[e].answer);
        for (size_t d = 0; d < ds[e].context.size(); ++d) {
            const std::string& title = ds[e].context[d].title;
            if (seen_titles.insert(title).second) pools.title_pool.push_back(title);
            pools.title_index[title].emplace_back(e, d);
        }
    }
    return pools;
}

// ---------------------------------------------------------------------------
// Fake answers

struct FakeAnswer {
    std::string original;
    std::string fake;
    enum class Mode { glove_substitution, pool_sample } mode = Mode::glove_substitution;
    std::optional<std::pair<std::string, std::string>> substituted_word;
};

inline std::string fake_mode_name(FakeAnswer::Mode m) {
    return m == FakeAnswer::Mode::glove_substitution ? "glove_substitution" : "pool_sample";
}

namespace detail {

// Token positions eligible for substitution, tried right to left: the head
// word of a phrase answer is usually last. Single-token answers are always
// eligible (the whole answer must change).
inline std::vector<size_t> substitution_positions(const std::vector<std::string>& tokens) {
    std::vector<size_t> out;
    if (tokens.size() == 1) {
        out.push_back(0);
        return out;
    }
    for (size_t i = tokens.size(); i-- > 0;) {
        if (!is_stopword(tokens[i])) out.push_back(i);
    }
    return out;
}

inline std::string rebuild_with(const std::vector<std::string>& tokens, size_t pos,
                                const std::string& replacement_core) {
    TokenParts parts = strip_punct_edges(tokens[pos]);
    std::vector<std::string> copy = tokens;
    copy[pos] = parts.prefix + match_case(parts.core, replacement_core) + parts.suffix;
    return join(copy, " ");
}

// The word a sampled pool answer contributes: its last non-stopword, falling
// back to its last token.
inline std::string pool_answer_word(const std::string& candidate) {
    auto tokens = split_whitespace(candidate);
    for (size_t i = tokens.size(); i-- > 0;) {
        if (!is_stopword(tokens[i])) return strip_punct_edges(tokens[i]).core;
    }
    return tokens.empty() ? candidate : strip_punct_edges(tokens.back()).core;
}

inline bool acceptable_fake(const std::string& fake, const std::string& original) {
    return !fake.empty() && normalize_answer(fake) != normalize_answer(original) &&
           !ci_contains(fake, original);
}

}  // namespace detail

// GloVe substitution on the rightmost substitutable non-stopword; pool
// sampling when no neighbor passes the overlap filter. Multi-word answers
// keep their shape and swap exactly one word.
inline FakeAnswer make_fake_answer(const std::string& answer, const Substituter& substitute,
                                   const Pools& pools, SplitRng& rng) {
    auto tokens = split_whitespace(answer);
    if (tokens.empty()) throw GenerationError("make_fake_answer: empty answer");

    for (size_t pos : detail::substitution_positions(tokens)) {
        std::string core = strip_punct_edges(tokens[pos]).core;
        if (core.empty()) continue;
        auto sub = substitute(to_lower(core));
        if (!sub) continue;
        std::string fake = detail::rebuild_with(tokens, pos, *sub);
        if (!detail::acceptable_fake(fake, answer)) continue;
        return {answer, fake, FakeAnswer::Mode::glove_substitution,
                std::make_pair(core, *sub)};
    }

    // pool fallback
    constexpr int kMaxDraws = 100;
    if (pools.answer_pool.empty()) throw GenerationError("make_fake_answer: empty answer pool");
    for (int draw = 0; draw < kMaxDraws; ++draw) {
        const std::string& cand = pools.answer_pool[rng.uniform_int(pools.answer_pool.size())];
        if (cand.empty()) continue;
        if (tokens.size() == 1) {
            if (!detail::acceptable_fake(cand, answer)) continue;
            return {answer, cand, FakeAnswer::Mode::pool_sample, std::nullopt};
        }
        std::string word = detail::pool_answer_word(cand);
        if (word.empty()) continue;
        auto positions = detail::substitution_positions(tokens);
        size_t pos = positions.empty() ? tokens.size() - 1 : positions.front();
        std::string core = strip_punct_edges(tokens[pos]).core;
        std::string fake = detail::rebuild_with(tokens, pos, word);
        if (!detail::acceptable_fake(fake, answer)) continue;
        return {answer, fake, FakeAnswer::Mode::pool_sample, std::make_pair(core, word)};
    }
    throw GenerationError("make_fake_answer: no acceptable fake for answer '" + answer +
                          "' after " + std::to_string(kMaxDraws) + " pool draws");
}

inline FakeAnswer make_fake_answer(const std::string& answer, const EmbeddingTable& table,
                                   const Pools& pools, SplitRng& rng, int top_k = 10,
                                   int overlap_limit = 3) {
    Substituter substitute(table, top_k, overlap_limit);
    return make_fake_answer(answer, substitute, pools, rng);
}

// ---------------------------------------------------------------------------
// Document perturbation

struct PerturbResult {
    Document document;
    std::string source_doc_title;
    std::string fake_title;
    std::optional<std::string> replaced_p1_title;
};

namespace detail {

// A sampled title must not reintroduce anything the perturbation removes.
inline bool title_candidate_ok(const std::string& cand, const std::string& p2_title,
                               const std::string& p1_title, const std::string& answer) {
    if (ci_contains(cand, p2_title) || ci_contains(cand, p1_title)) return false;
    if (ci_equal(cand, p2_title) || ci_equal(cand, p1_title)) return false;
    if (ci_contains(cand, answer)) return false;
    return true;
}

inline std::string sample_title(const Pools& pools, SplitRng& rng, const std::string& p2_title,
                                const std::string& p1_title, const std::string& answer,
                                const std::string& must_differ_from = "") {
    constexpr int kMaxDraws = 100;
    for (int i = 0; i < kMaxDraws; ++i) {
        const std::string& cand = pools.title_pool[rng.uniform_int(pools.title_pool.size())];
        if (!title_candidate_ok(cand, p2_title, p1_title, answer)) continue;
        if (!must_differ_from.empty() && ci_equal(cand, must_differ_from)) continue;
        return cand;
    }
    throw GenerationError("sample_title: no admissible title after 100 draws");
}

inline bool doc_ci_contains(const Document& doc, const std::string& needle) {
    if (ci_contains(doc.title, needle)) return true;
    for (const auto& s : doc.sentences)
        if (ci_contains(s, needle)) return true;
    return false;
}

}  // namespace detail

// Replaces every answer mention with the fake answer, retitles the document
// with a sampled title (rewriting in-text mentions of the old title), and
// rewrites mentions of the other supporting document's title. Sentence count
// is preserved.
inline PerturbResult perturb_document(const Document& p2, const std::string& answer,
                                      const FakeAnswer& fa, const std::string& p1_title,
                                      const Pools& pools, SplitRng& rng) {
    bool found = false;
    for (const auto& s : p2.sentences)
        if (ci_contains(s, answer)) { found = true; break; }
    if (!found) throw AnswerNotLocated("perturb_document: no answer mention in '" + p2.title + "'");

    PerturbResult result;
    result.source_doc_title = p2.title;
    Document doc = p2;

    for (auto& s : doc.sentences) s = ci_replace_all(s, answer, fa.fake);

    std::string new_title = detail::sample_title(pools, rng, p2.title, p1_title, answer);
    for (auto& s : doc.sentences) {
        if (ci_contains(s, p2.title)) s = ci_replace_all(s, p2.title, new_title);
    }

    bool p1_mentioned = false;
    for (const auto& s : doc.sentences)
        if (ci_contains(s, p1_title)) { p1_mentioned = true; break; }
    if (p1_mentioned) {
        std::string p1_replacement =
            detail::sample_title(pools, rng, p2.title, p1_title, answer, new_title);
        for (auto& s : doc.sentences) {
            if (ci_contains(s, p1_title)) s = ci_replace_all(s, p1_title, p1_replacement);
        }
        result.replaced_p1_title = p1_replacement;
    }

    doc.title = new_title;
    result.fake_title = new_title;

    // splice effects across replacement boundaries are vanishingly rare but
    // would break the generation invariants, so fail loudly instead
    if (detail::doc_ci_contains(doc, answer) || detail::doc_ci_contains(doc, p2.title) ||
        detail::doc_ci_contains(doc, p1_title)) {
        throw GenerationError("perturb_document: residual mention survived replacement in '" +
                              p2.title + "'");
    }

    result.document = std::move(doc);
    return result;
}

// ---------------------------------------------------------------------------
// Title balancing

// A genuine document from the pool source that carries exactly the adversarial
// document's new title, so title frequency cannot betray the adversary.
// Deterministically the first such document in dataset order.
inline std::optional<Document> balance_title(const std::string& fake_title, const Pools& pools,
                                             const std::vector<std::string>& supporting_titles) {
    for (const auto& t : supporting_titles)
        if (t == fake_title) return std::nullopt;
    auto it = pools.title_index.find(fake_title);
    if (it == pools.title_index.end() || it->second.empty()) return std::nullopt;
    auto [ex_idx, doc_idx] = it->second.front();
    return (*pools.source_dataset)[ex_idx].context[doc_idx];
}

// ---------------------------------------------------------------------------
// Context mixing

struct MixResult {
    Example example;
    std::vector<int> new_doc_positions;  // final context index of each new doc
};

// Each new document replaces a uniformly chosen non-supporting document while
// any remain; the surplus is inserted without removal and the context grows.
// Supporting documents are never removed.
inline MixResult mix_context(const Example& ex, const std::vector<Document>& new_docs,
                             Placement placement, SplitRng& rng) {
    if (new_docs.empty()) throw std::invalid_argument("mix_context: no new documents");

    auto supporting = ex.supporting_titles();
    auto is_supporting = [&](const Document& d) {
        return std::find(supporting.begin(), supporting.end(), d.title) != supporting.end();
    };

    struct Slot {
        Document doc;
        int new_idx;  // -1 for original documents
    };
    std::vector<Slot> slots;
    slots.reserve(ex.context.size() + new_docs.size());
    for (const auto& d : ex.context) slots.push_back({d, -1});

    std::vector<size_t> removable;
    for (size_t i = 0; i < slots.size(); ++i)
        if (!is_supporting(slots[i].doc)) removable.push_back(i);

    size_t n_remove = std::min(new_docs.size(), removable.size());
    auto picks = rng.sample_without_replacement(removable.size(), n_remove);
    std::vector<size_t> to_remove;
    for (size_t p : picks) to_remove.push_back(removable[p]);
    std::sort(to_remove.rbegin(), to_remove.rend());
    for (size_t idx : to_remove) slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(idx));

    if (placement == Placement::prepend) {
        for (size_t i = new_docs.size(); i-- > 0;) {
            slots.insert(slots.begin(), {new_docs[i], static_cast<int>(i)});
        }
    } else {
        for (size_t i = 0; i < new_docs.size(); ++i) {
            size_t at = static_cast<size_t>(rng.uniform_int(slots.size() + 1));
            slots.insert(slots.begin() + static_cast<std::ptrdiff_t>(at),
                         {new_docs[i], static_cast<int>(i)});
        }
    }

    MixResult out;
    out.example = ex;
    out.example.context.clear();
    out.new_doc_positions.assign(new_docs.size(), -1);
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].new_idx >= 0) out.new_doc_positions[static_cast<size_t>(slots[i].new_idx)] = static_cast<int>(i);
        out.example.context.push_back(std::move(slots[i].doc));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Whole-example perturbation

struct AdvDocProvenance {
    std::string source_doc_title;
    std::string fake_title;
    FakeAnswer fake_answer;
    std::optional<std::string> replaced_p1_title;
    std::optional<std::string> balance_doc_title;
    int final_position = -1;
    int balance_final_position = -1;
};

struct AdvRecord {
    Example example;
    std::vector<AdvDocProvenance> docs;
    bool untouched = false;     // example is byte-identical to the source
    std::string skip_reason;    // set when passthrough was not the comparison rule
};

inline AdvRecord add_doc(const Example& ex, const AdvConfig& cfg, const Pools& pools,
                         const Substituter& substitute, SplitRng& rng) {
    cfg.validate();
    if (ex.qtype == QType::comparison) {
        return {ex, {}, true, ""};
    }
    if (ex.is_yes_no()) {
        // a bridge question with a yes/no answer has no answer span to perturb
        return {ex, {}, true, "yes_no_answer"};
    }

    SupportingPair pair = find_supporting_pair(ex);
    std::vector<std::pair<int, int>> bearings;  // (answer-bearing doc, other supporting doc)
    bearings.emplace_back(pair.p2_index, pair.p1_index);
    if (pair.both_contain_answer) bearings.emplace_back(pair.p1_index, pair.p2_index);

    auto supporting = ex.supporting_titles();
    std::vector<Document> new_docs;
    std::vector<AdvDocProvenance> provenance;
    // maps provenance entry -> indices into new_docs for the adv and balance doc
    std::vector<std::pair<int, int>> doc_slots;

    for (auto [bearing, other] : bearings) {
        for (int i = 0; i < cfg.n_adv_docs; ++i) {
            FakeAnswer fa = make_fake_answer(ex.answer, substitute, pools, rng);
            PerturbResult pr = perturb_document(ex.context[static_cast<size_t>(bearing)], ex.answer,
                                                fa, ex.context[static_cast<size_t>(other)].title,
                                                pools, rng);
            AdvDocProvenance prov;
            prov.source_doc_title = pr.source_doc_title;
            prov.fake_title = pr.fake_title;
            prov.fake_answer = fa;
            prov.replaced_p1_title = pr.replaced_p1_title;
            int adv_slot = static_cast<int>(new_docs.size());
            new_docs.push_back(std::move(pr.document));

            int bal_slot = -1;
            if (auto bal = balance_title(pr.fake_title, pools, supporting)) {
                prov.balance_doc_title = bal->title;
                bal_slot = static_cast<int>(new_docs.size());
                new_docs.push_back(std::move(*bal));
            }
            provenance.push_back(std::move(prov));
            doc_slots.emplace_back(adv_slot, bal_slot);
        }
    }

    MixResult mixed = mix_context(ex, new_docs, cfg.placement, rng);
    for (size_t i = 0; i < provenance.size(); ++i) {
        provenance[i].final_position = mixed.new_doc_positions[static_cast<size_t>(doc_slots[i].first)];
        if (doc_slots[i].second >= 0)
            provenance[i].balance_final_position =
                mixed.new_doc_positions[static_cast<size_t>(doc_slots[i].second)];
    }

    return {std::move(mixed.example), std::move(provenance), false, ""};
}

inline AdvRecord add_doc(const Example& ex, const AdvConfig& cfg, const Pools& pools,
                         const EmbeddingTable& table, SplitRng& rng) {
    Substituter substitute(table, cfg.glove_top_k, cfg.overlap_limit);
    return add_doc(ex, cfg, pools, substitute, rng);
}

// ---------------------------------------------------------------------------
// Dataset-level generation

enum class GenerateMode { dev, train };

struct GenerateResult {
    std::vector<AdvRecord> records;   // one per source example, source order
    Dataset output;                   // dev: perturbed set; train: regular + sampled adversarial
    size_t failures = 0;              // examples passed through because generation failed
};

inline json provenance_to_json(const GenerateResult& result, const AdvConfig& cfg);

inline GenerateResult generate_dataset(const Dataset& ds, const AdvConfig& cfg, const Pools& pools,
                                       const EmbeddingTable& table,
                                       GenerateMode mode = GenerateMode::dev,
                                       unsigned n_workers = 1) {
    cfg.validate();
    GenerateResult result;
    result.records.resize(ds.size());
    Substituter substitute(table, cfg.glove_top_k, cfg.overlap_limit);

    // batch the vocabulary scans for every word the fake-answer step can query
    std::vector<std::string> warm_words;
    for (const auto& ex : ds) {
        if (ex.qtype != QType::bridge || ex.is_yes_no()) continue;
        auto tokens = split_whitespace(ex.answer);
        for (size_t pos : detail::substitution_positions(tokens)) {
            std::string core = strip_punct_edges(tokens[pos]).core;
            if (!core.empty()) warm_words.push_back(to_lower(core));
        }
    }
    substitute.warm_up(warm_words, n_workers);

    auto run_range = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            SplitRng rng(cfg.seed, ds[i].id);
            try {
                result.records[i] = add_doc(ds[i], cfg, pools, substitute, rng);
            } catch (const std::exception& e) {
                log(LogLevel::warn, "generation failed for " + ds[i].id + ": " + e.what());
                result.records[i] = {ds[i], {}, true, std::string("generation_failed: ") + e.what()};
            }
        }
    };

    if (n_workers <= 1 || ds.size() < 2) {
        run_range(0, ds.size());
    } else {
        unsigned workers = std::min<unsigned>(n_workers, static_cast<unsigned>(ds.size()));
        std::vector<std::thread> threads;
        size_t chunk = (ds.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            size_t begin = w * chunk;
            size_t end = std::min(ds.size(), begin + chunk);
            if (begin >= end) break;
            threads.emplace_back(run_range, begin, end);
        }
        for (auto& t : threads) t.join();
    }

    for (const auto& rec : result.records)
        if (!rec.skip_reason.empty() && rec.skip_reason.rfind("generation_failed", 0) == 0)
            result.failures++;

    if (mode == GenerateMode::dev) {
        for (const auto& rec : result.records) result.output.push_back(rec.example);
    } else {
        // regular training set plus a sampled fraction of the adversarial records
        for (const auto& ex : ds) result.output.push_back(ex);
        std::vector<size_t> eligible;
        for (size_t i = 0; i < result.records.size(); ++i)
            if (!result.records[i].untouched) eligible.push_back(i);
        size_t k = static_cast<size_t>(cfg.adv_fraction_for_training *
                                       static_cast<double>(eligible.size()));
        SplitRng mix_rng(cfg.seed, "train-mix");
        auto picks = mix_rng.sample_without_replacement(eligible.size(), k);
        std::sort(picks.begin(), picks.end());
        for (size_t p : picks) {
            Example copy = result.records[eligible[p]].example;
            copy.id += "-adv";
            result.output.push_back(std::move(copy));
        }
    }
    return result;
}

inline json provenance_to_json(const GenerateResult& result, const AdvConfig& cfg) {
    json root = json::object();
    root["schema"] = "hopbreak-provenance/1";
    root["seed"] = cfg.seed;
    root["config"] = {{"n_adv_docs", cfg.n_adv_docs},
                      {"placement", placement_name(cfg.placement)},
                      {"pool_source", pool_source_name(cfg.pool_source)},
                      {"adv_fraction_for_training", cfg.adv_fraction_for_training},
                      {"glove_top_k", cfg.glove_top_k},
                      {"overlap_limit", cfg.overlap_limit}};
    root["stopword_list_version"] = kStopwordListVersion;
    json records = json::array();
    for (const auto& rec : result.records) {
        json r = json::object();
        r["id"] = rec.example.id;
        r["untouched"] = rec.untouched;
        if (!rec.skip_reason.empty()) r["skip_reason"] = rec.skip_reason;
        json docs = json::array();
        for (const auto& d : rec.docs) {
            json dj = json::object();
            dj["source_doc_title"] = d.source_doc_title;
            dj["fake_title"] = d.fake_title;
            dj["fake_answer"] = {{"original", d.fake_answer.original},
                                 {"fake", d.fake_answer.fake},
                                 {"mode", fake_mode_name(d.fake_answer.mode)}};
            if (d.fake_answer.substituted_word) {
                dj["fake_answer"]["substituted_word"] = {d.fake_answer.substituted_word->first,
                                                         d.fake_answer.substituted_word->second};
            }
            if (d.replaced_p1_title) dj["replaced_p1_title"] = *d.replaced_p1_title;
            if (d.balance_doc_title) dj["balance_doc_title"] = *d.balance_doc_title;
            dj["final_position"] = d.final_position;
            if (d.balance_final_position >= 0) dj["balance_final_position"] = d.balance_final_position;
            docs.push_back(std::move(dj));
        }
        r["docs"] = std::move(docs);
        records.push_back(std::move(r));
    }
    root["records"] = std::move(records);
    return root;
}

// Parses a provenance sidecar back into (records metadata); used by audit
// and failure analysis. Returns records aligned with ids.
struct ProvenanceRecord {
    std::string id;
    bool untouched = false;
    std::string skip_reason;
    std::vector<AdvDocProvenance> docs;
};

struct ProvenanceFile {
    uint64_t seed = 0;
    AdvConfig config;
    std::vector<ProvenanceRecord> records;
    std::unordered_map<std::string, size_t> by_id;
};

inline ProvenanceFile parse_provenance(const json& root) {
    if (!root.is_object() || root.value("schema", "") != "hopbreak-provenance/1")
        throw IoError("unrecognized provenance schema");
    ProvenanceFile out;
    out.seed = root.value("seed", uint64_t{0});
    const auto& cfg = root.at("config");
    out.config.seed = out.seed;
    out.config.n_adv_docs = cfg.value("n_adv_docs", 4);
    out.config.adv_fraction_for_training = cfg.value("adv_fraction_for_training", 0.4);
    out.config.glove_top_k = cfg.value("glove_top_k", 10);
    out.config.overlap_limit = cfg.value("overlap_limit", 3);
    out.config.placement = cfg.value("placement", "random_insert") == std::string("prepend")
                               ? Placement::prepend
                               : Placement::random_insert;
    out.config.pool_source = cfg.value("pool_source", "dev") == std::string("train")
                                 ? PoolSource::train
                                 : PoolSource::dev;
    for (const auto& r : root.at("records")) {
        ProvenanceRecord rec;
        rec.id = r.at("id").get<std::string>();
        rec.untouched = r.value("untouched", false);
        rec.skip_reason = r.value("skip_reason", "");
        for (const auto& d : r.value("docs", json::array())) {
            AdvDocProvenance prov;
            prov.source_doc_title = d.at("source_doc_title").get<std::string>();
            prov.fake_title = d.at("fake_title").get<std::string>();
            prov.fake_answer.original = d.at("fake_answer").at("original").get<std::string>();
            prov.fake_answer.fake = d.at("fake_answer").at("fake").get<std::string>();
            prov.fake_answer.mode = d.at("fake_answer").value("mode", "") == "pool_sample"
                                        ? FakeAnswer::Mode::pool_sample
                                        : FakeAnswer::Mode::glove_substitution;
            if (d.contains("replaced_p1_title"))
                prov.replaced_p1_title = d.at("replaced_p1_title").get<std::string>();
            if (d.contains("balance_doc_title"))
                prov.balance_doc_title = d.at("balance_doc_title").get<std::string>();
            prov.final_position = d.value("final_position", -1);
            prov.balance_final_position = d.value("balance_final_position", -1);
            rec.docs.push_back(std::move(prov));
        }
        out.by_id.emplace(rec.id, out.records.size());
        out.records.push_back(std::move(rec));
    }
    return out;
}

}  // namespace hopbreak
