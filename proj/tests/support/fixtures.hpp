#pragma once

// Shared test fixtures: a deterministic synthetic dataset in the HotpotQA
// distractor shape, a toy embedding table with engineered neighbor structure,
// and two hand-built bridge examples used across the suites.

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "hopbreak/advgen.hpp"
#include "hopbreak/corpus.hpp"
#include "hopbreak/embed.hpp"

namespace hopbreak::testing {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("hopbreak-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// ---------------------------------------------------------------------------
// Toy embedding table
//
// Words live in near-orthogonal clusters; within a cluster, word j sits at
// base + delta_j * offset_j with growing deltas, so the neighbor order inside
// a cluster is exactly the word order below. Engineered facts used by tests:
//   - "mumbai"     -> nearest is "delhi" (no filtered overlap)
//   - "goalkeeper" -> nearest is "goalkeepers" (rejected by the overlap
//                     filter), then "defender" (accepted)
//   - "palace"     -> nearest accepted neighbor is "castle"

inline const std::vector<std::vector<std::string>>& toy_clusters() {
    static const std::vector<std::vector<std::string>> clusters = {
        {"mumbai", "delhi", "chennai", "kolkata", "pune", "jaipur"},
        {"paris", "london", "berlin", "madrid", "rome", "oslo"},
        {"goalkeeper", "goalkeepers", "defender", "striker", "midfielder", "winger"},
        {"palace", "castle", "tower", "bridge", "museum", "library"},
        {"grand", "royal", "ancient", "modern", "coastal", "northern"},
        {"works", "headquartered", "founded", "employs", "located", "visited"},
    };
    return clusters;
}

inline EmbeddingTable make_toy_table() {
    constexpr int dim = 16;
    std::vector<std::string> words;
    std::vector<Eigen::VectorXd> rows;
    const auto& clusters = toy_clusters();
    for (size_t c = 0; c < clusters.size(); ++c) {
        for (size_t j = 0; j < clusters[c].size(); ++j) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
            v(static_cast<Eigen::Index>(c)) = 1.0;
            v(static_cast<Eigen::Index>(8 + j)) = 0.05 + 0.07 * static_cast<double>(j);
            words.push_back(clusters[c][j]);
            rows.push_back(std::move(v));
        }
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), dim);
    for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i];
    return EmbeddingTable(dim, std::move(words), std::move(m));
}

inline void write_toy_glove(const fs::path& path) {
    EmbeddingTable t = make_toy_table();
    std::string out;
    for (size_t i = 0; i < t.size(); ++i) {
        out += t.words()[i];
        for (int j = 0; j < t.dim(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), " %.6f", t.matrix()(static_cast<Eigen::Index>(i), j));
            out += buf;
        }
        out += "\n";
    }
    atomic_write_file(path, out);
}

// ---------------------------------------------------------------------------
// Hand-built bridge examples

// Two-document reasoning chain about a goalkeeper's award, with a shortcut:
// the keywords "voted ... IFFHS ... 1992" only occur in the answer sentence.
inline Example goalkeeper_example() {
    Example ex;
    ex.id = "fix-goalkeeper";
    ex.question = "What was the father of Kasper Schmeichel voted to be by the IFFHS in 1992?";
    ex.answer = "World's Best Goalkeeper";
    ex.qtype = QType::bridge;
    ex.level = "medium";
    ex.context = {
        {"Kasper Schmeichel",
         {"Kasper Peter Schmeichel is a Danish professional footballer who plays as a goalkeeper "
          "for Leicester City.",
          "He is the son of former Manchester United and Danish international goalkeeper Peter "
          "Schmeichel."}},
        {"Peter Schmeichel",
         {"Peter Boleslaw Schmeichel is a Danish former professional footballer who played as a "
          "goalkeeper.",
          "He was voted the IFFHS World's Best Goalkeeper in 1992 and 1993."}},
        {"Aqueduct Survey", {"The aqueduct survey of 1992 catalogued bridges across the region.",
                             "Its records are kept in the municipal library."}},
        {"Harbor Festival", {"The harbor festival features coastal music and food stalls.",
                             "Visitors arrive by ferry throughout the summer."}},
        {"Meadow Railway", {"The meadow railway operated a narrow gauge line until 1955.",
                            "Its locomotives are displayed in a transport museum."}},
        {"Quarry Heritage", {"The quarry heritage trust restores ancient stone workings.",
                             "Guided tours run on weekends."}},
        {"Orchard Almanac", {"The orchard almanac lists frost dates for fruit growers.",
                             "It has been published annually since 1903."}},
        {"Lantern Theatre", {"The lantern theatre stages modern plays in a converted mill.",
                             "Its company tours northern towns each spring."}},
        {"Granite Observatory", {"The granite observatory tracks meteor showers.",
                                 "Astronomers founded it on a coastal headland."}},
        {"Willow Regatta", {"The willow regatta is rowed on the old canal.",
                            "Crews from six towns entered the latest race."}},
    };
    ex.supporting_facts = {{"Kasper Schmeichel", 1}, {"Peter Schmeichel", 1}};
    return ex;
}

// Company-headquarters chain: the keyword "headquartered" appears in no
// distractor document.
inline Example headquarters_example() {
    Example ex;
    ex.id = "fix-headquarters";
    ex.question =
        "Which city is the headquarter of the company that Sachin Warrier worked for as a "
        "software engineer?";
    ex.answer = "Mumbai";
    ex.qtype = QType::bridge;
    ex.level = "medium";
    ex.context = {
        {"Sachin Warrier",
         {"Sachin Warrier is a playback singer and composer from Kerala.",
          "Before music, he worked as a software engineer for Tata Consultancy Services."}},
        {"Tata Consultancy Services",
         {"Tata Consultancy Services is an Indian multinational information technology services "
          "company, headquartered in Mumbai.",
          "The firm operates in dozens of countries."}},
        {"Cedar Apiary", {"The cedar apiary produces wildflower honey.",
                          "Its hives overwinter in a sheltered valley."}},
        {"Brass Foundry", {"The brass foundry cast bells for parish churches.",
                           "Its pattern books survive in an archive."}},
        {"Peat Survey", {"The peat survey mapped upland bogs.",
                         "Field teams recorded depth profiles."}},
        {"Mill Race", {"The mill race channels water to an overshot wheel.",
                       "Eels were once trapped at its outflow."}},
        {"Fen Chapel", {"The fen chapel stands on a gravel island.",
                        "Its roof timbers were replaced in 1844."}},
        {"Dune Lighthouse", {"The dune lighthouse guided coastal shipping.",
                             "Its lamp was converted to electricity in 1932."}},
        {"Heath Tramway", {"The heath tramway carried sand to the works.",
                           "A preserved wagon is displayed at the terminus."}},
        {"Clay Bank", {"The clay bank exposes fossil beds.",
                       "Collectors need a permit from the trust."}},
    };
    ex.supporting_facts = {{"Sachin Warrier", 1}, {"Tata Consultancy Services", 0}};
    return ex;
}

// ---------------------------------------------------------------------------
// Synthetic dataset

namespace detail {

inline const std::vector<std::string>& first_names() {
    static const std::vector<std::string> v = {"Mira", "Arden", "Tomas", "Leena", "Goran",
                                               "Priya", "Anders", "Celia", "Ivo", "Nadia"};
    return v;
}

inline const std::vector<std::string>& surnames() {
    static const std::vector<std::string> v = {"Falk", "Reyes", "Okafor", "Lindqvist", "Marsh",
                                               "Devi", "Horvat", "Bruun", "Kavanagh", "Sorel"};
    return v;
}

inline const std::vector<std::string>& company_stems() {
    static const std::vector<std::string> v = {"Nortia", "Vexler", "Ombra", "Calyx", "Drava",
                                               "Helix", "Quorum", "Sable", "Tarn", "Umbral"};
    return v;
}

inline const std::vector<std::string>& topic_words() {
    static const std::vector<std::string> v = {"Harbor", "Granite", "Willow", "Lantern", "Orchard",
                                               "Quarry", "Meadow", "Cedar", "Fen", "Dune"};
    return v;
}

inline std::string cap(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

}  // namespace detail

struct SyntheticOptions {
    size_t n_examples = 200;
    uint64_t seed = 99;
    double comparison_fraction = 0.21;
};

// Bridge questions follow a person -> company -> city chain; roughly 21% of
// examples are comparison questions left for passthrough. Answer styles
// rotate: toy-GloVe city (substitution path), "Adj Noun" phrase, an
// out-of-vocabulary token (pool fallback), and answers present in both
// supporting documents (alternating perturbation).
inline Dataset make_synthetic_dataset(const SyntheticOptions& opt = {}) {
    Dataset ds;
    size_t n_comparison = static_cast<size_t>(opt.comparison_fraction *
                                              static_cast<double>(opt.n_examples) + 0.5);
    SplitRng rng(opt.seed, "synthetic-dataset");

    const auto& cities = toy_clusters()[0];
    const auto& cities2 = toy_clusters()[1];
    const auto& nouns = toy_clusters()[3];
    const auto& adjs = toy_clusters()[4];

    for (size_t i = 0; i < opt.n_examples; ++i) {
        Example ex;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "syn-%04zu", i);
        ex.id = idbuf;
        ex.level = (i % 3 == 0) ? "hard" : "medium";

        std::string num = std::to_string(i);
        auto distractor = [&](size_t j) {
            const std::string& topic = detail::topic_words()[(i + j) % detail::topic_words().size()];
            Document d;
            d.title = topic + " Chronicle " + num + "-" + std::to_string(j);
            d.sentences = {
                "The " + to_lower(topic) + " chronicle of volume " + std::to_string(100 + j) +
                    " records seasonal observations.",
                "Its pages were bound in " + std::to_string(1890 + (i + j) % 60) + "."};
            return d;
        };

        bool comparison = i < n_comparison;
        if (comparison) {
            std::string a_title = "Alder Hall " + num;
            std::string b_title = "Birch Court " + num;
            ex.qtype = QType::comparison;
            ex.question = "Are " + a_title + " and " + b_title + " both used as concert venues?";
            ex.answer = (i % 2 == 0) ? "yes" : "no";
            Document a{a_title,
                       {a_title + " is a stone hall used for chamber concerts.",
                        "It seats roughly " + std::to_string(200 + i) + " listeners."}};
            Document b{b_title,
                       {b_title + ((i % 2 == 0) ? " hosts a winter concert series."
                                                : " is used only as a records office."),
                        "Its clock tower was restored recently."}};
            ex.context.push_back(a);
            ex.context.push_back(b);
            for (size_t j = 0; j < 8; ++j) ex.context.push_back(distractor(j));
            ex.supporting_facts = {{a_title, 0}, {b_title, 0}};
        } else {
            std::string person = detail::first_names()[i % 10] + " " +
                                 detail::surnames()[(i / 10) % 10] + " " + num;
            std::string company = detail::company_stems()[i % 10] + " " + num + " Group";

            int style = static_cast<int>(i % 10);
            std::string answer;
            if (style < 6) {
                answer = detail::cap((i % 2 == 0 ? cities : cities2)[(i / 2) % 6]);
            } else if (style < 8) {
                answer = detail::cap(adjs[i % 6]) + " " + detail::cap(nouns[(i / 3) % 6]);
            } else if (style == 8) {
                answer = "Vrexlum" + num;  // no vector, forces the pool fallback
            } else {
                answer = detail::cap(cities[(i / 4) % 6]);
            }
            bool answer_in_both = style == 9;
            bool mention_p1_in_p2 = (i % 5) == 0;

            ex.qtype = QType::bridge;
            ex.question = "Where is the company that " + person + " works for headquartered?";
            ex.answer = answer;

            Document p1;
            p1.title = person;
            p1.sentences = {person + " is a systems engineer and amateur archivist.",
                            person + " works for " + company + " on survey tooling."};
            if (answer_in_both)
                p1.sentences.push_back(person + " relocated to " + answer + " after joining.");

            Document p2;
            p2.title = company;
            p2.sentences = {company + " is a consulting firm headquartered in " + answer + ".",
                            mention_p1_in_p2
                                ? "It was co-founded by " + person + " and two partners."
                                : "It employs around " + std::to_string(300 + i) + " people."};

            ex.context.push_back(p1);
            ex.context.push_back(p2);
            for (size_t j = 0; j < 8; ++j) ex.context.push_back(distractor(j));
            ex.supporting_facts = {{person, 1}, {company, 0}};
        }

        // shuffle so supporting docs are not always at the front
        SplitRng shuffle_rng(opt.seed, ex.id + "/shuffle");
        shuffle_rng.shuffle(ex.context);
        ds.push_back(std::move(ex));
    }
    return ds;
}

}  // namespace hopbreak::testing
