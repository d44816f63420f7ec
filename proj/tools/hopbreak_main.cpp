// hopbreak: adversarial multi-hop QA dataset pipeline.
//
// Subcommands: generate, stats, shortcuts, evaluate, analyze, audit,
// model-demo. All outputs are written atomically and accompanied by a
// manifest recording inputs, configuration, seed, and content hashes.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hopbreak/advgen.hpp"
#include "hopbreak/analysis.hpp"
#include "hopbreak/corpus.hpp"
#include "hopbreak/embed.hpp"
#include "hopbreak/manifest.hpp"
#include "hopbreak/model_checks.hpp"

namespace hb = hopbreak;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Relative paths that do not resolve locally fall back to HOPBREAK_DATA_DIR.
fs::path resolve_input(const std::string& path) {
    fs::path p(path);
    if (fs::exists(p) || p.is_absolute()) return p;
    if (const char* root = std::getenv("HOPBREAK_DATA_DIR")) {
        fs::path alt = fs::path(root) / p;
        if (fs::exists(alt)) return alt;
    }
    return p;
}

hb::Dataset load_or_die(const fs::path& path, const fs::path& error_report_dir = {}) {
    hb::LoadReport report = hb::load_dataset(path);
    if (!report.clean()) {
        hb::json errors = hb::json::array();
        for (const auto& e : report.errors) {
            errors.push_back({{"record_index", e.record_index}, {"id", e.id}, {"message", e.message}});
        }
        hb::log(hb::LogLevel::warn, std::to_string(report.errors.size()) +
                                        " records failed schema validation in " + path.string());
        if (!error_report_dir.empty()) {
            fs::path report_path = error_report_dir / (path.stem().string() + ".load_errors.json");
            hb::atomic_write_file(report_path, errors.dump(2) + "\n");
            std::cerr << "schema error report: " << report_path.string() << "\n";
        }
    }
    return std::move(report.dataset);
}

hb::EmbeddingTable load_table(const std::string& glove, const std::string& cache, int dim) {
    if (!cache.empty()) {
        fs::path cache_path = resolve_input(cache);
        if (fs::exists(cache_path)) return hb::load_embedding_cache(cache_path);
        hb::EmbeddingTable t = hb::load_embeddings(resolve_input(glove), dim);
        hb::save_embedding_cache(t, cache_path);
        return t;
    }
    return hb::load_embeddings(resolve_input(glove), dim);
}

std::string slurp_args(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += " ";
        out += argv[i];
    }
    return out;
}

struct GenerateArgs {
    std::string data;
    std::string pool_data;
    std::string glove;
    std::string glove_cache;
    std::string out_dir = ".";
    std::string variant;
    std::string name;
    int n_adv_docs = 4;
    std::string placement = "random_insert";
    std::string pool_source = "dev";
    bool train_mix = false;
    double adv_fraction = 0.4;
    uint64_t seed = 13;
    int glove_dim = 100;
    unsigned jobs = 1;
};

int run_generate(const GenerateArgs& a, const std::string& command_line) {
    if (a.glove.empty() && a.glove_cache.empty())
        throw UsageError("generate needs --glove or --glove-cache");
    hb::AdvConfig cfg;
    std::string name = a.name;
    if (!a.variant.empty()) {
        auto vc = hb::variant_config(a.variant);
        if (!vc) throw std::invalid_argument("unknown variant: " + a.variant);
        cfg = *vc;
        if (name.empty()) name = hb::to_lower(a.variant);
    } else {
        cfg.n_adv_docs = a.n_adv_docs;
        if (a.placement == "prepend") cfg.placement = hb::Placement::prepend;
        else if (a.placement == "random_insert") cfg.placement = hb::Placement::random_insert;
        else throw std::invalid_argument("unknown placement: " + a.placement);
        if (name.empty())
            name = "add" + std::to_string(cfg.n_adv_docs) + "docs-" +
                   (cfg.placement == hb::Placement::prepend ? "prep" : "rand");
    }
    cfg.pool_source = a.pool_source == "train" ? hb::PoolSource::train : hb::PoolSource::dev;
    cfg.adv_fraction_for_training = a.adv_fraction;
    cfg.seed = a.seed;
    cfg.validate();

    fs::path out_dir(a.out_dir);
    fs::create_directories(out_dir);

    fs::path data_path = resolve_input(a.data);
    hb::Dataset ds = load_or_die(data_path, out_dir);

    fs::path pool_path = a.pool_data.empty() ? data_path : resolve_input(a.pool_data);
    hb::Dataset pool_ds;
    const hb::Dataset* pool_src = &ds;
    if (!a.pool_data.empty()) {
        pool_ds = load_or_die(pool_path, out_dir);
        pool_src = &pool_ds;
    }
    hb::Pools pools = hb::build_pools(*pool_src, cfg.pool_source);

    hb::EmbeddingTable table = load_table(a.glove, a.glove_cache, a.glove_dim);

    hb::GenerateResult result =
        hb::generate_dataset(ds, cfg, pools, table,
                             a.train_mix ? hb::GenerateMode::train : hb::GenerateMode::dev, a.jobs);

    fs::path dataset_path = out_dir / (name + ".json");
    fs::path provenance_path = out_dir / (name + ".provenance.json");
    fs::path manifest_path = out_dir / (name + ".manifest.json");
    hb::save_dataset(result.output, dataset_path);
    hb::atomic_write_file(provenance_path, hb::provenance_to_json(result, cfg).dump());

    hb::ManifestBuilder manifest(command_line, cfg.seed);
    manifest.set_config({{"variant", name},
                         {"n_adv_docs", cfg.n_adv_docs},
                         {"placement", hb::placement_name(cfg.placement)},
                         {"pool_source", hb::pool_source_name(cfg.pool_source)},
                         {"train_mix", a.train_mix},
                         {"adv_fraction_for_training", cfg.adv_fraction_for_training},
                         {"glove_dim", a.glove_dim},
                         {"jobs", a.jobs}});
    manifest.add_input(data_path);
    if (!a.pool_data.empty()) manifest.add_input(pool_path);
    if (!a.glove.empty() && fs::exists(resolve_input(a.glove))) manifest.add_input(resolve_input(a.glove));
    manifest.add_output(dataset_path);
    manifest.add_output(provenance_path);
    manifest.write(manifest_path);

    size_t perturbed = 0;
    for (const auto& r : result.records)
        if (!r.untouched) perturbed++;
    std::cout << "wrote " << dataset_path.string() << " (" << result.output.size() << " examples, "
              << perturbed << " perturbed, " << result.failures << " generation failures)\n";
    std::cout << "provenance: " << provenance_path.string() << "\n";
    std::cout << "manifest: " << manifest_path.string() << "\n";
    return 0;
}

int run_stats(const std::string& data, const std::string& out, const std::string& command_line) {
    fs::path data_path = resolve_input(data);
    hb::Dataset ds = load_or_die(data_path);
    hb::json j = hb::stats_to_json(hb::dataset_stats(ds));
    std::cout << j.dump(2) << "\n";
    if (!out.empty()) {
        hb::atomic_write_file(out, j.dump(2) + "\n");
        hb::ManifestBuilder manifest(command_line, 0);
        manifest.add_input(data_path);
        manifest.add_output(out);
        manifest.write(fs::path(out).string() + ".manifest.json");
    }
    return 0;
}

int run_shortcuts(const std::string& data, double tau, const std::string& out,
                  const std::string& command_line) {
    fs::path data_path = resolve_input(data);
    hb::Dataset ds = load_or_die(data_path);
    hb::json rows = hb::json::array();
    size_t flagged = 0;
    size_t scanned = 0;
    for (const auto& ex : ds) {
        if (ex.qtype != hb::QType::bridge || ex.is_yes_no()) continue;
        try {
            hb::ShortcutReport r = hb::detect_shortcut(ex, tau);
            rows.push_back(hb::shortcut_report_to_json(r));
            scanned++;
            if (r.flagged) flagged++;
        } catch (const hb::AnswerNotLocated& e) {
            hb::log(hb::LogLevel::warn, std::string("shortcut scan skipped: ") + e.what());
        }
    }
    hb::json summary = {{"tau", tau},
                        {"scanned", scanned},
                        {"flagged", flagged},
                        {"flagged_fraction",
                         scanned ? static_cast<double>(flagged) / static_cast<double>(scanned) : 0.0}};
    std::cout << summary.dump(2) << "\n";
    if (!out.empty()) {
        hb::json full = {{"summary", summary}, {"reports", rows}};
        hb::atomic_write_file(out, full.dump(2) + "\n");
        hb::ManifestBuilder manifest(command_line, 0);
        manifest.add_input(data_path);
        manifest.add_output(out);
        manifest.write(fs::path(out).string() + ".manifest.json");
    }
    return 0;
}

int run_evaluate(const std::string& pred, const std::string& gold, const std::string& out,
                 const std::string& command_line) {
    fs::path pred_path = resolve_input(pred);
    fs::path gold_path = resolve_input(gold);
    hb::Dataset ds = load_or_die(gold_path);
    auto preds = hb::load_predictions(pred_path);
    hb::EMReport report = hb::evaluate(preds, ds);
    hb::json j = hb::em_report_to_json(report);
    std::cout << j.dump(2) << "\n";
    if (!out.empty()) {
        hb::atomic_write_file(out, j.dump(2) + "\n");
        hb::ManifestBuilder manifest(command_line, 0);
        manifest.add_input(pred_path);
        manifest.add_input(gold_path);
        manifest.add_output(out);
        manifest.write(fs::path(out).string() + ".manifest.json");
    }
    return 0;
}

int run_analyze(const std::string& pred_regular, const std::string& pred_adv,
                const std::string& gold, const std::string& adv_data,
                const std::string& provenance, const std::string& out,
                const std::string& command_line) {
    hb::Dataset ds = load_or_die(resolve_input(gold));
    hb::Dataset advds = load_or_die(resolve_input(adv_data));
    auto preds_reg = hb::load_predictions(resolve_input(pred_regular));
    auto preds_adv = hb::load_predictions(resolve_input(pred_adv));
    hb::ProvenanceFile prov =
        hb::parse_provenance(hb::json::parse(hb::read_file(resolve_input(provenance))));
    hb::FailureAnalysis fa = hb::partition_outcomes(preds_reg, preds_adv, ds, advds, prov);
    hb::json j = hb::failure_analysis_to_json(fa);
    std::cout << j.dump(2) << "\n";
    if (!out.empty()) {
        hb::atomic_write_file(out, j.dump(2) + "\n");
        hb::ManifestBuilder manifest(command_line, 0);
        manifest.add_input(resolve_input(pred_regular));
        manifest.add_input(resolve_input(pred_adv));
        manifest.add_input(resolve_input(gold));
        manifest.add_input(resolve_input(adv_data));
        manifest.add_input(resolve_input(provenance));
        manifest.add_output(out);
        manifest.write(fs::path(out).string() + ".manifest.json");
    }
    return 0;
}

int run_audit(const std::string& orig, const std::string& adv, const std::string& provenance,
              const std::string& out, size_t manual_sample, uint64_t manual_seed,
              const std::string& command_line) {
    hb::Dataset original = load_or_die(resolve_input(orig));
    hb::Dataset adversarial = load_or_die(resolve_input(adv));
    hb::ProvenanceFile prov =
        hb::parse_provenance(hb::json::parse(hb::read_file(resolve_input(provenance))));
    hb::AuditReport report = hb::audit_adversarial(original, adversarial, prov);
    hb::json j = hb::audit_report_to_json(report);
    std::cout << j.dump(2) << "\n";

    fs::path report_path = out.empty() ? fs::path("audit_report.json") : fs::path(out);
    hb::atomic_write_file(report_path, j.dump(2) + "\n");
    hb::ManifestBuilder manifest(command_line, manual_seed);
    manifest.add_input(resolve_input(orig));
    manifest.add_input(resolve_input(adv));
    manifest.add_input(resolve_input(provenance));
    manifest.add_output(report_path);
    manifest.write(report_path.string() + ".manifest.json");

    if (manual_sample > 0) {
        auto samples = hb::sample_for_manual_check(adversarial, prov, manual_sample, manual_seed);
        std::string rendered;
        for (const auto& [ex, text] : samples) rendered += text + "\n---\n";
        fs::path sample_path = report_path.string() + ".manual_sample.txt";
        hb::atomic_write_file(sample_path, rendered);
        std::cout << "manual sample: " << sample_path.string() << "\n";
    }

    if (!report.all_passed()) {
        std::cerr << "audit FAILED, report: " << report_path.string() << "\n";
        return 3;
    }
    std::cout << "audit passed (" << report.records_audited << " records)\n";
    return 0;
}

int run_model_demo(uint64_t seed, double grad_tolerance) {
    auto checks = hb::nn::attention_mechanism_checks(seed);
    bool all_ok = true;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name
                  << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
        all_ok &= c.passed;
    }
    hb::nn::GradCheckReport grad = hb::nn::full_model_grad_check(seed);
    bool grad_ok = grad.max_rel_error < grad_tolerance;
    std::cout << (grad_ok ? "[PASS] " : "[FAIL] ") << "gradient_fidelity (max rel error "
              << grad.max_rel_error << " in " << grad.worst_param << ")\n";
    all_ok &= grad_ok;
    return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hopbreak: adversarial multi-hop QA dataset pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("hopbreak ") + hb::kVersion);
    app.set_config("--config", "", "read options from a config file");

    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "debug|info|warn|error|quiet")->capture_default_str();

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "build an adversarial dataset");
    generate->add_option("--data", gen.data, "source dataset (HotpotQA JSON)")->required();
    generate->add_option("--glove", gen.glove, "word vector file (GloVe text format)");
    generate->add_option("--glove-cache", gen.glove_cache, "binary vector cache (created if missing)");
    generate->add_option("--glove-dim", gen.glove_dim, "vector width")->capture_default_str();
    generate->add_option("--out", gen.out_dir, "output directory")->capture_default_str();
    generate->add_option("--variant", gen.variant,
                         "add4docs-rand | add4docs-prep | add8docs-rand | add8docs-prep");
    generate->add_option("--name", gen.name, "output base name (defaults to variant)");
    generate->add_option("--n-adv-docs", gen.n_adv_docs,
                         "adversarial documents per answer-bearing supporting doc")
        ->capture_default_str();
    generate->add_option("--placement", gen.placement, "random_insert | prepend")
        ->capture_default_str();
    generate->add_option("--pool-source", gen.pool_source, "train | dev (provenance label)")
        ->capture_default_str();
    generate->add_option("--pool-data", gen.pool_data, "dataset for answer/title pools (defaults to --data)");
    generate->add_flag("--train-mix", gen.train_mix,
                       "emit regular data plus a sampled fraction of adversarial examples");
    generate->add_option("--adv-fraction", gen.adv_fraction,
                         "fraction of adversarial examples mixed into training output")
        ->capture_default_str();
    generate->add_option("--seed", gen.seed, "generation seed")->capture_default_str();
    generate->add_option("--jobs", gen.jobs, "parallel workers (output is worker-count independent)")
        ->capture_default_str();

    std::string stats_data, stats_out;
    auto* stats = app.add_subcommand("stats", "dataset statistics");
    stats->add_option("--data", stats_data)->required();
    stats->add_option("--out", stats_out, "also write the report here");

    std::string sc_data, sc_out;
    double sc_tau = 0.2;
    auto* shortcuts = app.add_subcommand("shortcuts", "scan for reasoning shortcuts");
    shortcuts->add_option("--data", sc_data)->required();
    shortcuts->add_option("--tau", sc_tau, "flagging margin")->capture_default_str();
    shortcuts->add_option("--out", sc_out, "write per-example reports here");

    std::string ev_pred, ev_gold, ev_out;
    auto* evaluate = app.add_subcommand("evaluate", "exact-match evaluation");
    evaluate->add_option("--pred", ev_pred, "prediction JSON")->required();
    evaluate->add_option("--gold", ev_gold, "gold dataset")->required();
    evaluate->add_option("--out", ev_out);

    std::string an_pred_reg, an_pred_adv, an_gold, an_adv_data, an_prov, an_out;
    auto* analyze = app.add_subcommand("analyze", "regular-vs-adversarial failure analysis");
    analyze->add_option("--pred-regular", an_pred_reg)->required();
    analyze->add_option("--pred-adv", an_pred_adv)->required();
    analyze->add_option("--gold", an_gold)->required();
    analyze->add_option("--adv-data", an_adv_data)->required();
    analyze->add_option("--provenance", an_prov)->required();
    analyze->add_option("--out", an_out);

    std::string au_orig, au_adv, au_prov, au_out;
    size_t au_sample = 0;
    uint64_t au_seed = 50;
    auto* audit = app.add_subcommand("audit", "verify generation invariants");
    audit->add_option("--orig", au_orig, "original dataset")->required();
    audit->add_option("--adv", au_adv, "generated dataset")->required();
    audit->add_option("--provenance", au_prov)->required();
    audit->add_option("--out", au_out, "report path (default audit_report.json)");
    audit->add_option("--manual-sample", au_sample, "render N examples for manual review");
    audit->add_option("--manual-seed", au_seed)->capture_default_str();

    uint64_t demo_seed = 7;
    double demo_grad_tol = 1e-4;
    auto* demo = app.add_subcommand("model-demo",
                                    "run the attention mechanism checks and gradient check");
    demo->add_option("--seed", demo_seed)->capture_default_str();
    demo->add_option("--grad-tolerance", demo_grad_tol)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (log_level == "debug") hb::log_level() = hb::LogLevel::debug;
    else if (log_level == "info") hb::log_level() = hb::LogLevel::info;
    else if (log_level == "warn") hb::log_level() = hb::LogLevel::warn;
    else if (log_level == "error") hb::log_level() = hb::LogLevel::error;
    else if (log_level == "quiet") hb::log_level() = hb::LogLevel::quiet;
    else {
        std::cerr << "unknown log level: " << log_level << "\n";
        return 2;
    }

    std::string command_line = slurp_args(argc, argv);
    try {
        if (*generate) return run_generate(gen, command_line);
        if (*stats) return run_stats(stats_data, stats_out, command_line);
        if (*shortcuts) return run_shortcuts(sc_data, sc_tau, sc_out, command_line);
        if (*evaluate) return run_evaluate(ev_pred, ev_gold, ev_out, command_line);
        if (*analyze)
            return run_analyze(an_pred_reg, an_pred_adv, an_gold, an_adv_data, an_prov, an_out,
                               command_line);
        if (*audit)
            return run_audit(au_orig, au_adv, au_prov, au_out, au_sample, au_seed, command_line);
        if (*demo) return run_model_demo(demo_seed, demo_grad_tol);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const hb::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const std::out_of_range& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
