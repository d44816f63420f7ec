#pragma once

// Desk-scale numerical reference of the 2-hop bi-attention reader with a
// recurrent control unit. Encoding is a highway merge followed by a BiLSTM;
// the attention stack follows the similarity / context-to-query /
// query-to-context construction, with the control unit's question
// distribution replacing the max-pool when a hop is controlled. Heads:
// span start/end, 3-way answer type, per-sentence supporting-fact scores,
// and bridge-entity span logits from the first hop.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopbreak/autodiff.hpp"
#include "hopbreak/common.hpp"

namespace hopbreak::nn {

using ad::Mat;
using ad::Node;
using ad::Tape;

struct ModelConfig {
    int embed_dim = 6;   // v: width after the highway merge
    int hidden_dim = 4;  // d: recurrent hidden width; contextual width is 2d
    int n_hops = 2;
    bool shared_hop_attention = true;  // parallel shared bi-attention layers
    uint64_t seed = 0;
};

// Reference-scale hyperparameters, recorded as documentation defaults. All tests
// and demos run at tiny dims.
struct ReferenceConfig {
    int glove_dim = 300;
    int encoder_hidden = 80;
    int control_state = 128;
    double adam_lr = 1e-3;
};

// ---------------------------------------------------------------------------
// Parameters

class ParamStore {
public:
    struct Entry {
        Mat value;
        Mat grad;
        Mat adam_m;
        Mat adam_v;
    };

    Entry& define(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                  uint64_t seed, bool zero_init = false) {
        auto [it, inserted] = entries_.try_emplace(name);
        if (!inserted) return it->second;
        Entry& e = it->second;
        e.value = Mat::Zero(rows, cols);
        if (!zero_init) {
            SplitRng rng(seed, name);
            double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
            for (Eigen::Index i = 0; i < rows; ++i)
                for (Eigen::Index j = 0; j < cols; ++j)
                    e.value(i, j) = rng.uniform_real(-limit, limit);
        }
        e.grad = Mat::Zero(rows, cols);
        e.adam_m = Mat::Zero(rows, cols);
        e.adam_v = Mat::Zero(rows, cols);
        return e;
    }

    Entry& at(const std::string& name) {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw std::out_of_range("no such parameter: " + name);
        return it->second;
    }

    const Entry& at(const std::string& name) const {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw std::out_of_range("no such parameter: " + name);
        return it->second;
    }

    bool contains(const std::string& name) const { return entries_.count(name) > 0; }

    void zero_grads() {
        for (auto& [_, e] : entries_) e.grad.setZero();
    }

    size_t parameter_count() const {
        size_t n = 0;
        for (const auto& [_, e] : entries_) n += static_cast<size_t>(e.value.size());
        return n;
    }

    std::map<std::string, Entry>& entries() { return entries_; }
    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::map<std::string, Entry> entries_;
};

// Leaf node whose backward pass accumulates into the store entry.
inline Node* leaf(Tape& t, ParamStore::Entry& e) {
    Node* out = t.make(e.value);
    ParamStore::Entry* ep = &e;
    out->backward_fn = [ep](Node& n) { ep->grad += n.grad; };
    return out;
}

inline Node* leaf(Tape& t, ParamStore& ps, const std::string& name) {
    return leaf(t, ps.at(name));
}

// ---------------------------------------------------------------------------
// Layers

// y = x W + b
inline Node* linear(Tape& t, Node* x, ParamStore& ps, const std::string& prefix) {
    Node* y = ad::matmul(x, leaf(t, ps, prefix + ".W"));
    return ad::add_row_broadcast(y, leaf(t, ps, prefix + ".b"));
}

// Two-gate highway: y = g * tanh(W_t x + b_t) + (1 - g) * x
inline Node* highway(Tape& t, Node* x, ParamStore& ps, const std::string& prefix) {
    Node* gate = ad::sigmoid(linear(t, x, ps, prefix + ".gate"));
    Node* transformed = ad::tanh_op(linear(t, x, ps, prefix + ".transform"));
    Node* ones = ad::constant(t, Mat::Ones(x->rows(), x->cols()));
    Node* carry = ad::sub(ones, gate);
    return ad::add(ad::mul(gate, transformed), ad::mul(carry, x));
}

namespace detail {

// One LSTM direction; rows of x are time steps. Gate layout [i | f | o | g].
inline std::vector<Node*> lstm_direction(Tape& t, Node* x, ParamStore& ps,
                                         const std::string& prefix, int d, bool reverse) {
    Node* Wx = leaf(t, ps, prefix + ".Wx");
    Node* Wh = leaf(t, ps, prefix + ".Wh");
    Node* b = leaf(t, ps, prefix + ".b");
    Eigen::Index steps = x->rows();
    Node* h = ad::constant(t, Mat::Zero(1, d));
    Node* c = ad::constant(t, Mat::Zero(1, d));
    std::vector<Node*> outputs(static_cast<size_t>(steps));
    for (Eigen::Index step = 0; step < steps; ++step) {
        Eigen::Index i = reverse ? steps - 1 - step : step;
        Node* xt = ad::row(x, i);
        Node* gates = ad::add_row_broadcast(
            ad::add(ad::matmul(xt, Wx), ad::matmul(h, Wh)), b);
        Node* in_gate = ad::sigmoid(ad::slice_cols(gates, 0, d));
        Node* forget_gate = ad::sigmoid(ad::slice_cols(gates, d, d));
        Node* out_gate = ad::sigmoid(ad::slice_cols(gates, 2 * d, d));
        Node* cell_in = ad::tanh_op(ad::slice_cols(gates, 3 * d, d));
        c = ad::add(ad::mul(forget_gate, c), ad::mul(in_gate, cell_in));
        h = ad::mul(out_gate, ad::tanh_op(c));
        outputs[static_cast<size_t>(i)] = h;
    }
    return outputs;
}

}  // namespace detail

// Bidirectional LSTM: rows in, rows out, output width 2d.
inline Node* bilstm(Tape& t, Node* x, ParamStore& ps, const std::string& prefix, int d) {
    if (x->rows() < 1) throw std::invalid_argument("bilstm: empty sequence");
    auto fw = detail::lstm_direction(t, x, ps, prefix + ".fw", d, false);
    auto bw = detail::lstm_direction(t, x, ps, prefix + ".bw", d, true);
    std::vector<Node*> rows;
    rows.reserve(fw.size());
    for (size_t i = 0; i < fw.size(); ++i) rows.push_back(ad::concat_cols({fw[i], bw[i]}));
    return ad::stack_rows(rows);
}

// Highway merge then bidirectional recurrence; width v in, width 2d out.
inline Node* encode_sequence(Tape& t, Node* x, ParamStore& ps, const std::string& prefix, int d) {
    if (x->rows() < 1) throw std::invalid_argument("encode_sequence: empty sequence");
    Node* merged = highway(t, x, ps, prefix + ".highway");
    return bilstm(t, merged, ps, prefix + ".rnn", d);
}

// ---------------------------------------------------------------------------
// Attention

enum class QtoCMode { max_pool, control_weighted };

struct BiAttnResult {
    Node* M = nullptr;         // S x J similarity
    Node* p_cols = nullptr;    // S x J, softmax over the question dim per column
    Node* c2q = nullptr;       // J x 2d context-to-query vectors
    Node* q2c_dist = nullptr;  // 1 x J distribution over context words
    Node* q2c = nullptr;       // 1 x 2d query-to-context vector
    Node* h_prime = nullptr;   // J x 8d fused representation
};

// M_{s,j} = W1 u_s + W2 h_j + W3 (u_s . h_j); context-to-query from the
// column softmax of M; query-to-context either from the row max (baseline)
// or the control distribution cv (controlled hop).
inline BiAttnResult biattn(Tape& t, Node* h, Node* u, ParamStore& ps, const std::string& prefix,
                           QtoCMode mode = QtoCMode::max_pool, Node* cv = nullptr) {
    if (h->cols() != u->cols()) throw std::invalid_argument("biattn: width mismatch");
    BiAttnResult r;
    Node* w1 = leaf(t, ps, prefix + ".W1");  // 1 x 2d
    Node* w2 = leaf(t, ps, prefix + ".W2");
    Node* w3 = leaf(t, ps, prefix + ".W3");
    Node* term_u = ad::matmul(u, ad::transpose(w1));                       // S x 1
    Node* term_h = ad::transpose(ad::matmul(h, ad::transpose(w2)));       // 1 x J
    Node* term_mix = ad::matmul(ad::mul_row_broadcast(u, w3), ad::transpose(h));  // S x J
    r.M = ad::add_col_broadcast(ad::add_row_broadcast(term_mix, term_h), term_u);
    r.p_cols = ad::softmax_cols(r.M);
    r.c2q = ad::matmul(ad::transpose(r.p_cols), u);

    Node* m;
    if (mode == QtoCMode::max_pool) {
        m = ad::max_over_rows(r.M);  // 1 x J
    } else {
        if (!cv) throw std::invalid_argument("biattn: control_weighted mode needs cv");
        m = ad::matmul(cv, r.M);  // 1 x J
    }
    r.q2c_dist = ad::softmax_all(m);
    r.q2c = ad::matmul(r.q2c_dist, h);

    r.h_prime = ad::concat_cols({h, r.c2q, ad::mul(h, r.c2q), ad::mul_row_broadcast(r.c2q, r.q2c)});
    return r;
}

struct ControlStep {
    Node* cv = nullptr;      // 1 x S distribution over question words
    Node* c_next = nullptr;  // 1 x 2d updated control state
};

// cq = Proj[c_prev; q]; ca_s = Proj(cq . u_s); cv = softmax(ca);
// c_next = sum_s cv_s u_s
inline ControlStep control_step(Tape& t, Node* c_prev, Node* u, Node* q_vec, ParamStore& ps,
                                const std::string& prefix = "ctrl") {
    Node* cq = linear(t, ad::concat_cols({c_prev, q_vec}), ps, prefix + ".cq");  // 1 x 2d
    Node* gated = ad::mul_row_broadcast(u, cq);                                  // S x 2d
    Node* ca = linear(t, gated, ps, prefix + ".ca");                             // S x 1
    ControlStep out;
    out.cv = ad::transpose(ad::softmax_all(ca));  // 1 x S
    out.c_next = ad::matmul(out.cv, u);           // 1 x 2d
    return out;
}

// Controlled hop: h is scaled elementwise by the control state everywhere it
// appears, and the question-dim max-pool is replaced by cv . M.
inline BiAttnResult controlled_biattn(Tape& t, Node* h, Node* u, Node* cv, Node* c_state,
                                      ParamStore& ps, const std::string& prefix) {
    Node* h_eff = ad::mul_row_broadcast(h, c_state);
    return biattn(t, h_eff, u, ps, prefix, QtoCMode::control_weighted, cv);
}

// BiAttn(h1, h1) followed by the recurrence back to width 2d.
inline Node* self_attention(Tape& t, Node* h1, ParamStore& ps, int d,
                            const std::string& prefix = "selfattn") {
    BiAttnResult r = biattn(t, h1, h1, ps, prefix, QtoCMode::max_pool);
    return bilstm(t, r.h_prime, ps, prefix + ".rnn", d);
}

// ---------------------------------------------------------------------------
// Full model

struct SentenceSpan {
    int begin = 0;  // token range [begin, end) in the context
    int end = 0;
};

struct ModelOutput {
    Node* start_logits = nullptr;         // J x 1
    Node* end_logits = nullptr;           // J x 1
    Node* type_logits = nullptr;          // 1 x 3: yes / no / span
    Node* sp_logits = nullptr;            // n_sentences x 1
    Node* bridge_start_logits = nullptr;  // J x 1
    Node* bridge_end_logits = nullptr;    // J x 1

    // intermediate tensors, kept for invariant checks and inspection
    Node* h = nullptr;
    Node* u = nullptr;
    Node* q_vec = nullptr;
    std::vector<Node*> cv;       // per hop, 1 x S
    std::vector<Node*> c_state;  // per hop, 1 x 2d
    std::vector<BiAttnResult> hop_attn;
    Node* h1_bridge = nullptr;  // hop-1 recurrence output feeding bridge heads
    Node* h1 = nullptr;         // hop-2 recurrence output
    Node* h2 = nullptr;         // after self-attention
    Node* h3 = nullptr;         // modeling layer feeding end/type heads
};

class TwoHopModel {
public:
    explicit TwoHopModel(ModelConfig cfg) : cfg_(cfg) {
        const int v = cfg_.embed_dim;
        const int d = cfg_.hidden_dim;
        const int w = 2 * d;
        define_linear("enc.highway.gate", v, v);
        define_linear("enc.highway.transform", v, v);
        define_bilstm("enc.rnn", v, d);
        for (const std::string& prefix : attention_prefixes()) {
            params_.define(prefix + ".W1", 1, w, cfg_.seed);
            params_.define(prefix + ".W2", 1, w, cfg_.seed);
            params_.define(prefix + ".W3", 1, w, cfg_.seed);
            define_bilstm(prefix + ".rnn", 4 * w, d);
        }
        define_linear("ctrl.cq", 2 * w, w);
        define_linear("ctrl.ca", w, 1);
        params_.define("selfattn.W1", 1, w, cfg_.seed);
        params_.define("selfattn.W2", 1, w, cfg_.seed);
        params_.define("selfattn.W3", 1, w, cfg_.seed);
        define_bilstm("selfattn.rnn", 4 * w, d);
        define_bilstm("modeling", w, d);
        define_linear("head.start", w, 1);
        define_linear("head.end", w, 1);
        define_linear("head.bridge_start", w, 1);
        define_linear("head.bridge_end", w, 1);
        define_linear("head.type", 2 * w, 3);
        define_linear("head.sp", w, 1);
    }

    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    std::vector<std::string> attention_prefixes() const {
        if (cfg_.shared_hop_attention) return {"battn"};
        std::vector<std::string> out;
        for (int i = 0; i < cfg_.n_hops; ++i) out.push_back("battn.hop" + std::to_string(i + 1));
        return out;
    }

    // x_ctx: J x v embedded context, x_q: S x v embedded question.
    ModelOutput forward(Tape& t, Node* x_ctx, Node* x_q,
                        const std::vector<SentenceSpan>& sentences) {
        const int d = cfg_.hidden_dim;
        ModelOutput out;
        out.h = encode_sequence(t, x_ctx, params_, "enc", d);
        out.u = encode_sequence(t, x_q, params_, "enc", d);
        out.q_vec = ad::mean_over_rows(out.u);

        Node* control = out.q_vec;  // initial control state is the question summary
        Node* hop_output = nullptr;
        for (int hop = 0; hop < cfg_.n_hops; ++hop) {
            ControlStep cs = control_step(t, control, out.u, out.q_vec, params_);
            out.cv.push_back(cs.cv);
            out.c_state.push_back(cs.c_next);
            control = cs.c_next;
            std::string prefix = cfg_.shared_hop_attention
                                     ? std::string("battn")
                                     : "battn.hop" + std::to_string(hop + 1);
            BiAttnResult attn = controlled_biattn(t, out.h, out.u, cs.cv, cs.c_next, params_, prefix);
            out.hop_attn.push_back(attn);
            hop_output = bilstm(t, attn.h_prime, params_, prefix + ".rnn", d);
            if (hop == 0) {
                out.h1_bridge = hop_output;
                out.bridge_start_logits = linear(t, hop_output, params_, "head.bridge_start");
                out.bridge_end_logits = linear(t, hop_output, params_, "head.bridge_end");
            }
        }
        out.h1 = hop_output;

        out.h2 = self_attention(t, out.h1, params_, d);
        out.start_logits = linear(t, out.h2, params_, "head.start");
        out.h3 = bilstm(t, out.h2, params_, "modeling", d);
        out.end_logits = linear(t, out.h3, params_, "head.end");

        Node* pooled = ad::concat_cols({ad::mean_over_rows(out.h3), ad::max_over_rows(out.h3)});
        out.type_logits = linear(t, pooled, params_, "head.type");

        if (!sentences.empty()) {
            std::vector<Node*> sent_rows;
            for (const auto& span : sentences) {
                if (span.begin < 0 || span.end <= span.begin || span.end > out.h2->rows())
                    throw std::invalid_argument("forward: sentence span out of range");
                sent_rows.push_back(
                    ad::mean_over_rows(ad::slice_rows(out.h2, span.begin, span.end - span.begin)));
            }
            out.sp_logits = linear(t, ad::stack_rows(sent_rows), params_, "head.sp");
        }
        return out;
    }

private:
    void define_linear(const std::string& prefix, int in, int out) {
        params_.define(prefix + ".W", in, out, cfg_.seed);
        params_.define(prefix + ".b", 1, out, cfg_.seed, /*zero_init=*/true);
    }

    void define_bilstm(const std::string& prefix, int in, int d) {
        for (const char* dir : {".fw", ".bw"}) {
            params_.define(prefix + dir + ".Wx", in, 4 * d, cfg_.seed);
            params_.define(prefix + dir + ".Wh", d, 4 * d, cfg_.seed);
            params_.define(prefix + dir + ".b", 1, 4 * d, cfg_.seed, /*zero_init=*/true);
        }
    }

    ModelConfig cfg_;
    ParamStore params_;
};

// ---------------------------------------------------------------------------
// Loss

struct GoldLabels {
    int start = 0;
    int end = 0;
    int type = 2;  // 0 yes, 1 no, 2 span
    int bridge_start = 0;
    int bridge_end = 0;
    Eigen::ArrayXd sp_targets;  // one per sentence, in {0,1}
};

struct LossWeights {
    double span = 1.0;
    double type = 1.0;
    double supporting = 1.0;
    double bridge = 1.0;
};

inline Node* loss(const ModelOutput& out, const GoldLabels& gold,
                  const LossWeights& weights = {}) {
    Node* total = ad::scale(
        ad::add(ad::cross_entropy_logits(out.start_logits, gold.start),
                ad::cross_entropy_logits(out.end_logits, gold.end)),
        weights.span);
    total = ad::add(total, ad::scale(ad::cross_entropy_logits(out.type_logits, gold.type),
                                     weights.type));
    total = ad::add(
        total,
        ad::scale(ad::add(ad::cross_entropy_logits(out.bridge_start_logits, gold.bridge_start),
                          ad::cross_entropy_logits(out.bridge_end_logits, gold.bridge_end)),
                  weights.bridge));
    if (out.sp_logits) {
        total = ad::add(total, ad::scale(ad::bce_with_logits(out.sp_logits, gold.sp_targets),
                                         weights.supporting));
    }
    return total;
}

// ---------------------------------------------------------------------------
// Span decoding

struct SpanDecode {
    int start = 0;
    int end = 0;
};

// Independent argmax over the two heads; start may land after end or in a
// different document, which is the observed failure mode of separate heads.
inline SpanDecode decode_span_independent(const Mat& start_logits, const Mat& end_logits) {
    SpanDecode out;
    Eigen::Index s, e;
    start_logits.maxCoeff(&s, &e);
    out.start = static_cast<int>(s);
    end_logits.maxCoeff(&s, &e);
    out.end = static_cast<int>(s);
    return out;
}

// Joint argmax of start+end constrained to start <= end within one document.
// doc_of_token maps each context token to its document index.
inline SpanDecode decode_span_constrained(const Mat& start_logits, const Mat& end_logits,
                                          const std::vector<int>& doc_of_token) {
    Eigen::Index J = start_logits.size();
    if (static_cast<Eigen::Index>(doc_of_token.size()) != J)
        throw std::invalid_argument("decode_span_constrained: token/document map length mismatch");
    SpanDecode best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s < J; ++s) {
        for (Eigen::Index e = s; e < J; ++e) {
            if (doc_of_token[static_cast<size_t>(s)] != doc_of_token[static_cast<size_t>(e)]) break;
            double score = start_logits.data()[s] + end_logits.data()[e];
            if (score > best_score) {
                best_score = score;
                best.start = static_cast<int>(s);
                best.end = static_cast<int>(e);
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Gradient check

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    Eigen::Index worst_index = -1;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// Central finite differences over every parameter coefficient. The relative
// error denominator is floored so that f(.)'s float rounding, amplified by
// 1/(2 eps), cannot dominate near-zero gradients.
inline GradCheckReport grad_check(ParamStore& ps, const std::function<Node*(Tape&)>& f,
                                  double eps = 1e-5) {
    ps.zero_grads();
    std::map<std::string, Mat> analytic;
    {
        Tape t;
        Node* root = f(t);
        if (!std::isfinite(root->scalar()))
            throw std::runtime_error("grad_check: non-finite loss");
        t.backward(root);
    }
    for (auto& [name, e] : ps.entries()) analytic[name] = e.grad;

    auto eval = [&]() {
        Tape t;
        double v = f(t)->scalar();
        if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite loss");
        return v;
    };

    GradCheckReport report;
    for (auto& [name, e] : ps.entries()) {
        for (Eigen::Index i = 0; i < e.value.size(); ++i) {
            double saved = e.value.data()[i];
            e.value.data()[i] = saved + eps;
            double f_plus = eval();
            e.value.data()[i] = saved - eps;
            double f_minus = eval();
            e.value.data()[i] = saved;
            double numeric = (f_plus - f_minus) / (2.0 * eps);
            double ga = analytic[name].data()[i];
            double rel = std::abs(ga - numeric) / (std::abs(ga) + std::abs(numeric) + 1e-4);
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = name;
                report.worst_index = i;
                report.worst_analytic = ga;
                report.worst_numeric = numeric;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Optimizer

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(ParamStore& ps) {
        ++t_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (auto& [_, e] : ps.entries()) {
            e.adam_m = cfg_.beta1 * e.adam_m + (1.0 - cfg_.beta1) * e.grad;
            e.adam_v = (cfg_.beta2 * e.adam_v.array() +
                        (1.0 - cfg_.beta2) * e.grad.array().square())
                           .matrix();
            Eigen::ArrayXXd m_hat = e.adam_m.array() / bc1;
            Eigen::ArrayXXd v_hat = e.adam_v.array() / bc2;
            e.value.array() -= cfg_.lr * m_hat / (v_hat.sqrt() + cfg_.eps);
        }
    }

private:
    AdamConfig cfg_;
    int t_ = 0;
};

// ---------------------------------------------------------------------------
// Checkpoints: flat name -> array container, versioned.

inline constexpr const char* kCheckpointFormat = "hopbreak-checkpoint/1";

inline nlohmann::ordered_json checkpoint_to_json(const ParamStore& ps, const ModelConfig& cfg) {
    nlohmann::ordered_json root;
    root["format"] = kCheckpointFormat;
    root["config"] = {{"embed_dim", cfg.embed_dim},
                      {"hidden_dim", cfg.hidden_dim},
                      {"n_hops", cfg.n_hops},
                      {"shared_hop_attention", cfg.shared_hop_attention},
                      {"seed", cfg.seed}};
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [name, e] : ps.entries()) {
        std::vector<double> data(e.value.data(), e.value.data() + e.value.size());
        params[name] = {{"rows", e.value.rows()}, {"cols", e.value.cols()}, {"data", data}};
    }
    root["params"] = std::move(params);
    return root;
}

inline void save_checkpoint(const ParamStore& ps, const ModelConfig& cfg,
                            const std::filesystem::path& path) {
    atomic_write_file(path, checkpoint_to_json(ps, cfg).dump());
}

inline std::pair<ModelConfig, std::map<std::string, Mat>> load_checkpoint(
    const std::filesystem::path& path) {
    auto root = nlohmann::ordered_json::parse(read_file(path));
    if (root.value("format", "") != kCheckpointFormat)
        throw IoError("unrecognized checkpoint format in " + path.string());
    ModelConfig cfg;
    const auto& c = root.at("config");
    cfg.embed_dim = c.at("embed_dim").get<int>();
    cfg.hidden_dim = c.at("hidden_dim").get<int>();
    cfg.n_hops = c.at("n_hops").get<int>();
    cfg.shared_hop_attention = c.at("shared_hop_attention").get<bool>();
    cfg.seed = c.at("seed").get<uint64_t>();
    std::map<std::string, Mat> params;
    for (const auto& [name, pj] : root.at("params").items()) {
        Eigen::Index rows = pj.at("rows").get<Eigen::Index>();
        Eigen::Index cols = pj.at("cols").get<Eigen::Index>();
        auto data = pj.at("data").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(data.size()) != rows * cols)
            throw IoError("checkpoint array size mismatch for " + name);
        Mat m(rows, cols);
        std::copy(data.begin(), data.end(), m.data());
        params.emplace(name, std::move(m));
    }
    return {cfg, std::move(params)};
}

inline void restore_params(ParamStore& ps, const std::map<std::string, Mat>& values) {
    for (const auto& [name, m] : values) {
        auto& e = ps.at(name);
        if (e.value.rows() != m.rows() || e.value.cols() != m.cols())
            throw IoError("checkpoint shape mismatch for " + name);
        e.value = m;
    }
}

}  // namespace hopbreak::nn
