#pragma once

// Self-contained verification suite for the attention mechanism: the
// degeneracy and normalization identities the construction must satisfy,
// plus the finite-difference fidelity check of the full 2-hop loss.
// Shared by the CLI model-demo and the acceptance tests.

#include <string>
#include <vector>

#include "hopbreak/model.hpp"

namespace hopbreak::nn {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline Mat random_mat(SplitRng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    return m;
}

}  // namespace detail

inline std::vector<CheckResult> attention_mechanism_checks(uint64_t seed = 7) {
    std::vector<CheckResult> results;
    auto record = [&](const std::string& name, bool ok, const std::string& detail = "") {
        results.push_back({name, ok, detail});
    };

    const int d = 4;
    const int w = 2 * d;
    const int v = 6;
    const int J = 7;
    const int S = 5;
    SplitRng rng(seed, "mechanism-checks");

    ModelConfig cfg;
    cfg.embed_dim = v;
    cfg.hidden_dim = d;
    cfg.seed = seed;
    TwoHopModel model(cfg);

    std::vector<SentenceSpan> sentences = {{0, 3}, {3, 7}};
    Mat x_ctx = detail::random_mat(rng, J, v);
    Mat x_q = detail::random_mat(rng, S, v);

    {
        Tape t;
        ModelOutput out = model.forward(t, ad::constant(t, x_ctx), ad::constant(t, x_q), sentences);

        bool sums_ok = true;
        double worst = 0.0;
        auto check_sum = [&](double s) {
            worst = std::max(worst, std::abs(s - 1.0));
            if (std::abs(s - 1.0) > 1e-6) sums_ok = false;
        };
        for (const auto& attn : out.hop_attn) {
            for (Eigen::Index j = 0; j < attn.p_cols->cols(); ++j)
                check_sum(attn.p_cols->value.col(j).sum());
            check_sum(attn.q2c_dist->value.sum());
        }
        for (Node* cv : out.cv) check_sum(cv->value.sum());
        record("softmax_normalization", sums_ok,
               "max |sum - 1| = " + std::to_string(worst));

        bool finite = true;
        for (Node* n : {out.start_logits, out.end_logits, out.type_logits, out.sp_logits,
                        out.bridge_start_logits, out.bridge_end_logits})
            if (!n || !n->value.allFinite()) finite = false;
        record("finite_outputs", finite);
    }

    // one-hot cv selects a row of M exactly
    {
        Tape t;
        ParamStore& ps = model.params();
        Node* h = ad::constant(t, detail::random_mat(rng, J, w));
        Node* u = ad::constant(t, detail::random_mat(rng, S, w));
        Eigen::Index s_star = 2;
        Mat cv_val = Mat::Zero(1, S);
        cv_val(0, s_star) = 1.0;
        Node* cv = ad::constant(t, cv_val);
        Node* ones = ad::constant(t, Mat::Ones(1, w));
        BiAttnResult r = controlled_biattn(t, h, u, cv, ones, ps, "battn");
        Mat m_prime = cv_val * r.M->value;
        bool exact = (m_prime - r.M->value.row(s_star)).cwiseAbs().maxCoeff() == 0.0;
        // the resulting q2c distribution must equal the softmax of that row
        Tape t2;
        Node* row_sm = ad::softmax_all(ad::constant(t2, Mat(r.M->value.row(s_star))));
        bool dist_exact = (row_sm->value - r.q2c_dist->value).cwiseAbs().maxCoeff() == 0.0;
        record("one_hot_cv_row_selection", exact && dist_exact);
    }

    // S = 1: every c2q row equals the single question vector; cv = [1]
    {
        Tape t;
        ParamStore& ps = model.params();
        Node* h = ad::constant(t, detail::random_mat(rng, J, w));
        Node* u = ad::constant(t, detail::random_mat(rng, 1, w));
        BiAttnResult r = biattn(t, h, u, ps, "battn");
        bool c2q_ok = true;
        for (Eigen::Index j = 0; j < J; ++j)
            if ((r.c2q->value.row(j) - u->value.row(0)).cwiseAbs().maxCoeff() != 0.0) c2q_ok = false;
        Node* q_vec = ad::mean_over_rows(u);
        ControlStep cs = control_step(t, q_vec, u, q_vec, ps);
        bool cv_ok = cs.cv->value(0, 0) == 1.0 &&
                     (cs.c_next->value - u->value).cwiseAbs().maxCoeff() == 0.0;
        record("s1_degeneracy", c2q_ok && cv_ok);
    }

    // J = 1: the query-to-context vector is the single context vector
    {
        Tape t;
        ParamStore& ps = model.params();
        Node* h = ad::constant(t, detail::random_mat(rng, 1, w));
        Node* u = ad::constant(t, detail::random_mat(rng, S, w));
        BiAttnResult r = biattn(t, h, u, ps, "battn");
        record("j1_degeneracy", (r.q2c->value - h->value).cwiseAbs().maxCoeff() == 0.0);
    }

    // controlled path with one-hot cv at the max of the single question row
    // reduces to the baseline q2c when S = 1 and the control state is ones
    {
        Tape t;
        ParamStore& ps = model.params();
        Node* h = ad::constant(t, detail::random_mat(rng, J, w));
        Node* u = ad::constant(t, detail::random_mat(rng, 1, w));
        BiAttnResult base = biattn(t, h, u, ps, "battn");
        Node* cv = ad::constant(t, Mat::Ones(1, 1));
        Node* ones = ad::constant(t, Mat::Ones(1, w));
        BiAttnResult ctrl = controlled_biattn(t, h, u, cv, ones, ps, "battn");
        record("controlled_reduces_to_baseline",
               (base.q2c->value - ctrl.q2c->value).cwiseAbs().maxCoeff() == 0.0);
    }

    // permuting question rows permutes cv and leaves the control state fixed
    {
        Tape t;
        ParamStore& ps = model.params();
        Mat u_val = detail::random_mat(rng, S, w);
        std::vector<Eigen::Index> perm = {3, 0, 4, 1, 2};
        Mat u_perm(S, w);
        for (int s = 0; s < S; ++s) u_perm.row(s) = u_val.row(perm[static_cast<size_t>(s)]);
        Mat q_fixed = detail::random_mat(rng, 1, w);
        Node* q = ad::constant(t, q_fixed);
        ControlStep a = control_step(t, q, ad::constant(t, u_val), q, ps);
        ControlStep b = control_step(t, q, ad::constant(t, u_perm), q, ps);
        bool cv_ok = true;
        for (int s = 0; s < S; ++s) {
            if (std::abs(b.cv->value(0, s) - a.cv->value(0, perm[static_cast<size_t>(s)])) > 1e-12)
                cv_ok = false;
        }
        bool c_ok = (a.c_next->value - b.c_next->value).cwiseAbs().maxCoeff() < 1e-12;
        record("control_permutation_invariance", cv_ok && c_ok);
    }

    // start and end heads are distinct: perturbing the end head leaves the
    // start logits bit-identical
    {
        Tape t;
        ModelOutput before = model.forward(t, ad::constant(t, x_ctx), ad::constant(t, x_q), sentences);
        Mat start_before = before.start_logits->value;
        Mat end_before = before.end_logits->value;
        auto& end_w = model.params().at("head.end.W");
        Mat saved = end_w.value;
        end_w.value.array() += 0.5;
        Tape t2;
        ModelOutput after = model.forward(t2, ad::constant(t2, x_ctx), ad::constant(t2, x_q), sentences);
        bool start_same = (after.start_logits->value - start_before).cwiseAbs().maxCoeff() == 0.0;
        bool end_moved = (after.end_logits->value - end_before).cwiseAbs().maxCoeff() > 0.0;
        end_w.value = saved;
        record("separate_span_heads", start_same && end_moved);
    }

    return results;
}

// Finite-difference fidelity of the full 2-hop loss at tiny dims.
inline GradCheckReport full_model_grad_check(uint64_t seed = 11, double eps = 1e-5) {
    const int J = 7;
    const int S = 5;
    ModelConfig cfg;
    cfg.embed_dim = 6;
    cfg.hidden_dim = 4;
    cfg.seed = seed;
    TwoHopModel model(cfg);
    SplitRng rng(seed, "grad-check-inputs");
    Mat x_ctx = detail::random_mat(rng, J, cfg.embed_dim);
    Mat x_q = detail::random_mat(rng, S, cfg.embed_dim);
    std::vector<SentenceSpan> sentences = {{0, 3}, {3, 7}};
    GoldLabels gold;
    gold.start = 2;
    gold.end = 4;
    gold.type = 2;
    gold.bridge_start = 1;
    gold.bridge_end = 1;
    gold.sp_targets = Eigen::ArrayXd::Zero(2);
    gold.sp_targets(1) = 1.0;

    auto build = [&](Tape& t) -> Node* {
        ModelOutput out = model.forward(t, ad::constant(t, x_ctx), ad::constant(t, x_q), sentences);
        return loss(out, gold);
    };
    return grad_check(model.params(), build, eps);
}

}  // namespace hopbreak::nn
