#include <catch2/catch_amalgamated.hpp>

#include "hopbreak/autodiff.hpp"

using namespace hopbreak;
using namespace hopbreak::ad;

namespace {

Mat random_mat(SplitRng& rng, Eigen::Index r, Eigen::Index c) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

// numeric gradient of a scalar-valued graph with respect to one input matrix
double max_grad_error(const Mat& x0, const std::function<Node*(Tape&, Node*)>& f,
                      double eps = 1e-6) {
    Mat x = x0;
    Mat analytic;
    {
        Tape t;
        Node* in = constant(t, x);
        Node* out = f(t, in);
        t.backward(out);
        analytic = in->grad;
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double saved = x.data()[i];
        auto eval = [&]() {
            Tape t;
            return f(t, constant(t, x))->scalar();
        };
        x.data()[i] = saved + eps;
        double hi = eval();
        x.data()[i] = saved - eps;
        double lo = eval();
        x.data()[i] = saved;
        double numeric = (hi - lo) / (2 * eps);
        double rel = std::abs(analytic.data()[i] - numeric) /
                     (std::abs(analytic.data()[i]) + std::abs(numeric) + 1e-6);
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace

TEST_CASE("elementwise op gradients") {
    SplitRng rng(1);
    Mat x = random_mat(rng, 3, 4);
    Mat y = random_mat(rng, 3, 4);

    CHECK(max_grad_error(x, [&](Tape& t, Node* in) {
              return sum_all(mul(in, constant(t, y)));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              return sum_all(sigmoid(in));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              return sum_all(tanh_op(in));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape& t, Node* in) {
              return sum_all(mul(sub(in, constant(t, y)), add(in, constant(t, y))));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) { return scale(sum_all(in), -2.5); }) < 1e-6);
}

TEST_CASE("matmul / transpose / broadcast gradients") {
    SplitRng rng(2);
    Mat x = random_mat(rng, 3, 4);
    Mat w = random_mat(rng, 4, 2);
    Mat row_v = random_mat(rng, 1, 4);
    Mat col_v = random_mat(rng, 3, 1);

    CHECK(max_grad_error(x, [&](Tape& t, Node* in) {
              return sum_all(matmul(in, constant(t, w)));
          }) < 1e-6);
    CHECK(max_grad_error(w, [&](Tape& t, Node* in) {
              return sum_all(tanh_op(matmul(constant(t, x), in)));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              return sum_all(transpose(in));
          }) < 1e-6);
    CHECK(max_grad_error(row_v, [&](Tape& t, Node* in) {
              return sum_all(sigmoid(add_row_broadcast(constant(t, x), in)));
          }) < 1e-6);
    CHECK(max_grad_error(col_v, [&](Tape& t, Node* in) {
              return sum_all(sigmoid(add_col_broadcast(constant(t, x), in)));
          }) < 1e-6);
    CHECK(max_grad_error(row_v, [&](Tape& t, Node* in) {
              return sum_all(tanh_op(mul_row_broadcast(constant(t, x), in)));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape& t, Node* in) {
              return sum_all(tanh_op(mul_row_broadcast(in, constant(t, row_v))));
          }) < 1e-6);
}

TEST_CASE("softmax ops") {
    SplitRng rng(3);
    Mat x = random_mat(rng, 4, 3);

    SECTION("columns sum to one") {
        Tape t;
        Node* p = softmax_cols(constant(t, x));
        for (Eigen::Index j = 0; j < p->cols(); ++j) {
            CHECK(p->value.col(j).sum() == Catch::Approx(1.0).margin(1e-12));
            for (Eigen::Index i = 0; i < p->rows(); ++i) CHECK(p->value(i, j) >= 0.0);
        }
    }
    SECTION("softmax_all sums to one") {
        Tape t;
        Node* p = softmax_all(constant(t, x));
        CHECK(p->value.sum() == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("gradients") {
        CHECK(max_grad_error(x, [&](Tape& t, Node* in) {
                  SplitRng r1(9);
                  Mat weights = random_mat(r1, 4, 3);
                  return sum_all(mul(softmax_cols(in), constant(t, weights)));
              }) < 1e-6);
        CHECK(max_grad_error(x, [&](Tape& t, Node* in) {
                  SplitRng r2(10);
                  Mat weights = random_mat(r2, 4, 3);
                  return sum_all(mul(softmax_all(in), constant(t, weights)));
              }) < 1e-6);
    }
    SECTION("shift invariance") {
        Tape t;
        Node* a = softmax_all(constant(t, x));
        Mat shifted = x.array() + 100.0;
        Node* b = softmax_all(constant(t, shifted));
        CHECK((a->value - b->value).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("structural op gradients") {
    SplitRng rng(4);
    Mat x = random_mat(rng, 5, 3);

    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              return sum_all(max_over_rows(in));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              return sum_all(tanh_op(mean_over_rows(in)));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              return sum_all(tanh_op(row(in, 2)));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              return sum_all(tanh_op(slice_rows(in, 1, 3)));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              return sum_all(tanh_op(slice_cols(in, 1, 2)));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              return sum_all(tanh_op(concat_cols({in, mul(in, in)})));
          }) < 1e-6);
    CHECK(max_grad_error(x, [&](Tape&, Node* in) {
              std::vector<Node*> rows_vec;
              for (Eigen::Index i = 0; i < in->rows(); ++i) rows_vec.push_back(row(in, i));
              return sum_all(tanh_op(stack_rows(rows_vec)));
          }) < 1e-6);
}

TEST_CASE("cross entropy with logits") {
    SECTION("uniform logits give ln(n)") {
        Tape t;
        Node* logits = constant(t, Mat::Zero(4, 1));
        Node* ce = cross_entropy_logits(logits, 2);
        CHECK(ce->scalar() == Catch::Approx(std::log(4.0)).epsilon(1e-12));
    }
    SECTION("confident correct logits give near-zero loss") {
        Tape t;
        Mat v = Mat::Zero(1, 3);
        v(0, 1) = 1e4;
        Node* ce = cross_entropy_logits(constant(t, v), 1);
        CHECK(ce->scalar() < 1e-8);
    }
    SECTION("gradient matches finite differences") {
        SplitRng rng(5);
        Mat x = random_mat(rng, 6, 1);
        CHECK(max_grad_error(x, [&](Tape&, Node* in) {
                  return cross_entropy_logits(in, 3);
              }) < 1e-6);
    }
    SECTION("out-of-range target throws") {
        Tape t;
        Node* logits = constant(t, Mat::Zero(4, 1));
        CHECK_THROWS_AS(cross_entropy_logits(logits, 4), std::out_of_range);
    }
}

TEST_CASE("binary cross entropy with logits") {
    SECTION("value against a scalar recomputation") {
        Tape t;
        Mat x(3, 1);
        x << 0.5, -1.0, 2.0;
        Eigen::ArrayXd targets(3);
        targets << 1.0, 0.0, 1.0;
        Node* l = bce_with_logits(constant(t, x), targets);
        auto single = [](double logit, double y) {
            double p = 1.0 / (1.0 + std::exp(-logit));
            return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
        };
        double expect = single(0.5, 1) + single(-1, 0) + single(2, 1);
        CHECK(l->scalar() == Catch::Approx(expect).epsilon(1e-10));
    }
    SECTION("gradient") {
        SplitRng rng(6);
        Mat x = random_mat(rng, 5, 1);
        Eigen::ArrayXd targets(5);
        targets << 1, 0, 1, 1, 0;
        CHECK(max_grad_error(x, [&](Tape&, Node* in) {
                  return bce_with_logits(in, targets);
              }) < 1e-6);
    }
}

TEST_CASE("shape mismatches are rejected") {
    Tape t;
    Node* a = constant(t, Mat::Zero(2, 3));
    Node* b = constant(t, Mat::Zero(3, 2));
    CHECK_THROWS_AS(add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(mul(a, b), std::invalid_argument);
    CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);
    CHECK_THROWS_AS(add_row_broadcast(a, constant(t, Mat::Zero(1, 2))), std::invalid_argument);
    CHECK_THROWS_AS(t.backward(a), std::logic_error);
}

TEST_CASE("gradients accumulate across reuse") {
    Tape t;
    Mat x(1, 1);
    x << 3.0;
    Node* in = constant(t, x);
    Node* out = add(mul(in, in), in);  // x^2 + x, d/dx = 2x + 1 = 7
    t.backward(out);
    CHECK(in->grad(0, 0) == Catch::Approx(7.0));
}
