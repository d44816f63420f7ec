#pragma once

// Minimal define-by-run reverse-mode autodiff over Eigen matrices. The tape
// owns every node; creation order is a valid topological order, so backward
// is a single reverse sweep. Sized for desk-scale experiments, not batchwork.

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hopbreak/common.hpp"

namespace hopbreak::ad {

using Mat = Eigen::MatrixXd;

class Tape;

struct Node {
    Mat value;
    Mat grad;
    std::function<void(Node&)> backward_fn;  // accumulates into parents' grads
    Tape* tape = nullptr;

    Eigen::Index rows() const { return value.rows(); }
    Eigen::Index cols() const { return value.cols(); }
    double scalar() const {
        if (value.size() != 1) throw std::logic_error("scalar() on non-scalar node");
        return value(0, 0);
    }
};

class Tape {
public:
    Node* make(Mat value) {
        auto node = std::make_unique<Node>();
        node->grad = Mat::Zero(value.rows(), value.cols());
        node->value = std::move(value);
        node->tape = this;
        nodes_.push_back(std::move(node));
        return nodes_.back().get();
    }

    void backward(Node* root) {
        if (root->value.size() != 1)
            throw std::logic_error("backward: root must be a scalar");
        root->grad(0, 0) = 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            Node& n = **it;
            if (n.backward_fn) n.backward_fn(n);
        }
    }

    size_t size() const { return nodes_.size(); }

private:
    std::vector<std::unique_ptr<Node>> nodes_;
};

// ---------------------------------------------------------------------------
// Ops

inline Node* constant(Tape& t, Mat value) { return t.make(std::move(value)); }

inline Node* constant_scalar(Tape& t, double v) {
    return t.make(Mat::Constant(1, 1, v));
}

namespace detail {
inline void check_same_shape(const Node* a, const Node* b, const char* op) {
    if (a->rows() != b->rows() || a->cols() != b->cols())
        throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                    std::to_string(a->rows()) + "x" + std::to_string(a->cols()) +
                                    " vs " + std::to_string(b->rows()) + "x" +
                                    std::to_string(b->cols()) + ")");
}
}  // namespace detail

inline Node* add(Node* a, Node* b) {
    detail::check_same_shape(a, b, "add");
    Node* out = a->tape->make(a->value + b->value);
    out->backward_fn = [a, b](Node& n) {
        a->grad += n.grad;
        b->grad += n.grad;
    };
    return out;
}

inline Node* sub(Node* a, Node* b) {
    detail::check_same_shape(a, b, "sub");
    Node* out = a->tape->make(a->value - b->value);
    out->backward_fn = [a, b](Node& n) {
        a->grad += n.grad;
        b->grad -= n.grad;
    };
    return out;
}

inline Node* mul(Node* a, Node* b) {  // elementwise
    detail::check_same_shape(a, b, "mul");
    Node* out = a->tape->make(a->value.cwiseProduct(b->value));
    out->backward_fn = [a, b](Node& n) {
        a->grad += n.grad.cwiseProduct(b->value);
        b->grad += n.grad.cwiseProduct(a->value);
    };
    return out;
}

inline Node* matmul(Node* a, Node* b) {
    if (a->cols() != b->rows()) throw std::invalid_argument("matmul: inner dim mismatch");
    Node* out = a->tape->make(a->value * b->value);
    out->backward_fn = [a, b](Node& n) {
        a->grad += n.grad * b->value.transpose();
        b->grad += a->value.transpose() * n.grad;
    };
    return out;
}

inline Node* transpose(Node* a) {
    Node* out = a->tape->make(a->value.transpose());
    out->backward_fn = [a](Node& n) { a->grad += n.grad.transpose(); };
    return out;
}

inline Node* scale(Node* a, double s) {
    Node* out = a->tape->make(a->value * s);
    out->backward_fn = [a, s](Node& n) { a->grad += n.grad * s; };
    return out;
}

// a: n x m, bias: 1 x m added to every row
inline Node* add_row_broadcast(Node* a, Node* bias) {
    if (bias->rows() != 1 || bias->cols() != a->cols())
        throw std::invalid_argument("add_row_broadcast: bias must be 1 x cols(a)");
    Node* out = a->tape->make(a->value.rowwise() + bias->value.row(0));
    out->backward_fn = [a, bias](Node& n) {
        a->grad += n.grad;
        bias->grad.row(0) += n.grad.colwise().sum();
    };
    return out;
}

// a: n x m, col: n x 1 added to every column
inline Node* add_col_broadcast(Node* a, Node* col) {
    if (col->cols() != 1 || col->rows() != a->rows())
        throw std::invalid_argument("add_col_broadcast: col must be rows(a) x 1");
    Node* out = a->tape->make(a->value.colwise() + col->value.col(0));
    out->backward_fn = [a, col](Node& n) {
        a->grad += n.grad;
        col->grad.col(0) += n.grad.rowwise().sum();
    };
    return out;
}

// a: n x m, row: 1 x m multiplied into every row
inline Node* mul_row_broadcast(Node* a, Node* row) {
    if (row->rows() != 1 || row->cols() != a->cols())
        throw std::invalid_argument("mul_row_broadcast: row must be 1 x cols(a)");
    Node* out = a->tape->make(a->value.array().rowwise() * row->value.row(0).array());
    out->backward_fn = [a, row](Node& n) {
        a->grad.array() += n.grad.array().rowwise() * row->value.row(0).array();
        row->grad.row(0).array() += (n.grad.array() * a->value.array()).colwise().sum();
    };
    return out;
}

inline Node* sigmoid(Node* a) {
    Mat v = (1.0 / (1.0 + (-a->value.array()).exp())).matrix();
    Node* out = a->tape->make(std::move(v));
    out->backward_fn = [a, out](Node& n) {
        a->grad.array() += n.grad.array() * out->value.array() * (1.0 - out->value.array());
    };
    return out;
}

inline Node* tanh_op(Node* a) {
    Node* out = a->tape->make(a->value.array().tanh().matrix());
    out->backward_fn = [a, out](Node& n) {
        a->grad.array() += n.grad.array() * (1.0 - out->value.array().square());
    };
    return out;
}

// Softmax down each column (normalizes over rows).
inline Node* softmax_cols(Node* a) {
    Mat v(a->rows(), a->cols());
    for (Eigen::Index j = 0; j < a->cols(); ++j) {
        Eigen::ArrayXd col = a->value.col(j).array();
        double m = col.maxCoeff();
        Eigen::ArrayXd e = (col - m).exp();
        v.col(j) = (e / e.sum()).matrix();
    }
    Node* out = a->tape->make(std::move(v));
    out->backward_fn = [a, out](Node& n) {
        for (Eigen::Index j = 0; j < n.grad.cols(); ++j) {
            Eigen::ArrayXd p = out->value.col(j).array();
            Eigen::ArrayXd g = n.grad.col(j).array();
            double dot = (p * g).sum();
            a->grad.col(j).array() += p * (g - dot);
        }
    };
    return out;
}

// Softmax over all entries, treated as one distribution (used on vectors).
inline Node* softmax_all(Node* a) {
    Eigen::ArrayXXd arr = a->value.array();
    double m = arr.maxCoeff();
    Eigen::ArrayXXd e = (arr - m).exp();
    Node* out = a->tape->make((e / e.sum()).matrix());
    out->backward_fn = [a, out](Node& n) {
        Eigen::ArrayXXd p = out->value.array();
        Eigen::ArrayXXd g = n.grad.array();
        double dot = (p * g).sum();
        a->grad.array() += p * (g - dot);
    };
    return out;
}

// Column-wise max over rows -> 1 x m; gradient flows to each argmax entry.
inline Node* max_over_rows(Node* a) {
    Mat v(1, a->cols());
    std::vector<Eigen::Index> argmax(static_cast<size_t>(a->cols()));
    for (Eigen::Index j = 0; j < a->cols(); ++j) {
        Eigen::Index r;
        v(0, j) = a->value.col(j).maxCoeff(&r);
        argmax[static_cast<size_t>(j)] = r;
    }
    Node* out = a->tape->make(std::move(v));
    out->backward_fn = [a, argmax](Node& n) {
        for (Eigen::Index j = 0; j < n.grad.cols(); ++j)
            a->grad(argmax[static_cast<size_t>(j)], j) += n.grad(0, j);
    };
    return out;
}

inline Node* mean_over_rows(Node* a) {
    Node* out = a->tape->make(a->value.colwise().mean());
    double inv = 1.0 / static_cast<double>(a->rows());
    out->backward_fn = [a, inv](Node& n) {
        a->grad += (n.grad.row(0) * inv).replicate(a->rows(), 1);
    };
    return out;
}

inline Node* sum_all(Node* a) {
    Node* out = a->tape->make(Mat::Constant(1, 1, a->value.sum()));
    out->backward_fn = [a](Node& n) { a->grad.array() += n.grad(0, 0); };
    return out;
}

inline Node* row(Node* a, Eigen::Index i) {
    Node* out = a->tape->make(a->value.row(i));
    out->backward_fn = [a, i](Node& n) { a->grad.row(i) += n.grad.row(0); };
    return out;
}

inline Node* slice_rows(Node* a, Eigen::Index begin, Eigen::Index count) {
    Node* out = a->tape->make(a->value.middleRows(begin, count));
    out->backward_fn = [a, begin, count](Node& n) {
        a->grad.middleRows(begin, count) += n.grad;
    };
    return out;
}

inline Node* slice_cols(Node* a, Eigen::Index begin, Eigen::Index count) {
    Node* out = a->tape->make(a->value.middleCols(begin, count));
    out->backward_fn = [a, begin, count](Node& n) {
        a->grad.middleCols(begin, count) += n.grad;
    };
    return out;
}

inline Node* concat_cols(const std::vector<Node*>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
    Eigen::Index rows = parts[0]->rows();
    Eigen::Index cols = 0;
    for (Node* p : parts) {
        if (p->rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
        cols += p->cols();
    }
    Mat v(rows, cols);
    Eigen::Index at = 0;
    for (Node* p : parts) {
        v.middleCols(at, p->cols()) = p->value;
        at += p->cols();
    }
    Node* out = parts[0]->tape->make(std::move(v));
    std::vector<Node*> srcs = parts;
    out->backward_fn = [srcs](Node& n) {
        Eigen::Index at = 0;
        for (Node* p : srcs) {
            p->grad += n.grad.middleCols(at, p->cols());
            at += p->cols();
        }
    };
    return out;
}

inline Node* stack_rows(const std::vector<Node*>& rows_in) {
    if (rows_in.empty()) throw std::invalid_argument("stack_rows: empty");
    Eigen::Index cols = rows_in[0]->cols();
    Mat v(static_cast<Eigen::Index>(rows_in.size()), cols);
    for (size_t i = 0; i < rows_in.size(); ++i) {
        if (rows_in[i]->rows() != 1 || rows_in[i]->cols() != cols)
            throw std::invalid_argument("stack_rows: parts must be 1 x m");
        v.row(static_cast<Eigen::Index>(i)) = rows_in[i]->value.row(0);
    }
    Node* out = rows_in[0]->tape->make(std::move(v));
    std::vector<Node*> srcs = rows_in;
    out->backward_fn = [srcs](Node& n) {
        for (size_t i = 0; i < srcs.size(); ++i)
            srcs[i]->grad.row(0) += n.grad.row(static_cast<Eigen::Index>(i));
    };
    return out;
}

// -log softmax(logits)[target]; logits treated as a flat vector.
inline Node* cross_entropy_logits(Node* logits, Eigen::Index target) {
    Eigen::Index n_el = logits->value.size();
    if (target < 0 || target >= n_el)
        throw std::out_of_range("cross_entropy_logits: target out of range");
    Eigen::Map<const Eigen::ArrayXd> flat(logits->value.data(), n_el);
    double m = flat.maxCoeff();
    double logsum = std::log((flat - m).exp().sum()) + m;
    Node* out = logits->tape->make(Mat::Constant(1, 1, logsum - flat(target)));
    out->backward_fn = [logits, target, logsum](Node& n) {
        double g = n.grad(0, 0);
        Eigen::Map<const Eigen::ArrayXd> flat(logits->value.data(), logits->value.size());
        Eigen::Map<Eigen::ArrayXd> grad(logits->grad.data(), logits->grad.size());
        grad += g * (flat - logsum).exp();
        grad(target) -= g;
    };
    return out;
}

// Sum of per-element binary cross-entropies with logits; targets in {0,1}.
inline Node* bce_with_logits(Node* logits, const Eigen::ArrayXd& targets) {
    if (logits->value.size() != targets.size())
        throw std::invalid_argument("bce_with_logits: size mismatch");
    Eigen::Map<const Eigen::ArrayXd> x(logits->value.data(), logits->value.size());
    // log(1 + e^x) evaluated stably
    Eigen::ArrayXd softplus = x.max(0.0) + (1.0 + (-x.abs()).exp()).log();
    double total = (softplus - targets * x).sum();
    Node* out = logits->tape->make(Mat::Constant(1, 1, total));
    Eigen::ArrayXd t = targets;
    out->backward_fn = [logits, t](Node& n) {
        double g = n.grad(0, 0);
        Eigen::Map<const Eigen::ArrayXd> x(logits->value.data(), logits->value.size());
        Eigen::Map<Eigen::ArrayXd> grad(logits->grad.data(), logits->grad.size());
        grad += g * (1.0 / (1.0 + (-x).exp()) - t);
    };
    return out;
}

}  // namespace hopbreak::ad
