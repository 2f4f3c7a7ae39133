#include "unfold/loss.hpp"

#include <cmath>

#include "unfold/linalg.hpp"

namespace unfold {

double loss_plain(const ForwardTrace &trace, const Vec &x, const Vec &x_tilde,
                  int first_term, bool *flagged) {
    const int depth = static_cast<int>(trace.x_hat.size()) - 1;
    require(x.size() == trace.x_hat[0].size(), "loss_plain: x length mismatch");
    require(x.size() == x_tilde.size(), "loss_plain: x_tilde length mismatch");

    Vec diff(x.size());
    for (size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - x_tilde[i];
    double denom = norm2_sq(diff);
    if (flagged) *flagged = denom < 1e-12;
    if (denom < 1e-12) denom = 1e-12;

    double loss = 0.0;
    for (int k = std::max(first_term, 1); k <= depth; ++k) {
        double err = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - trace.x_hat[k][i];
            err += d * d;
        }
        loss += std::log(static_cast<double>(k)) * err / denom;
    }
    return loss;
}

namespace {

double masked_l1(const Matrix &W, const Matrix &M) {
    double acc = 0.0;
    for (size_t i = 0; i < W.data.size(); ++i)
        acc += std::abs(W.data[i]) * M.data[i];
    return acc;
}

// Column norms of [W b]: column j of W is one group, b is the final group.
double group_norm_sum(const Matrix &W, const Matrix &M, const Vec &b, const Vec &mb) {
    double acc = 0.0;
    for (int j = 0; j < W.cols; ++j) {
        double sq = 0.0;
        for (int i = 0; i < W.rows; ++i) {
            const double w = W(i, j) * M(i, j);
            sq += w * w;
        }
        acc += std::sqrt(sq);
    }
    double sq = 0.0;
    for (size_t i = 0; i < b.size(); ++i) {
        const double w = b[i] * mb[i];
        sq += w * w;
    }
    return acc + std::sqrt(sq);
}

} // namespace

double loss_element_l1(const ModelParams &params, double lambda) {
    double acc = 0.0;
    for (const LayerParams &p : params.layers)
        acc += masked_l1(p.W1, p.M1) + masked_l1(p.W2, p.M2) + masked_l1(p.W3, p.M3);
    return lambda * acc;
}

double loss_sparse_group(const ModelParams &params, double lambda1, double lambda2) {
    double groups = 0.0, elems = 0.0;
    for (const LayerParams &p : params.layers) {
        groups += group_norm_sum(p.W1, p.M1, p.b1, p.mb1) +
                  group_norm_sum(p.W2, p.M2, p.b2, p.mb2) +
                  group_norm_sum(p.W3, p.M3, p.b3, p.mb3);
        elems += masked_l1(p.W1, p.M1) + masked_l1(p.W2, p.M2) + masked_l1(p.W3, p.M3);
    }
    return lambda1 * groups + lambda2 * elems;
}

double regularizer(const ModelParams &params, const LossSpec &spec) {
    switch (spec.kind) {
    case LossKind::plain:
        return 0.0;
    case LossKind::element_l1:
        return loss_element_l1(params, spec.lambda);
    case LossKind::sparse_group:
        return loss_sparse_group(params, spec.lambda1, spec.lambda2);
    }
    return 0.0;
}

} // namespace unfold
