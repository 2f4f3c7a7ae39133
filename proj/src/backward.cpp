#include "unfold/backward.hpp"

#include <algorithm>
#include <cmath>

#include "unfold/linalg.hpp"

namespace unfold {

namespace {

void axpy(Vec &dst, const Vec &src, double scale) {
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

void axpy(Matrix &dst, const Matrix &src, double scale) {
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += scale * src.data[i];
}

// grad += u_bar (outer) in, gated by the mask.
void accumulate_outer(Matrix &grad, const Vec &u_bar, const Vec &in, const Matrix &mask) {
    for (int i = 0; i < grad.rows; ++i) {
        const double g = u_bar[i];
        if (g == 0.0) continue;
        double *grow = grad.data.data() + static_cast<size_t>(i) * grad.cols;
        const double *mrow = mask.data.data() + static_cast<size_t>(i) * mask.cols;
        for (int j = 0; j < grad.cols; ++j) grow[j] += g * in[j] * mrow[j];
    }
}

// out = (W (.) M)^T u
Vec masked_transpose_apply(const Matrix &W, const Matrix &M, const Vec &u) {
    Vec out(W.cols, 0.0);
    for (int i = 0; i < W.rows; ++i) {
        const double ui = u[i];
        if (ui == 0.0) continue;
        const size_t off = static_cast<size_t>(i) * W.cols;
        const double *wrow = W.data.data() + off;
        const double *mrow = M.data.data() + off;
        for (int j = 0; j < W.cols; ++j) out[j] += wrow[j] * mrow[j] * ui;
    }
    return out;
}

} // namespace

void Gradients::add_scaled(const Gradients &other, double scale) {
    for (size_t l = 0; l < layers.size(); ++l) {
        if (other.layers[l].empty()) continue;
        LayerGrads &dst = layers[l];
        const LayerGrads &src = other.layers[l];
        axpy(dst.W1, src.W1, scale);
        axpy(dst.W2, src.W2, scale);
        axpy(dst.W3, src.W3, scale);
        axpy(dst.b1, src.b1, scale);
        axpy(dst.b2, src.b2, scale);
        axpy(dst.b3, src.b3, scale);
        dst.t += scale * src.t;
    }
}

void Gradients::scale(double s) {
    for (LayerGrads &l : layers) {
        if (l.empty()) continue;
        for (double &v : l.W1.data) v *= s;
        for (double &v : l.W2.data) v *= s;
        for (double &v : l.W3.data) v *= s;
        for (double &v : l.b1) v *= s;
        for (double &v : l.b2) v *= s;
        for (double &v : l.b3) v *= s;
        l.t *= s;
    }
}

void Gradients::set_zero() {
    for (LayerGrads &l : layers) {
        if (l.empty()) continue;
        std::fill(l.W1.data.begin(), l.W1.data.end(), 0.0);
        std::fill(l.W2.data.begin(), l.W2.data.end(), 0.0);
        std::fill(l.W3.data.begin(), l.W3.data.end(), 0.0);
        std::fill(l.b1.begin(), l.b1.end(), 0.0);
        std::fill(l.b2.begin(), l.b2.end(), 0.0);
        std::fill(l.b3.begin(), l.b3.end(), 0.0);
        l.t = 0.0;
    }
}

Gradients make_gradients(const ModelParams &params) {
    Gradients g;
    g.layers.resize(params.layers.size());
    for (int l = params.frozen_prefix; l < params.depth(); ++l) {
        const LayerParams &p = params.layers[l];
        LayerGrads &gl = g.layers[l];
        gl.W1 = Matrix(p.W1.rows, p.W1.cols);
        gl.W2 = Matrix(p.W2.rows, p.W2.cols);
        gl.W3 = Matrix(p.W3.rows, p.W3.cols);
        gl.b1 = Vec(p.b1.size(), 0.0);
        gl.b2 = Vec(p.b2.size(), 0.0);
        gl.b3 = Vec(p.b3.size(), 0.0);
        gl.t = 0.0;
    }
    return g;
}

void backward_data(const ForwardTrace &trace, const ModelParams &params,
                   const Vec &x, const Vec &x_tilde, Gradients &grads) {
    const int L = params.depth();
    const int k_dim = params.n_tx;
    require(static_cast<int>(trace.x_hat.size()) == L + 1, "backward: trace/params depth mismatch");
    require(static_cast<int>(x.size()) == k_dim, "backward: x length mismatch");
    require(grads.layers.size() == params.layers.size(), "backward: gradient shape mismatch");

    Vec diff(x.size());
    for (size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - x_tilde[i];
    double denom = norm2_sq(diff);
    if (denom < 1e-12) denom = 1e-12;

    Vec a_bar(k_dim, 0.0);
    Vec v_bar(params.dims.v_dim, 0.0);

    // Adjoints flow from the last layer down to the first trainable one;
    // everything below the frozen prefix is constant.
    for (int l = L - 1; l >= params.frozen_prefix; --l) {
        const LayerParams &p = params.layers[l];
        LayerGrads &g = grads.layers[l];
        const int k_idx = l + 1; // 1-based depth of this layer's output

        const double w = 2.0 * std::log(static_cast<double>(k_idx)) / denom;
        for (int i = 0; i < k_dim; ++i) a_bar[i] += w * (trace.x_hat[k_idx][i] - x[i]);

        Vec u2_bar(k_dim);
        double t_bar = 0.0;
        for (int i = 0; i < k_dim; ++i) {
            u2_bar[i] = a_bar[i] * soft_sign_du(trace.u2[l][i], p.t);
            t_bar += a_bar[i] * soft_sign_dt(trace.u2[l][i], p.t);
        }
        g.t += t_bar;

        accumulate_outer(g.W2, u2_bar, trace.z[l], p.M2);
        for (int i = 0; i < k_dim; ++i) g.b2[i] += u2_bar[i] * p.mb2[i];

        Vec z_bar = masked_transpose_apply(p.W2, p.M2, u2_bar);
        Vec z_bar3 = masked_transpose_apply(p.W3, p.M3, v_bar);
        for (size_t i = 0; i < z_bar.size(); ++i) z_bar[i] += z_bar3[i];

        accumulate_outer(g.W3, v_bar, trace.z[l], p.M3);
        for (size_t i = 0; i < v_bar.size(); ++i) g.b3[i] += v_bar[i] * p.mb3[i];

        Vec u1_bar(params.dims.z_dim);
        for (int i = 0; i < params.dims.z_dim; ++i)
            u1_bar[i] = trace.u1[l][i] > 0.0 ? z_bar[i] : 0.0;

        accumulate_outer(g.W1, u1_bar, trace.in[l], p.M1);
        for (int i = 0; i < params.dims.z_dim; ++i) g.b1[i] += u1_bar[i] * p.mb1[i];

        Vec in_bar = masked_transpose_apply(p.W1, p.M1, u1_bar);

        // Split [q; x_hat; G x_hat; v]; the q block is data, not state.
        Vec gx_bar(in_bar.begin() + 2 * k_dim, in_bar.begin() + 3 * k_dim);
        Vec a_prev = matvec(trace.G, gx_bar); // G is symmetric
        for (int i = 0; i < k_dim; ++i) a_prev[i] += in_bar[k_dim + i];
        a_bar = std::move(a_prev);
        v_bar.assign(in_bar.begin() + 3 * k_dim, in_bar.end());
    }
}

namespace {

double sign0(double w) { return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0); }

void add_l1_grad(Matrix &grad, const Matrix &W, const Matrix &M, double scale) {
    for (size_t i = 0; i < W.data.size(); ++i)
        grad.data[i] += scale * sign0(W.data[i]) * M.data[i];
}

void add_group_grad(Matrix &grad, const Matrix &W, const Matrix &M,
                    Vec &bgrad, const Vec &b, const Vec &mb, double scale) {
    for (int j = 0; j < W.cols; ++j) {
        double sq = 0.0;
        for (int i = 0; i < W.rows; ++i) {
            const double w = W(i, j) * M(i, j);
            sq += w * w;
        }
        if (sq == 0.0) continue;
        const double inv = scale / std::sqrt(sq);
        for (int i = 0; i < W.rows; ++i) grad(i, j) += inv * W(i, j) * M(i, j);
    }
    double sq = 0.0;
    for (size_t i = 0; i < b.size(); ++i) {
        const double w = b[i] * mb[i];
        sq += w * w;
    }
    if (sq > 0.0) {
        const double inv = scale / std::sqrt(sq);
        for (size_t i = 0; i < b.size(); ++i) bgrad[i] += inv * b[i] * mb[i];
    }
}

} // namespace

void backward_regularizer(const ModelParams &params, const LossSpec &spec,
                          Gradients &grads, double scale) {
    if (spec.kind == LossKind::plain) return;
    for (int l = params.frozen_prefix; l < params.depth(); ++l) {
        const LayerParams &p = params.layers[l];
        LayerGrads &g = grads.layers[l];
        if (spec.kind == LossKind::element_l1) {
            add_l1_grad(g.W1, p.W1, p.M1, scale * spec.lambda);
            add_l1_grad(g.W2, p.W2, p.M2, scale * spec.lambda);
            add_l1_grad(g.W3, p.W3, p.M3, scale * spec.lambda);
        } else {
            add_group_grad(g.W1, p.W1, p.M1, g.b1, p.b1, p.mb1, scale * spec.lambda1);
            add_group_grad(g.W2, p.W2, p.M2, g.b2, p.b2, p.mb2, scale * spec.lambda1);
            add_group_grad(g.W3, p.W3, p.M3, g.b3, p.b3, p.mb3, scale * spec.lambda1);
            add_l1_grad(g.W1, p.W1, p.M1, scale * spec.lambda2);
            add_l1_grad(g.W2, p.W2, p.M2, scale * spec.lambda2);
            add_l1_grad(g.W3, p.W3, p.M3, scale * spec.lambda2);
        }
    }
}

Gradients backward(const ForwardTrace &trace, const ModelParams &params,
                   const Vec &x, const Vec &x_tilde, const LossSpec &spec) {
    Gradients g = make_gradients(params);
    backward_data(trace, params, x, x_tilde, g);
    backward_regularizer(params, spec, g);
    return g;
}

} // namespace unfold
