#include "unfold/model.hpp"

#include <cmath>

#include "unfold/channel.hpp"
#include "unfold/linalg.hpp"

namespace unfold {

Dims param_dims(int n_tx) { return param_dims(n_tx, 8 * n_tx, 2 * n_tx); }

Dims param_dims(int n_tx, int z_dim, int v_dim) {
    require(n_tx >= 1 && z_dim >= 1 && v_dim >= 1, "param_dims: dimensions must be positive");
    return Dims{z_dim, v_dim, 3 * n_tx + v_dim};
}

void LayerParams::refresh_mask_flag() {
    auto full = [](const auto &m) {
        for (double v : m) {
            if (v != 1.0) return false;
        }
        return true;
    };
    all_ones = full(M1.data) && full(M2.data) && full(M3.data) &&
               full(mb1) && full(mb2) && full(mb3);
}

Vec relu(const Vec &u) {
    Vec out(u.size());
    for (size_t i = 0; i < u.size(); ++i) out[i] = u[i] > 0.0 ? u[i] : 0.0;
    return out;
}

Vec soft_sign(const Vec &u, double t) {
    require(t > 0.0, "soft_sign: t must be > 0");
    Vec out(u.size());
    for (size_t i = 0; i < u.size(); ++i) {
        if (u[i] <= -t) out[i] = -1.0;
        else if (u[i] >= t) out[i] = 1.0;
        else out[i] = u[i] / t;
    }
    return out;
}

double soft_sign_du(double u, double t) {
    return (u >= -t && u < t) ? 1.0 / t : 0.0;
}

double soft_sign_dt(double u, double t) {
    return (u >= -t && u < t) ? -u / (t * t) : 0.0;
}

namespace {

// y = (W (.) M) x + b (.) mb. The masked and unmasked paths do the same
// multiplications in the same order, so a mask of 1s is bit-identical to
// the plain product.
Vec masked_affine(const Matrix &W, const Matrix &M, const Vec &b, const Vec &mb,
                  const Vec &x, bool all_ones) {
    require(W.cols == static_cast<int>(x.size()), "masked_affine: shape mismatch");
    Vec out(W.rows);
    if (all_ones) {
        for (int i = 0; i < W.rows; ++i) {
            const double *row = W.data.data() + static_cast<size_t>(i) * W.cols;
            double acc = b[i];
            for (int j = 0; j < W.cols; ++j) acc += row[j] * x[j];
            out[i] = acc;
        }
    } else {
        for (int i = 0; i < W.rows; ++i) {
            const size_t off = static_cast<size_t>(i) * W.cols;
            const double *row = W.data.data() + off;
            const double *mrow = M.data.data() + off;
            double acc = b[i] * mb[i];
            for (int j = 0; j < W.cols; ++j) acc += row[j] * mrow[j] * x[j];
            out[i] = acc;
        }
    }
    return out;
}

} // namespace

ForwardTrace forward_pre(const ModelParams &params, Vec q, Matrix G) {
    const int k = params.n_tx;
    const int L = params.depth();
    const Dims &d = params.dims;
    require(static_cast<int>(q.size()) == k && G.rows == k && G.cols == k,
            "forward: preprocessing shape mismatch");

    ForwardTrace tr;
    tr.q = std::move(q);
    tr.G = std::move(G);
    tr.x_hat.resize(L + 1);
    tr.v.resize(L + 1);
    tr.in.resize(L);
    tr.u1.resize(L);
    tr.z.resize(L);
    tr.u2.resize(L);
    tr.x_hat[0] = Vec(k, 0.0);
    tr.v[0] = Vec(d.v_dim, 0.0);

    for (int l = 0; l < L; ++l) {
        const LayerParams &p = params.layers[l];
        require(p.W1.rows == d.z_dim && p.W1.cols == d.in_dim, "forward: W1 shape mismatch");

        Vec gx = matvec(tr.G, tr.x_hat[l]);
        Vec in(d.in_dim);
        for (int i = 0; i < k; ++i) in[i] = tr.q[i];
        for (int i = 0; i < k; ++i) in[k + i] = tr.x_hat[l][i];
        for (int i = 0; i < k; ++i) in[2 * k + i] = gx[i];
        for (int i = 0; i < d.v_dim; ++i) in[3 * k + i] = tr.v[l][i];

        tr.u1[l] = masked_affine(p.W1, p.M1, p.b1, p.mb1, in, p.all_ones);
        tr.z[l] = relu(tr.u1[l]);
        tr.u2[l] = masked_affine(p.W2, p.M2, p.b2, p.mb2, tr.z[l], p.all_ones);
        tr.x_hat[l + 1] = soft_sign(tr.u2[l], p.t);
        tr.v[l + 1] = masked_affine(p.W3, p.M3, p.b3, p.mb3, tr.z[l], p.all_ones);
        tr.in[l] = std::move(in);
    }
    return tr;
}

ForwardTrace forward(const ModelParams &params, const Matrix &H, const Vec &y) {
    require(H.rows == params.n_rx && H.cols == params.n_tx, "forward: H shape mismatch");
    require(static_cast<int>(y.size()) == params.n_rx, "forward: y length mismatch");
    return forward_pre(params, matvec_transpose(H, y), gram(H));
}

Vec detect(const ModelParams &params, const Matrix &H, const Vec &y) {
    return sign_slice(forward(params, H, y).final_estimate());
}

ModelParams init_params(Rng &rng, int n_tx, int n_rx, int depth) {
    return init_params(rng, n_tx, n_rx, depth, param_dims(n_tx));
}

namespace {

LayerParams init_layer(Rng &rng, int n_tx, const Dims &d, const InitOptions &opts) {
    LayerParams p;
    auto gaussian_matrix = [&](int r, int c) {
        Matrix m(r, c);
        const double std = opts.weight_scale / std::sqrt(static_cast<double>(c));
        for (double &w : m.data) w = std * rng.next_gaussian();
        return m;
    };
    auto ones = [](int r, int c) {
        Matrix m(r, c);
        for (double &v : m.data) v = 1.0;
        return m;
    };
    p.W1 = gaussian_matrix(d.z_dim, d.in_dim);
    p.W2 = gaussian_matrix(n_tx, d.z_dim);
    p.W3 = gaussian_matrix(d.v_dim, d.z_dim);
    p.b1 = Vec(d.z_dim, 0.0);
    p.b2 = Vec(n_tx, 0.0);
    p.b3 = Vec(d.v_dim, 0.0);
    p.t = opts.t0;
    p.M1 = ones(d.z_dim, d.in_dim);
    p.M2 = ones(n_tx, d.z_dim);
    p.M3 = ones(d.v_dim, d.z_dim);
    p.mb1 = Vec(d.z_dim, 1.0);
    p.mb2 = Vec(n_tx, 1.0);
    p.mb3 = Vec(d.v_dim, 1.0);
    p.all_ones = true;
    return p;
}

} // namespace

ModelParams init_params(Rng &rng, int n_tx, int n_rx, int depth, Dims dims,
                        InitOptions opts) {
    require(n_rx >= n_tx && n_tx >= 1 && depth >= 1, "init_params: invalid dimensions");
    require(opts.weight_scale > 0.0 && opts.t0 >= 1e-3, "init_params: invalid init options");
    ModelParams m;
    m.n_tx = n_tx;
    m.n_rx = n_rx;
    m.dims = dims;
    m.layers.reserve(depth);
    for (int l = 0; l < depth; ++l) m.layers.push_back(init_layer(rng, n_tx, dims, opts));
    return m;
}

void append_layers(ModelParams &params, int count, Rng &rng, InitOptions opts) {
    for (int i = 0; i < count; ++i)
        params.layers.push_back(init_layer(rng, params.n_tx, params.dims, opts));
}

} // namespace unfold
