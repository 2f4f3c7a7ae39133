#pragma once

#include <cstdint>
#include <vector>

#include "unfold/matrix.hpp"
#include "unfold/rng.hpp"

namespace unfold {

// Hidden and state widths derived from the transmitter count. in_dim is the
// length of the concatenated layer input [H^T y; x_hat; H^T H x_hat; v].
struct Dims {
    int z_dim = 0;
    int v_dim = 0;
    int in_dim = 0; // 3K + v_dim
};

// Default widths: z = 8K, v = 2K, hence in = 5K. Overridable per config.
Dims param_dims(int n_tx);
Dims param_dims(int n_tx, int z_dim, int v_dim);

// Per-layer parameter set with binary pruning masks. The effective weight
// everywhere is W (.) M; a masked entry never contributes to the forward
// pass and never receives gradient. Biases carry their own masks because
// group pruning can remove a whole bias column.
struct LayerParams {
    Matrix W1, W2, W3;
    Vec b1, b2, b3;
    double t = 0.5;          // soft-sign knee, kept >= 1e-3
    Matrix M1, M2, M3;       // 0/1 masks matching W1..W3
    Vec mb1, mb2, mb3;       // 0/1 masks matching b1..b3
    bool all_ones = true;    // cached: every mask entry is 1

    void refresh_mask_flag();
};

struct ModelParams {
    int n_tx = 0; // K
    int n_rx = 0; // N
    Dims dims;
    std::vector<LayerParams> layers;
    int frozen_prefix = 0;   // first frozen_prefix layers get no updates
    int64_t train_steps = 0; // optimizer steps taken so far

    int depth() const { return static_cast<int>(layers.size()); }
};

// Intermediate values of one forward pass, kept for the backward sweep.
// x_hat[0] is the fixed all-zero initial estimate; x_hat[k] is the estimate
// produced after layer k (k = 1..L). v[k] follows the same indexing.
struct ForwardTrace {
    Vec q;                    // H^T y
    Matrix G;                 // H^T H
    std::vector<Vec> x_hat;   // L+1 entries
    std::vector<Vec> v;       // L+1 entries
    std::vector<Vec> in;      // per-layer concatenated input
    std::vector<Vec> u1;      // per-layer pre-ReLU
    std::vector<Vec> z;       // per-layer post-ReLU
    std::vector<Vec> u2;      // per-layer pre-soft-sign

    const Vec &final_estimate() const { return x_hat.back(); }
};

Vec relu(const Vec &u);

// Piecewise-linear soft sign: -1 for u <= -t, +1 for u >= t, slope 1/t
// between; equivalently -1 + (relu(u+t) - relu(u-t))/t. t must be > 0.
Vec soft_sign(const Vec &u, double t);

// Subgradients of soft_sign. The linear region is taken as [-t, t), so the
// slope at u = -t is 1/t and the slope at u = +t is 0; d/dt follows the
// same convention (-u/t^2 inside, 0 outside).
double soft_sign_du(double u, double t);
double soft_sign_dt(double u, double t);

// Run the full recursion. q and G are computed once and reused by every
// layer. Shapes must match params.
ForwardTrace forward(const ModelParams &params, const Matrix &H, const Vec &y);

// Precomputed-preprocessing variant used by the batch kernels.
ForwardTrace forward_pre(const ModelParams &params, Vec q, Matrix G);

// sign(x_hat_L) with sign(0) = +1.
Vec detect(const ModelParams &params, const Matrix &H, const Vec &y);

// Weight draw is weight_scale / sqrt(fan_in) times a standard normal; the
// defaults give W ~ N(0, 1/fan_in) and a knee of 0.5. Small desk-scale
// models train noticeably better with a damped scale and a wider knee.
struct InitOptions {
    double weight_scale = 1.0;
    double t0 = 0.5;
};

struct ModelSpec {
    int n_tx = 0;
    int n_rx = 0;
    Dims dims;
    InitOptions init;
};

// Fresh parameters: scaled Gaussian weights, zero biases, all-ones masks,
// frozen_prefix = 0.
ModelParams init_params(Rng &rng, int n_tx, int n_rx, int depth);
ModelParams init_params(Rng &rng, int n_tx, int n_rx, int depth, Dims dims,
                        InitOptions opts = {});

// Append freshly initialized layers (incremental growth).
void append_layers(ModelParams &params, int count, Rng &rng, InitOptions opts = {});

} // namespace unfold
