#pragma once

#include "unfold/loss.hpp"
#include "unfold/model.hpp"

namespace unfold {

// Gradient (or moment) storage for one layer. A default-constructed value
// with zero-sized tensors stands for an identically-zero gradient; frozen
// layers are stored that way.
struct LayerGrads {
    Matrix W1, W2, W3;
    Vec b1, b2, b3;
    double t = 0.0;

    bool empty() const { return W1.rows == 0; }
};

struct Gradients {
    std::vector<LayerGrads> layers; // one slot per model layer

    void add_scaled(const Gradients &other, double scale);
    void scale(double s);
    void set_zero();
};

// Zero gradients shaped like params; slots below frozen_prefix stay empty.
Gradients make_gradients(const ModelParams &params);

// Adds the data-term gradient of one sample (depth-weighted estimation
// error over trace) into grads. Masked and frozen entries receive exactly
// 0. x_tilde only enters through the per-sample denominator.
void backward_data(const ForwardTrace &trace, const ModelParams &params,
                   const Vec &x, const Vec &x_tilde, Gradients &grads);

// Adds scale * d(regularizer)/d(params). L1 subgradient is sign(w) with
// sign(0) = 0; a zero-norm column group contributes 0.
void backward_regularizer(const ModelParams &params, const LossSpec &spec,
                          Gradients &grads, double scale = 1.0);

// Full single-sample gradient: data term plus regularizer.
Gradients backward(const ForwardTrace &trace, const ModelParams &params,
                   const Vec &x, const Vec &x_tilde, const LossSpec &spec);

} // namespace unfold
