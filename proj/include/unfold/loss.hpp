#pragma once

#include "unfold/model.hpp"

namespace unfold {

enum class LossKind { plain, element_l1, sparse_group };

struct LossSpec {
    LossKind kind = LossKind::plain;
    double lambda = 0.0;  // element_l1 weight
    double lambda1 = 0.0; // sparse_group: column-group weight
    double lambda2 = 0.0; // sparse_group: elementwise weight
};

// Which layers contribute terms to the data loss while a frozen prefix
// exists: all of them, or only the trainable suffix. Either way frozen
// layers never receive gradient.
enum class LossLayers { all, trainable_only };

// Depth-weighted estimation error sum_k log(k) ||x - x_hat_k||^2 / D with
// D = max(||x - x_tilde||^2, 1e-12); x_tilde is the least-squares decode.
// first_term selects the lowest layer index included (1 = all layers).
// Sets *flagged when the denominator guard kicked in.
double loss_plain(const ForwardTrace &trace, const Vec &x, const Vec &x_tilde,
                  int first_term = 1, bool *flagged = nullptr);

// lambda * sum of |w| over masked-in weight entries (biases and t excluded).
double loss_element_l1(const ModelParams &params, double lambda);

// lambda1 * sum of column L2 norms of the augmented matrices [W b] (each
// column of W is a group; the bias vector forms one extra group) plus
// lambda2 * the elementwise L1 term over W only. Norms run over masked-in
// entries.
double loss_sparse_group(const ModelParams &params, double lambda1, double lambda2);

// Regularization value of the given spec (0 for the plain loss).
double regularizer(const ModelParams &params, const LossSpec &spec);

} // namespace unfold
