#pragma once

#include <string>
#include <vector>

#include "unfold/model.hpp"

namespace unfold {

enum class PruneKind { element, group, sparse_group };

struct PruneSpec {
    PruneKind kind = PruneKind::element;
    double eta = 0.0;  // element threshold fraction
    double eta1 = 0.0; // group threshold fraction
    double eta2 = 0.0; // element threshold fraction after group pruning

    void validate() const;
};

// Magnitude pruning. Per layer the threshold is eta * max|w| taken jointly
// over that layer's unmasked W1, W2, W3 entries; strictly smaller entries
// get mask 0. Biases and t are untouched. Masks only ever clear.
void prune_element(ModelParams &params, double eta);

// Column-group pruning on the augmented matrices [W b]: every column of W
// is a group and the bias vector is one extra group. A group whose L2 norm
// is strictly below eta1 * (max group norm in the same matrix) is masked
// entirely, bias included. Norms use the stored weight values; existing
// masks do not shrink a norm, which keeps repeated pruning stable.
void prune_group(ModelParams &params, double eta1);

// prune_group(eta1) followed by prune_element(eta2) on the survivors.
void prune_sparse_group(ModelParams &params, double eta1, double eta2);

void prune(ModelParams &params, const PruneSpec &spec);

enum class Storage { dense, masked_sparse };

// 4 bytes per stored parameter (weights, biases, t). masked_sparse counts
// only surviving entries; index overhead is excluded by convention.
long long memory_bytes(const ModelParams &params, Storage storage);

// Analytic FLOP census, one FLOP per floating-point add or multiply:
//   - a masked matvec costs 2 * nnz(W (.) M); the bias add is folded into
//     the accumulation, so biases add nothing;
//   - every layer pays 2K^2 for the G x_hat product;
//   - preprocessing (H^T y and H^T H, once per detection) adds
//     2NK + 2NK^2 when include_preprocess is set;
//   - activations and the final sign are excluded.
long long flops_per_detection(const ModelParams &params, bool include_preprocess = true);

struct LayerCost {
    long long params_total = 0;
    long long params_nonzero = 0;
    long long flops = 0; // masked, without preprocessing
};

struct CostReport {
    int layer_count = 0;
    long long params_total = 0;
    long long params_nonzero = 0;
    long long memory_dense_bytes = 0;
    long long memory_sparse_bytes = 0;
    long long flops = 0;       // masked, with preprocessing
    long long flops_dense = 0; // all-ones-mask equivalent, with preprocessing
    long long preprocess_flops = 0;
    std::vector<LayerCost> per_layer;
};

CostReport cost_report(const ModelParams &params);

std::string cost_report_json(const CostReport &report, const std::string &label);
std::string cost_report_csv_header();
std::string cost_report_csv_row(const CostReport &report, const std::string &label);

} // namespace unfold
