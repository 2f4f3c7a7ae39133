#pragma once

#include <span>
#include <vector>

#include "unfold/adam.hpp"
#include "unfold/backward.hpp"
#include "unfold/channel.hpp"
#include "unfold/loss.hpp"

namespace unfold {

// Effective worker count: OpenMP's maximum, capped by UNFOLD_THREADS.
int worker_count();

struct BatchEval {
    double data_loss = 0.0; // mean per-sample depth-weighted loss
    long long symbol_errors = 0;
    long long symbols = 0;
    long long flagged = 0; // samples whose denominator guard fired

    double ber() const {
        return symbols ? static_cast<double>(symbol_errors) / symbols : 0.0;
    }
};

enum class BaselineKind { zf, ml, oracle };

// Batch kernels run sample-parallel with OpenMP. Per-sample work uses an
// independent RNG stream keyed by sample index and floating-point results
// are reduced in fixed sample order, so outputs are bit-identical to the
// serial reference below for every thread count.

std::vector<ChannelSample> generate_batch(Rng &rng, int n_rx, int n_tx, int count,
                                          SnrRange snr);

// Mean data loss and symbol error count of the detector over the batch.
BatchEval batch_evaluate(const ModelParams &params, std::span<const ChannelSample> batch,
                         LossLayers loss_layers = LossLayers::all);

// Mean data-term gradient plus one regularizer contribution; returns the
// batch statistics. grads must come from make_gradients(params).
BatchEval batch_gradient(const ModelParams &params, std::span<const ChannelSample> batch,
                         const LossSpec &spec, Gradients &grads,
                         LossLayers loss_layers = LossLayers::all);

// Symbol errors of a classical baseline over the batch.
std::pair<long long, long long> batch_baseline_errors(std::span<const ChannelSample> batch,
                                                      BaselineKind kind);

// Straight-line serial implementations kept as the reference the parallel
// kernels are tested against.
namespace ref {

std::vector<ChannelSample> generate_batch(Rng &rng, int n_rx, int n_tx, int count,
                                          SnrRange snr);
BatchEval batch_evaluate(const ModelParams &params, std::span<const ChannelSample> batch,
                         LossLayers loss_layers = LossLayers::all);
BatchEval batch_gradient(const ModelParams &params, std::span<const ChannelSample> batch,
                         const LossSpec &spec, Gradients &grads,
                         LossLayers loss_layers = LossLayers::all);
std::pair<long long, long long> batch_baseline_errors(std::span<const ChannelSample> batch,
                                                      BaselineKind kind);

} // namespace ref

} // namespace unfold
