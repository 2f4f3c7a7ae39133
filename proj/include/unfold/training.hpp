#pragma once

#include <functional>
#include <string>

#include "unfold/kernels.hpp"

namespace unfold {

// Depth-growing schedule. Step 0 trains start_layers layers from scratch;
// each later step freezes everything trained so far, appends t_step fresh
// layers and trains only those. halt_epsilon = 0 disables the
// negligible-improvement stop; target_ber <= 0 disables the BER stop.
struct IncrementalConfig {
    int start_layers = 30;
    int t_step = 10;
    int max_layers = 90;
    double halt_epsilon = 0.01;
    double target_ber = 0.0;
    int val_samples = 10000;
    double val_snr_db = 12.0;

    void validate() const;
};

struct ValidationResult {
    double loss = 0.0;
    double ber = 0.0;
};

// Deterministic over a fixed held-out set.
ValidationResult validate(const ModelParams &params, std::span<const ChannelSample> eval_set,
                          LossLayers loss_layers = LossLayers::all);

struct StepRecord {
    int step = 0;
    int layer_count = 0;
    double train_loss = 0.0; // mean objective over the step's batches
    double val_loss = 0.0;
    double val_ber = 0.0;
    long long wall_ms = 0;
};

struct LogRow {
    int64_t step = 0; // global optimizer step
    int layer_count = 0;
    double lr = 0.0;
    double train_loss = 0.0; // mean objective since the previous row
    bool has_val = false;
    double val_loss = 0.0;
    double val_ber = 0.0;
    long long wall_ms = 0;
};

struct TrainHooks {
    std::function<void(const LogRow &)> on_log_row;
    std::function<void(int step, const ModelParams &)> on_step_end;
};

struct TrainResult {
    ModelParams params;
    std::vector<StepRecord> steps;
    std::string halt_reason; // "target_ber", "converged" or "max_layers"
    long long flagged_samples = 0;
};

// Incremental trainer; with start_layers == max_layers it reduces to
// ordinary whole-network training. The Eq-style data loss always spans all
// existing layers unless loss_layers says otherwise; frozen layers never
// receive gradient either way. Throws DivergenceError on a non-finite
// objective.
TrainResult train_incremental(const TrainConfig &config, const LossSpec &spec,
                              const IncrementalConfig &inc, const ModelSpec &model,
                              uint64_t seed, LossLayers loss_layers = LossLayers::all,
                              int log_every = 100, const TrainHooks &hooks = {});

} // namespace unfold
