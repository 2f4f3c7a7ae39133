#pragma once

#include "unfold/backward.hpp"

namespace unfold {

struct TrainConfig {
    double lr0 = 1e-4;
    double decay_factor = 0.97;
    int decay_step = 1000;
    int batch_size = 1000;
    int total_batches = 20000; // per incremental step
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double snr_lo_db = 0.0; // training SNR drawn uniformly per sample
    double snr_hi_db = 15.0;

    void validate() const;
};

// First/second moment estimates; shapes mirror the trainable layers.
struct AdamState {
    Gradients m;
    Gradients v;
    int64_t step = 0;
};

AdamState make_adam_state(const ModelParams &params);

// lr0 * decay^floor(step / decay_step): the decay applies in stairs.
double learning_rate(const TrainConfig &config, int64_t step);

// One Adam update. Frozen layers are skipped entirely; masked weight and
// bias entries are left untouched. t is clamped to >= 1e-3 afterwards.
void adam_step(ModelParams &params, const Gradients &grads, AdamState &state,
               const TrainConfig &config);

} // namespace unfold
