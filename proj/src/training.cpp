#include "unfold/training.hpp"

#include <chrono>
#include <cmath>

namespace unfold {

void IncrementalConfig::validate() const {
    if (start_layers < 1 || t_step < 1 || max_layers < start_layers)
        throw ConfigError("IncrementalConfig: need start_layers >= 1, t_step >= 1, "
                          "max_layers >= start_layers");
    if (halt_epsilon < 0.0) throw ConfigError("IncrementalConfig: halt_epsilon must be >= 0");
    if (val_samples < 1) throw ConfigError("IncrementalConfig: val_samples must be >= 1");
}

ValidationResult validate(const ModelParams &params, std::span<const ChannelSample> eval_set,
                          LossLayers loss_layers) {
    const BatchEval ev = batch_evaluate(params, eval_set, loss_layers);
    return {ev.data_loss, ev.ber()};
}

TrainResult train_incremental(const TrainConfig &config, const LossSpec &spec,
                              const IncrementalConfig &inc, const ModelSpec &model,
                              uint64_t seed, LossLayers loss_layers, int log_every,
                              const TrainHooks &hooks) {
    const int n_tx = model.n_tx;
    const int n_rx = model.n_rx;
    config.validate();
    inc.validate();

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto wall_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count();
    };

    Rng master(seed);
    Rng init_rng = master.stream(1);
    Rng train_rng = master.stream(2);
    Rng val_rng = master.stream(3);

    const std::vector<ChannelSample> eval_set =
        generate_batch(val_rng, n_rx, n_tx, inc.val_samples, SnrRange::fixed(inc.val_snr_db));

    TrainResult result;
    ModelParams params =
        init_params(init_rng, n_tx, n_rx, inc.start_layers, model.dims, model.init);
    const SnrRange train_snr{config.snr_lo_db, config.snr_hi_db};

    double prev_val_loss = 0.0;
    int64_t global_step = 0;

    for (int step_idx = 0;; ++step_idx) {
        const auto step_t0 = clock::now();
        AdamState state = make_adam_state(params);
        Gradients grads = make_gradients(params);

        double step_loss_sum = 0.0;
        double window_loss_sum = 0.0;
        int window_count = 0;

        for (int b = 0; b < config.total_batches; ++b) {
            std::vector<ChannelSample> batch =
                generate_batch(train_rng, n_rx, n_tx, config.batch_size, train_snr);
            const BatchEval ev = batch_gradient(params, batch, spec, grads, loss_layers);
            result.flagged_samples += ev.flagged;
            const double objective = ev.data_loss + regularizer(params, spec);
            if (!std::isfinite(objective))
                throw DivergenceError("train: objective became non-finite at step " +
                                      std::to_string(global_step));
            const double lr_now = learning_rate(config, state.step);
            adam_step(params, grads, state, config);
            ++global_step;
            step_loss_sum += objective;
            window_loss_sum += objective;
            ++window_count;

            if (hooks.on_log_row && (b + 1) % log_every == 0 && b + 1 < config.total_batches) {
                LogRow row;
                row.step = global_step;
                row.layer_count = params.depth();
                row.lr = lr_now;
                row.train_loss = window_loss_sum / window_count;
                row.wall_ms = wall_ms();
                hooks.on_log_row(row);
                window_loss_sum = 0.0;
                window_count = 0;
            }
        }

        const ValidationResult val = validate(params, eval_set, loss_layers);
        StepRecord rec;
        rec.step = step_idx;
        rec.layer_count = params.depth();
        rec.train_loss = step_loss_sum / config.total_batches;
        rec.val_loss = val.loss;
        rec.val_ber = val.ber;
        rec.wall_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - step_t0).count();
        result.steps.push_back(rec);

        if (hooks.on_log_row) {
            LogRow row;
            row.step = global_step;
            row.layer_count = params.depth();
            row.lr = learning_rate(config, state.step);
            row.train_loss = rec.train_loss;
            row.has_val = true;
            row.val_loss = val.loss;
            row.val_ber = val.ber;
            row.wall_ms = wall_ms();
            hooks.on_log_row(row);
        }
        if (hooks.on_step_end) hooks.on_step_end(step_idx, params);

        if (inc.target_ber > 0.0 && val.ber <= inc.target_ber) {
            result.halt_reason = "target_ber";
            break;
        }
        if (step_idx > 0 && inc.halt_epsilon > 0.0) {
            const double improvement =
                prev_val_loss > 0.0 ? (prev_val_loss - val.loss) / prev_val_loss : 0.0;
            if (improvement < inc.halt_epsilon) {
                result.halt_reason = "converged";
                break;
            }
        }
        prev_val_loss = val.loss;
        if (params.depth() >= inc.max_layers) {
            result.halt_reason = "max_layers";
            break;
        }

        const int add = std::min(inc.t_step, inc.max_layers - params.depth());
        params.frozen_prefix = params.depth();
        append_layers(params, add, init_rng, model.init);
    }

    result.params = std::move(params);
    return result;
}

} // namespace unfold
