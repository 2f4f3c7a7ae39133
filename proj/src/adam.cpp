#include "unfold/adam.hpp"

#include <cmath>

namespace unfold {

void TrainConfig::validate() const {
    if (lr0 <= 0 || decay_factor <= 0 || decay_step <= 0 || batch_size <= 0 ||
        total_batches <= 0 || adam_beta1 <= 0 || adam_beta1 >= 1 ||
        adam_beta2 <= 0 || adam_beta2 >= 1 || adam_eps <= 0)
        throw ConfigError("TrainConfig: all optimizer settings must be positive (betas in (0,1))");
    if (snr_hi_db < snr_lo_db)
        throw ConfigError("TrainConfig: snr range must satisfy lo <= hi");
}

AdamState make_adam_state(const ModelParams &params) {
    AdamState s;
    s.m = make_gradients(params);
    s.v = make_gradients(params);
    return s;
}

double learning_rate(const TrainConfig &config, int64_t step) {
    return config.lr0 * std::pow(config.decay_factor,
                                 static_cast<double>(step / config.decay_step));
}

namespace {

struct AdamCoef {
    double lr, b1, b2, eps, bc1, bc2;
};

void update_span(double *w, const double *g, double *m, double *v, const double *mask,
                 size_t n, const AdamCoef &c) {
    for (size_t i = 0; i < n; ++i) {
        if (mask && mask[i] == 0.0) continue;
        m[i] = c.b1 * m[i] + (1.0 - c.b1) * g[i];
        v[i] = c.b2 * v[i] + (1.0 - c.b2) * g[i] * g[i];
        const double mhat = m[i] / c.bc1;
        const double vhat = v[i] / c.bc2;
        w[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

} // namespace

void adam_step(ModelParams &params, const Gradients &grads, AdamState &state,
               const TrainConfig &config) {
    const double lr = learning_rate(config, state.step);
    state.step += 1;
    const AdamCoef c{lr, config.adam_beta1, config.adam_beta2, config.adam_eps,
                     1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step)),
                     1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step))};

    for (int l = params.frozen_prefix; l < params.depth(); ++l) {
        LayerParams &p = params.layers[l];
        const LayerGrads &g = grads.layers[l];
        LayerGrads &m = state.m.layers[l];
        LayerGrads &v = state.v.layers[l];
        require(!g.empty() && !m.empty(), "adam_step: gradient/state shape mismatch");

        update_span(p.W1.data.data(), g.W1.data.data(), m.W1.data.data(),
                    v.W1.data.data(), p.M1.data.data(), p.W1.data.size(), c);
        update_span(p.W2.data.data(), g.W2.data.data(), m.W2.data.data(),
                    v.W2.data.data(), p.M2.data.data(), p.W2.data.size(), c);
        update_span(p.W3.data.data(), g.W3.data.data(), m.W3.data.data(),
                    v.W3.data.data(), p.M3.data.data(), p.W3.data.size(), c);
        update_span(p.b1.data(), g.b1.data(), m.b1.data(), v.b1.data(),
                    p.mb1.data(), p.b1.size(), c);
        update_span(p.b2.data(), g.b2.data(), m.b2.data(), v.b2.data(),
                    p.mb2.data(), p.b2.size(), c);
        update_span(p.b3.data(), g.b3.data(), m.b3.data(), v.b3.data(),
                    p.mb3.data(), p.b3.size(), c);
        update_span(&p.t, &g.t, &m.t, &v.t, nullptr, 1, c);
        if (p.t < 1e-3) p.t = 1e-3; // soft sign is singular at t = 0
    }
    params.train_steps += 1;
}

} // namespace unfold
