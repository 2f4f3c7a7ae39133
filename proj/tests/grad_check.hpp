// Central finite-difference gradient checking used by the backward tests
// and the acceptance suite.
#pragma once

#include <cmath>
#include <vector>

#include "unfold/backward.hpp"
#include "unfold/channel.hpp"
#include "unfold/linalg.hpp"
#include "unfold/loss.hpp"

namespace gradcheck {

// Trainable scalars in a fixed order: per layer W1, b1, W2, b2, W3, b3, t.
inline std::vector<double *> flatten_params(unfold::ModelParams &m) {
    std::vector<double *> out;
    for (int l = m.frozen_prefix; l < m.depth(); ++l) {
        unfold::LayerParams &p = m.layers[l];
        for (double &v : p.W1.data) out.push_back(&v);
        for (double &v : p.b1) out.push_back(&v);
        for (double &v : p.W2.data) out.push_back(&v);
        for (double &v : p.b2) out.push_back(&v);
        for (double &v : p.W3.data) out.push_back(&v);
        for (double &v : p.b3) out.push_back(&v);
        out.push_back(&p.t);
    }
    return out;
}

inline unfold::Vec flatten_grads(const unfold::Gradients &g, const unfold::ModelParams &m) {
    unfold::Vec out;
    for (int l = m.frozen_prefix; l < m.depth(); ++l) {
        const unfold::LayerGrads &gl = g.layers[l];
        out.insert(out.end(), gl.W1.data.begin(), gl.W1.data.end());
        out.insert(out.end(), gl.b1.begin(), gl.b1.end());
        out.insert(out.end(), gl.W2.data.begin(), gl.W2.data.end());
        out.insert(out.end(), gl.b2.begin(), gl.b2.end());
        out.insert(out.end(), gl.W3.data.begin(), gl.W3.data.end());
        out.insert(out.end(), gl.b3.begin(), gl.b3.end());
        out.push_back(gl.t);
    }
    return out;
}

// Single-sample objective: depth-weighted data loss plus regularizer.
inline double objective(const unfold::ModelParams &m, const unfold::ChannelSample &s,
                        const unfold::Vec &x_tilde, const unfold::LossSpec &spec) {
    const unfold::ForwardTrace tr = unfold::forward(m, s.H, s.y);
    return unfold::loss_plain(tr, s.x, x_tilde) + unfold::regularizer(m, spec);
}

// True when every pre-activation sits farther than margin from its kink.
inline bool away_from_kinks(const unfold::ModelParams &m, const unfold::ChannelSample &s,
                            double margin) {
    const unfold::ForwardTrace tr = unfold::forward(m, s.H, s.y);
    for (int l = 0; l < m.depth(); ++l) {
        for (double u : tr.u1[l])
            if (std::abs(u) <= margin) return false;
        const double t = m.layers[l].t;
        for (double u : tr.u2[l])
            if (std::abs(u - t) <= margin || std::abs(u + t) <= margin) return false;
    }
    return true;
}

struct CheckResult {
    double max_rel_error = 0.0;
    size_t checked = 0;
};

// Relative error with a floor at max(1, entry magnitudes): large entries are
// compared relatively, tiny ones absolutely, keeping finite-difference noise
// out of the verdict.
inline CheckResult check_gradients(unfold::ModelParams &m, const unfold::ChannelSample &s,
                                   const unfold::LossSpec &spec, double h = 1e-5) {
    const unfold::Vec x_tilde = unfold::zf_decode(s.H, s.y);
    const unfold::ForwardTrace tr = unfold::forward(m, s.H, s.y);
    const unfold::Gradients analytic = unfold::backward(tr, m, s.x, x_tilde, spec);
    const unfold::Vec aflat = flatten_grads(analytic, m);
    std::vector<double *> ptrs = flatten_params(m);

    CheckResult res;
    res.checked = ptrs.size();
    for (size_t i = 0; i < ptrs.size(); ++i) {
        const double saved = *ptrs[i];
        *ptrs[i] = saved + h;
        const double fp = objective(m, s, x_tilde, spec);
        *ptrs[i] = saved - h;
        const double fm = objective(m, s, x_tilde, spec);
        *ptrs[i] = saved;
        const double numeric = (fp - fm) / (2.0 * h);
        const double denom = std::max({1.0, std::abs(aflat[i]), std::abs(numeric)});
        res.max_rel_error =
            std::max(res.max_rel_error, std::abs(aflat[i] - numeric) / denom);
    }
    return res;
}

// The L1 terms are non-smooth at w = 0: a weight inside the stencil width
// makes central differences measure the kink, not the subgradient. Push
// such weights away from zero before checking.
inline void nudge_weights_off_l1_kink(unfold::ModelParams &m, double margin = 1e-4) {
    for (unfold::LayerParams &p : m.layers) {
        for (unfold::Matrix *W : {&p.W1, &p.W2, &p.W3})
            for (double &w : W->data)
                if (std::abs(w) < margin) w = w >= 0.0 ? margin : -margin;
    }
}

// Draws samples until the kink margin holds.
inline unfold::ChannelSample sample_off_kinks(unfold::Rng &rng, const unfold::ModelParams &m,
                                              double snr_db, double margin = 1e-4) {
    for (int attempt = 0; attempt < 256; ++attempt) {
        unfold::ChannelSample s =
            unfold::make_sample(rng, m.n_rx, m.n_tx, unfold::SnrRange::fixed(snr_db));
        if (away_from_kinks(m, s, margin)) return s;
    }
    throw std::runtime_error("gradcheck: could not find a kink-free sample");
}

} // namespace gradcheck
