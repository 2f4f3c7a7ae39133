#include "unfold/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "unfold/linalg.hpp"

namespace unfold {

int worker_count() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const char *env = std::getenv("UNFOLD_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(n, 1);
}

namespace {

// Exceptions may not escape an OpenMP region; remember the first one.
struct ErrorSlot {
    bool singular = false;
    bool failed = false;
    std::string message;

    void capture(const std::exception &e, bool is_singular) {
        if (failed) return;
        failed = true;
        singular = is_singular;
        message = e.what();
    }
    void rethrow() const {
        if (!failed) return;
        if (singular) throw SingularMatrixError(message);
        throw std::runtime_error(message);
    }
};

struct SampleEval {
    double loss = 0.0;
    long long errors = 0;
    bool flagged = false;
};

SampleEval evaluate_one(const ModelParams &params, const ChannelSample &s, int first_term) {
    Vec q = matvec_transpose(s.H, s.y);
    Matrix G = gram(s.H);
    Vec x_tilde = solve_normal_equations(G, q);
    ForwardTrace tr = forward_pre(params, std::move(q), std::move(G));

    SampleEval out;
    out.loss = loss_plain(tr, s.x, x_tilde, first_term, &out.flagged);
    const Vec &est = tr.final_estimate();
    for (size_t i = 0; i < s.x.size(); ++i)
        out.errors += (est[i] >= 0.0 ? 1.0 : -1.0) != s.x[i];
    return out;
}

int first_loss_term(const ModelParams &params, LossLayers ll) {
    return ll == LossLayers::trainable_only ? params.frozen_prefix + 1 : 1;
}

// Gradient accumulation runs over this many independent blocks regardless
// of the thread count; the block structure fixes the summation order.
constexpr int kGradBlocks = 16;

SampleEval gradient_one(const ModelParams &params, const ChannelSample &s, int first_term,
                        Gradients &partial) {
    Vec q = matvec_transpose(s.H, s.y);
    Matrix G = gram(s.H);
    Vec x_tilde = solve_normal_equations(G, q);
    ForwardTrace tr = forward_pre(params, std::move(q), std::move(G));

    SampleEval ev;
    ev.loss = loss_plain(tr, s.x, x_tilde, first_term, &ev.flagged);
    const Vec &est = tr.final_estimate();
    for (size_t i = 0; i < s.x.size(); ++i)
        ev.errors += (est[i] >= 0.0 ? 1.0 : -1.0) != s.x[i];
    backward_data(tr, params, s.x, x_tilde, partial);
    return ev;
}

BatchEval finish_eval(const std::vector<SampleEval> &evals, int n_tx) {
    BatchEval out;
    for (const SampleEval &e : evals) { // fixed order
        out.data_loss += e.loss;
        out.symbol_errors += e.errors;
        out.flagged += e.flagged;
    }
    out.symbols = static_cast<long long>(evals.size()) * n_tx;
    if (!evals.empty()) out.data_loss /= static_cast<double>(evals.size());
    return out;
}

long long baseline_errors_one(const ChannelSample &s, BaselineKind kind) {
    if (kind == BaselineKind::oracle) return 0;
    Vec decision = kind == BaselineKind::zf ? sign_slice(zf_decode(s.H, s.y))
                                            : ml_decode(s.H, s.y);
    long long errors = 0;
    for (size_t i = 0; i < s.x.size(); ++i) errors += decision[i] != s.x[i];
    return errors;
}

} // namespace

std::vector<ChannelSample> generate_batch(Rng &rng, int n_rx, int n_tx, int count,
                                          SnrRange snr) {
    if (count < 1) throw ConfigError("generate_batch: batch size must be >= 1");
    if (n_rx < n_tx || n_tx < 1)
        throw ConfigError("generate_batch: need N >= K >= 1");
    const Rng base = rng.split();
    std::vector<ChannelSample> batch(count);
    ErrorSlot err;
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (int i = 0; i < count; ++i) {
        try {
            Rng s = base.stream(static_cast<uint64_t>(i));
            batch[i] = make_sample(s, n_rx, n_tx, snr);
        } catch (const std::exception &e) {
#pragma omp critical
            err.capture(e, false);
        }
    }
    err.rethrow();
    return batch;
}

BatchEval batch_evaluate(const ModelParams &params, std::span<const ChannelSample> batch,
                         LossLayers loss_layers) {
    const int n = static_cast<int>(batch.size());
    const int first = first_loss_term(params, loss_layers);
    std::vector<SampleEval> evals(n);
    ErrorSlot err;
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (int i = 0; i < n; ++i) {
        try {
            evals[i] = evaluate_one(params, batch[i], first);
        } catch (const SingularMatrixError &e) {
#pragma omp critical
            err.capture(e, true);
        } catch (const std::exception &e) {
#pragma omp critical
            err.capture(e, false);
        }
    }
    err.rethrow();
    return finish_eval(evals, params.n_tx);
}

BatchEval batch_gradient(const ModelParams &params, std::span<const ChannelSample> batch,
                         const LossSpec &spec, Gradients &grads, LossLayers loss_layers) {
    const int n = static_cast<int>(batch.size());
    require(n >= 1, "batch_gradient: empty batch");
    grads.set_zero();
    const int first = first_loss_term(params, loss_layers);
    std::vector<SampleEval> evals(n);

    // Deterministic reduction: a fixed number of blocks (independent of the
    // thread count) each accumulate their samples in index order, and the
    // block partials are merged in block order. Any thread count therefore
    // produces the same floating-point sum as the serial reference.
    const int blocks = std::min(kGradBlocks, n);
    std::vector<Gradients> partials;
    partials.reserve(blocks);
    for (int b = 0; b < blocks; ++b) partials.push_back(make_gradients(params));

    ErrorSlot err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
    for (int b = 0; b < blocks; ++b) {
        const int lo = static_cast<int>(static_cast<long long>(n) * b / blocks);
        const int hi = static_cast<int>(static_cast<long long>(n) * (b + 1) / blocks);
        for (int i = lo; i < hi; ++i) {
            try {
                evals[i] = gradient_one(params, batch[i], first, partials[b]);
            } catch (const SingularMatrixError &e) {
#pragma omp critical
                err.capture(e, true);
            } catch (const std::exception &e) {
#pragma omp critical
                err.capture(e, false);
            }
        }
    }
    err.rethrow();
    for (int b = 0; b < blocks; ++b) grads.add_scaled(partials[b], 1.0);

    grads.scale(1.0 / static_cast<double>(n));
    backward_regularizer(params, spec, grads);
    return finish_eval(evals, params.n_tx);
}

std::pair<long long, long long> batch_baseline_errors(std::span<const ChannelSample> batch,
                                                      BaselineKind kind) {
    const int n = static_cast<int>(batch.size());
    long long errors = 0, symbols = 0;
    ErrorSlot err;
#pragma omp parallel for schedule(static) num_threads(worker_count()) \
    reduction(+ : errors, symbols)
    for (int i = 0; i < n; ++i) {
        try {
            errors += baseline_errors_one(batch[i], kind);
            symbols += static_cast<long long>(batch[i].x.size());
        } catch (const SingularMatrixError &e) {
#pragma omp critical
            err.capture(e, true);
        } catch (const std::exception &e) {
#pragma omp critical
            err.capture(e, false);
        }
    }
    err.rethrow();
    return {errors, symbols};
}

namespace ref {

std::vector<ChannelSample> generate_batch(Rng &rng, int n_rx, int n_tx, int count,
                                          SnrRange snr) {
    if (count < 1) throw ConfigError("generate_batch: batch size must be >= 1");
    const Rng base = rng.split();
    std::vector<ChannelSample> batch;
    batch.reserve(count);
    for (int i = 0; i < count; ++i) {
        Rng s = base.stream(static_cast<uint64_t>(i));
        batch.push_back(make_sample(s, n_rx, n_tx, snr));
    }
    return batch;
}

BatchEval batch_evaluate(const ModelParams &params, std::span<const ChannelSample> batch,
                         LossLayers loss_layers) {
    const int first = first_loss_term(params, loss_layers);
    std::vector<SampleEval> evals(batch.size());
    for (size_t i = 0; i < batch.size(); ++i)
        evals[i] = evaluate_one(params, batch[i], first);
    return finish_eval(evals, params.n_tx);
}

BatchEval batch_gradient(const ModelParams &params, std::span<const ChannelSample> batch,
                         const LossSpec &spec, Gradients &grads, LossLayers loss_layers) {
    const int n = static_cast<int>(batch.size());
    require(n >= 1, "batch_gradient: empty batch");
    grads.set_zero();
    const int first = first_loss_term(params, loss_layers);
    std::vector<SampleEval> evals(n);

    const int blocks = std::min(kGradBlocks, n);
    std::vector<Gradients> partials;
    partials.reserve(blocks);
    for (int b = 0; b < blocks; ++b) partials.push_back(make_gradients(params));

    for (int b = 0; b < blocks; ++b) {
        const int lo = static_cast<int>(static_cast<long long>(n) * b / blocks);
        const int hi = static_cast<int>(static_cast<long long>(n) * (b + 1) / blocks);
        for (int i = lo; i < hi; ++i)
            evals[i] = gradient_one(params, batch[i], first, partials[b]);
    }
    for (int b = 0; b < blocks; ++b) grads.add_scaled(partials[b], 1.0);

    grads.scale(1.0 / static_cast<double>(n));
    backward_regularizer(params, spec, grads);
    return finish_eval(evals, params.n_tx);
}

std::pair<long long, long long> batch_baseline_errors(std::span<const ChannelSample> batch,
                                                      BaselineKind kind) {
    long long errors = 0, symbols = 0;
    for (const ChannelSample &s : batch) {
        errors += baseline_errors_one(s, kind);
        symbols += static_cast<long long>(s.x.size());
    }
    return {errors, symbols};
}

} // namespace ref

} // namespace unfold
