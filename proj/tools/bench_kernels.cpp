// Timing comparison of the OpenMP batch kernels against the serial
// reference: sample generation, batch evaluation and gradient accumulation.

#include <chrono>
#include <cstdio>
#include <functional>

#include "unfold/kernels.hpp"
#include "unfold/model.hpp"

using namespace unfold;

namespace {

double time_ms(const std::function<void()> &fn, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const char *name, double serial_ms, double parallel_ms) {
    std::printf("%-18s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

} // namespace

int main(int argc, char **argv) {
    const int n_tx = argc > 1 ? std::atoi(argv[1]) : 8;
    const int n_rx = argc > 2 ? std::atoi(argv[2]) : 12;
    const int depth = argc > 3 ? std::atoi(argv[3]) : 20;
    const int batch = argc > 4 ? std::atoi(argv[4]) : 500;
    const int reps = 3;

    Rng rng(7);
    ModelParams params = init_params(rng, n_tx, n_rx, depth);
    const SnrRange snr{5.0, 15.0};

    Rng gen_serial(11), gen_parallel(11);
    const double gen_s = time_ms(
        [&] { ref::generate_batch(gen_serial, n_rx, n_tx, batch, snr); }, reps);
    const double gen_p =
        time_ms([&] { generate_batch(gen_parallel, n_rx, n_tx, batch, snr); }, reps);

    Rng data_rng(13);
    const std::vector<ChannelSample> samples = generate_batch(data_rng, n_rx, n_tx, batch, snr);

    const double eval_s = time_ms([&] { ref::batch_evaluate(params, samples); }, reps);
    const double eval_p = time_ms([&] { batch_evaluate(params, samples); }, reps);

    LossSpec spec;
    Gradients grads = make_gradients(params);
    const double grad_s =
        time_ms([&] { ref::batch_gradient(params, samples, spec, grads); }, reps);
    const double grad_p = time_ms([&] { batch_gradient(params, samples, spec, grads); }, reps);

    std::printf("K=%d N=%d L=%d batch=%d workers=%d\n", n_tx, n_rx, depth, batch,
                worker_count());
    std::printf("%-18s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");
    row("generate_batch", gen_s, gen_p);
    row("batch_evaluate", eval_s, eval_p);
    row("batch_gradient", grad_s, grad_p);
    return 0;
}
