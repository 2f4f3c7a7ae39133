// Acceptance suite: one check per release criterion, one PASS/FAIL line
// each, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "grad_check.hpp"
#include "unfold/harness.hpp"

using namespace unfold;

namespace {

int failures = 0;

void report(const char *name, bool pass, const std::string &detail, double seconds) {
    std::printf("[%s] %s: %s [%.1fs]\n", pass ? "PASS" : "FAIL", name, detail.c_str(),
                seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

void run(const char *name, const std::function<std::pair<bool, std::string>()> &fn) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        auto [p, d] = fn();
        pass = p;
        detail = std::move(d);
    } catch (const std::exception &e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(name, pass, detail, secs);
}

std::string fmt(const char *f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// ---- criterion 1: gradient correctness ------------------------------------

std::pair<bool, std::string> gradient_correctness() {
    const std::vector<LossSpec> losses = {
        {LossKind::plain, 0, 0, 0},
        {LossKind::element_l1, 0.04, 0, 0},
        {LossKind::sparse_group, 0, 0.04, 0.04},
    };
    double worst = 0.0;
    size_t checks = 0;
    for (int instance = 0; instance < 20; ++instance) {
        Rng rng(1000 + instance);
        ModelParams m = init_params(rng, 2, 3, 3); // default dim formula
        Rng extra(2000 + instance);
        for (LayerParams &p : m.layers) {
            for (double &b : p.b1) b = 0.1 * extra.next_gaussian();
            for (double &b : p.b2) b = 0.1 * extra.next_gaussian();
            for (double &b : p.b3) b = 0.1 * extra.next_gaussian();
        }
        gradcheck::nudge_weights_off_l1_kink(m);
        Rng data(3000 + instance);
        const ChannelSample s = gradcheck::sample_off_kinks(data, m, 6.0 + instance % 8, 5e-4);
        for (const LossSpec &spec : losses) {
            const auto res = gradcheck::check_gradients(m, s, spec, 1e-5);
            worst = std::max(worst, res.max_rel_error);
            checks += res.checked;
        }
    }
    return {worst < 1e-5,
            fmt("max rel err %.2e over 20 instances x 3 losses (%zu scalars), bound 1e-5",
                worst, checks)};
}

// ---- criterion 2: cost-model reproduction ----------------------------------

std::pair<bool, std::string> cost_model() {
    Rng rng(7);
    const ModelParams m = init_params(rng, 20, 30, 90);
    const long long mem = memory_bytes(m, Storage::dense);
    const long long flops = flops_per_detection(m, true);
    const double mem_err = std::abs(mem / 1e6 - 9.19) / 9.19;
    const double flop_err = std::abs(static_cast<double>(flops) - 4.9e6) / 4.9e6;
    return {mem_err < 0.02 && flop_err < 0.10,
            fmt("memory %.4f MB (ref 9.19, err %.2f%%), flops %lld (ref 4.9e6, err %.2f%%)",
                mem / 1e6, 100 * mem_err, flops, 100 * flop_err)};
}

// ---- criterion 3: pruning equivalence --------------------------------------

std::pair<bool, std::string> pruning_equivalence() {
    Rng data_rng(11);
    long long compared = 0;
    for (auto kind : {PruneKind::element, PruneKind::group, PruneKind::sparse_group}) {
        Rng rng(21);
        ModelParams pruned = init_params(rng, 3, 5, 3);
        PruneSpec spec;
        spec.kind = kind;
        spec.eta = 0.3;
        spec.eta1 = 0.025;
        spec.eta2 = 0.3;
        prune(pruned, spec);

        ModelParams dense = pruned;
        for (LayerParams &p : dense.layers) {
            for (size_t i = 0; i < p.W1.data.size(); ++i) p.W1.data[i] *= p.M1.data[i];
            for (size_t i = 0; i < p.W2.data.size(); ++i) p.W2.data[i] *= p.M2.data[i];
            for (size_t i = 0; i < p.W3.data.size(); ++i) p.W3.data[i] *= p.M3.data[i];
            for (size_t i = 0; i < p.b1.size(); ++i) p.b1[i] *= p.mb1[i];
            for (size_t i = 0; i < p.b2.size(); ++i) p.b2[i] *= p.mb2[i];
            for (size_t i = 0; i < p.b3.size(); ++i) p.b3[i] *= p.mb3[i];
            for (double &v : p.M1.data) v = 1.0;
            for (double &v : p.M2.data) v = 1.0;
            for (double &v : p.M3.data) v = 1.0;
            for (double &v : p.mb1) v = 1.0;
            for (double &v : p.mb2) v = 1.0;
            for (double &v : p.mb3) v = 1.0;
            p.refresh_mask_flag();
        }

        for (int trial = 0; trial < 1000; ++trial) {
            Matrix H(5, 3);
            Vec y(5);
            for (double &v : H.data) v = data_rng.next_gaussian();
            for (double &v : y) v = data_rng.next_gaussian();
            const ForwardTrace a = forward(pruned, H, y);
            const ForwardTrace b = forward(dense, H, y);
            for (size_t k = 0; k < a.x_hat.size(); ++k) {
                if (a.x_hat[k] != b.x_hat[k])
                    return {false, fmt("mismatch at trial %d, estimate %zu", trial, k)};
                ++compared;
            }
        }
    }
    return {true, fmt("bit-identical traces over 3 prune kinds x 1000 inputs (%lld vectors)",
                      compared)};
}

// ---- criterion 4: structured FLOP saving ------------------------------------

std::pair<bool, std::string> structured_flop_saving() {
    Rng rng(31);
    ModelParams base = init_params(rng, 3, 5, 2);
    prune_element(base, 0.2); // uneven per-column nonzero counts
    int columns = 0;
    for (int l = 0; l < base.depth(); ++l) {
        for (int col = 0; col < base.dims.in_dim; ++col) {
            const long long before = flops_per_detection(base, true);
            ModelParams cut = base;
            long long col_nnz = 0;
            for (int i = 0; i < cut.layers[l].M1.rows; ++i) {
                col_nnz += cut.layers[l].M1(i, col) != 0.0;
                cut.layers[l].M1(i, col) = 0.0;
            }
            cut.layers[l].refresh_mask_flag();
            const long long after = flops_per_detection(cut, true);
            // bias folding is free in the documented census, so the saving
            // is exactly the column's multiply-accumulate pairs
            if (before - after != 2 * col_nnz)
                return {false, fmt("layer %d col %d: delta %lld, expected %lld", l, col,
                                   before - after, 2 * col_nnz)};
            if (col_nnz > 0 && after >= before)
                return {false, fmt("layer %d col %d: no strict decrease", l, col)};
            ++columns;
        }
    }
    return {true, fmt("exact 2x(column nnz) decrease across %d input columns", columns)};
}

// ---- criterion 5: incremental freezing --------------------------------------

std::pair<bool, std::string> incremental_freezing() {
    TrainConfig tc;
    tc.lr0 = 1e-3;
    tc.batch_size = 64;
    tc.total_batches = 300;
    tc.snr_lo_db = 8.0;
    tc.snr_hi_db = 12.0;
    IncrementalConfig inc;
    inc.start_layers = 5;
    inc.t_step = 5;
    inc.max_layers = 15;
    inc.halt_epsilon = 0.0;
    inc.target_ber = 0.0;
    inc.val_samples = 500;
    inc.val_snr_db = 10.0;

    std::vector<ModelParams> snaps;
    TrainHooks hooks;
    hooks.on_step_end = [&](int, const ModelParams &p) { snaps.push_back(p); };
    const TrainResult run = train_incremental(tc, LossSpec{}, inc,
                                              ModelSpec{4, 8, param_dims(4), {0.5, 3.0}}, 99,
                                              LossLayers::all, 1000, hooks);
    if (run.steps.size() != 3 || snaps.size() != 3)
        return {false, fmt("expected 3 steps, got %zu", run.steps.size())};

    auto identical = [](const LayerParams &a, const LayerParams &b) {
        return a.W1.data == b.W1.data && a.W2.data == b.W2.data && a.W3.data == b.W3.data &&
               a.b1 == b.b1 && a.b2 == b.b2 && a.b3 == b.b3 && a.t == b.t;
    };
    long long compared = 0;
    for (int l = 0; l < 5; ++l) { // step-1 window across steps 2 and 3
        if (!identical(snaps[0].layers[l], snaps[1].layers[l]) ||
            !identical(snaps[0].layers[l], snaps[2].layers[l]))
            return {false, fmt("step-1 layer %d changed after later steps", l + 1)};
        ++compared;
    }
    for (int l = 5; l < 10; ++l) { // step-2 window across step 3
        if (!identical(snaps[1].layers[l], snaps[2].layers[l]))
            return {false, fmt("step-2 layer %d changed after step 3", l + 1)};
        ++compared;
    }
    return {true, fmt("15-layer growth in 3 steps; %lld frozen layers bit-identical; "
                      "final depth %d",
                      compared, run.params.depth())};
}

// ---- criterion 6: desk-scale detection quality ------------------------------

ModelParams train_desk(const LossSpec &spec, int total_batches, double decay_factor,
                       uint64_t seed) {
    TrainConfig tc;
    tc.lr0 = 2e-3;
    tc.decay_factor = decay_factor;
    tc.decay_step = 1000;
    tc.batch_size = 200;
    tc.total_batches = total_batches;
    tc.snr_lo_db = 8.0;
    tc.snr_hi_db = 12.0;
    IncrementalConfig inc;
    inc.start_layers = 20;
    inc.t_step = 20;
    inc.max_layers = 20;
    inc.halt_epsilon = 0.0;
    inc.target_ber = 0.0;
    inc.val_samples = 1000;
    inc.val_snr_db = 10.0;
    TrainResult run = train_incremental(tc, spec, inc,
                                        ModelSpec{4, 8, param_dims(4), {0.5, 3.0}}, seed);
    return std::move(run.params);
}

struct DeskEval {
    double net_ber, zf_ber, ml_ber;
    long long symbols;
};

DeskEval desk_eval(const ModelParams &m, uint64_t eval_seed) {
    Rng rng(eval_seed);
    const auto eval_set = generate_batch(rng, 8, 4, 50000, SnrRange::fixed(10.0));
    const BatchEval net = batch_evaluate(m, eval_set);
    const auto [zf_err, sym1] = batch_baseline_errors(eval_set, BaselineKind::zf);
    const auto [ml_err, sym2] = batch_baseline_errors(eval_set, BaselineKind::ml);
    return {net.ber(), static_cast<double>(zf_err) / sym1,
            static_cast<double>(ml_err) / sym2, net.symbols};
}

ModelParams g_desk_plain; // shared with criterion 7

std::pair<bool, std::string> desk_scale_quality() {
    g_desk_plain = train_desk(LossSpec{}, 2000, 0.97, 42);
    const DeskEval ev = desk_eval(g_desk_plain, 777);
    const bool pass = ev.net_ber <= ev.zf_ber && ev.net_ber <= 5.0 * ev.ml_ber &&
                      ev.symbols >= 100000;
    return {pass, fmt("net %.5f vs zf %.5f and 5xml %.5f over %lld symbols at 10 dB",
                      ev.net_ber, ev.zf_ber, 5.0 * ev.ml_ber, ev.symbols)};
}

// ---- criterion 7: regularization sparsifies ---------------------------------

double zero_weight_fraction(const ModelParams &m) {
    long long zeros = 0, total = 0;
    for (const LayerParams &p : m.layers) {
        for (double v : p.M1.data) { zeros += v == 0.0; ++total; }
        for (double v : p.M2.data) { zeros += v == 0.0; ++total; }
        for (double v : p.M3.data) { zeros += v == 0.0; ++total; }
    }
    return static_cast<double>(zeros) / static_cast<double>(total);
}

std::pair<bool, std::string> regularization_sparsifies() {
    if (g_desk_plain.depth() == 0) g_desk_plain = train_desk(LossSpec{}, 2000, 0.97, 42);

    LossSpec sgl;
    sgl.kind = LossKind::sparse_group;
    sgl.lambda1 = 0.04;
    sgl.lambda2 = 0.04;
    // longer schedule with a harder decay floor lets the L1 pressure drive
    // weights to prunable magnitudes
    ModelParams reg = train_desk(sgl, 10000, 0.9, 42);

    ModelParams plain_pruned = g_desk_plain;
    prune_element(plain_pruned, 0.05);
    ModelParams reg_unpruned = reg;
    prune_sparse_group(reg, 0.0005, 0.01);

    const double frac_plain = zero_weight_fraction(plain_pruned);
    const double frac_reg = zero_weight_fraction(reg);
    const DeskEval before = desk_eval(reg_unpruned, 777);
    const DeskEval after = desk_eval(reg, 777);
    const double degradation = after.net_ber / before.net_ber - 1.0;

    const bool pass = frac_reg >= 2.0 * frac_plain && degradation <= 0.20;
    return {pass, fmt("zero fraction %.3f vs %.3f unregularized (ratio %.2f, need >= 2); "
                      "pruning changed BER %.5f -> %.5f (%+.1f%%, cap +20%%)",
                      frac_reg, frac_plain, frac_reg / frac_plain, before.net_ber,
                      after.net_ber, 100 * degradation)};
}

// ---- criterion 8: loss degeneracy -------------------------------------------

std::pair<bool, std::string> loss_degeneracy() {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        ForwardTrace tr;
        tr.x_hat.resize(2);
        tr.x_hat[0] = Vec(3, 0.0);
        tr.x_hat[1] = Vec{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()};
        Vec x{1.0, -1.0, 1.0};
        Vec x_tilde{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()};
        const double loss = loss_plain(tr, x, x_tilde);
        if (loss != 0.0) return {false, fmt("L=1 loss %.17g != 0", loss)};
    }
    return {true, "single-layer loss is exactly 0 for 100 random estimates"};
}

// ---- criterion 9: determinism ------------------------------------------------

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::pair<bool, std::string> sweep_determinism() {
    const auto base = std::filesystem::temp_directory_path() / "unfold_acceptance_sweep";
    std::filesystem::remove_all(base);
    ExperimentConfig config = parse_config_text(R"(
[model]
k = 2
n = 3
layers = 3
[train]
lr0 = 1e-3
batch_size = 32
total_batches = 40
snr_lo_db = 5
snr_hi_db = 13
[incremental]
val_samples = 300
val_snr_db = 10
[prune]
kind = element
eta = 0.02
[eval]
snr_min_db = 4
snr_max_db = 12
snr_points = 3
eval_samples = 1500
baselines = zf,ml,oracle
[run]
seed = 17
)");
    config.out_dir = (base / "a").string();
    run_sweep(config, "acceptance determinism a");
    ExperimentConfig config2 = config;
    config2.out_dir = (base / "b").string();
    run_sweep(config2, "acceptance determinism b");

    for (const char *f : {"/sweep.csv", "/plot.csv", "/report.csv", "/report.txt"}) {
        const std::string a = slurp(config.out_dir + f);
        const std::string b = slurp(config2.out_dir + f);
        if (a.empty() || a != b) return {false, fmt("%s differs between identical runs", f)};
    }
    std::filesystem::remove_all(base);
    return {true, "sweep.csv, plot.csv, report.csv, report.txt byte-identical across reruns"};
}

} // namespace

int main() {
    std::printf("acceptance suite (%d workers)\n", worker_count());
    run("C1 gradient-correctness", gradient_correctness);
    run("C2 cost-model-reproduction", cost_model);
    run("C3 pruning-equivalence", pruning_equivalence);
    run("C4 structured-flop-saving", structured_flop_saving);
    run("C8 loss-degeneracy", loss_degeneracy);
    run("C5 incremental-freezing", incremental_freezing);
    run("C9 sweep-determinism", sweep_determinism);
    run("C6 desk-scale-quality", desk_scale_quality);
    run("C7 regularization-sparsifies", regularization_sparsifies);
    if (failures == 0) std::printf("all criteria passed\n");
    else std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
