#pragma once

#include <string>
#include <vector>

#include "unfold/checkpoint.hpp"
#include "unfold/config.hpp"

namespace unfold {

// One (method, SNR) result row. memory/flops are the masked-storage values;
// the *_dense columns are the all-ones-mask equivalents of the same
// architecture, used for ratio columns. Baselines carry zeros.
struct SweepRow {
    std::string method;
    double snr_db = 0.0;
    double ber = 0.0;
    long long symbols = 0;
    long long memory_bytes = 0;
    long long flops = 0;
    int layer_count = 0;
    long long memory_dense_bytes = 0;
    long long flops_dense = 0;
};

struct TrainOutputs {
    ModelParams params;
    std::string label;
    TrainResult result;
    std::string checkpoint_path;
};

// Train per config; writes checkpoint.json, per-step checkpoints,
// train_log.csv and manifest.json under config.out_dir.
TrainOutputs run_train(const ExperimentConfig &config, const std::string &command_line = "");

// Applies the prune settings to a loaded checkpoint; writes pruned.json,
// cost_report.json and cost_report.csv under out_dir.
Checkpoint run_prune(const std::string &checkpoint_path, const PruneSpec &spec,
                     const std::string &out_dir, const std::string &label_override = "");

// Evaluates checkpoints plus requested baselines over the grid. Rows come
// back sorted by method then SNR; evaluation sets depend only on
// (seed, SNR index), so every method sees the same channels.
std::vector<SweepRow> evaluate_methods(const std::vector<Checkpoint> &methods,
                                       const std::vector<BaselineKind> &baselines,
                                       const SnrGrid &grid, int samples_per_point,
                                       uint64_t seed);

void write_sweep_csv(const std::vector<SweepRow> &rows, const std::string &path);
void write_plot_csv(const std::vector<SweepRow> &rows, const std::string &path);
std::vector<SweepRow> read_sweep_csv(const std::string &path);

// Joins sweep rows into the comparison table (CSV + aligned text). Ratio
// columns are relative to each row's own dense-equivalent architecture.
std::string report_table_csv(const std::vector<SweepRow> &rows);
std::string report_table_text(const std::vector<SweepRow> &rows);

// train -> prune (if configured) -> eval -> report under config.out_dir.
// Returns the result rows.
std::vector<SweepRow> run_sweep(const ExperimentConfig &config,
                                const std::string &command_line = "");

void write_text_file(const std::string &path, const std::string &content);
void ensure_dir(const std::string &path);

} // namespace unfold
