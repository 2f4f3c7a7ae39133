#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unfold/compression.hpp"
#include "unfold/kernels.hpp"
#include "unfold/training.hpp"

namespace unfold {

// Whole-experiment settings, read from an INI-style file (key = value under
// [section] headers, # or ; comments). Every default matches the reference
// protocol; see docs/formats.md for the schema.
struct ExperimentConfig {
    // [model]
    int n_tx = 20;
    int n_rx = 30;
    int z_dim = 0; // 0 means the 8K default
    int v_dim = 0; // 0 means the 2K default
    int layers = 90;
    InitOptions init;

    // [train]
    LossSpec loss;
    TrainConfig train;
    LossLayers loss_layers = LossLayers::all;
    int log_every = 100;

    // [incremental]
    bool incremental = false;
    IncrementalConfig inc;

    // [prune]
    bool do_prune = false;
    PruneSpec prune_spec;

    // [eval]
    SnrGrid grid;
    int eval_samples = 10000;
    std::vector<BaselineKind> baselines;

    // [run]
    uint64_t seed = 1;
    std::string out_dir = "out";
    std::string label_override;

    void validate() const;
    Dims dims() const;
    ModelSpec model_spec() const;

    // Effective depth schedule: non-incremental runs collapse to a single
    // step over all layers.
    IncrementalConfig schedule() const;

    // Conventional method label derived from loss/prune/schedule settings,
    // e.g. "DetNet", "R-DetNet", "R-I-DetNet(SGL)-50L".
    std::string method_label(int final_depth, bool include_prune = true) const;
};

ExperimentConfig parse_config_text(const std::string &text);
ExperimentConfig parse_config_file(const std::string &path);

// Fixed-order dump used for hashing and the run manifest.
std::string canonical_config(const ExperimentConfig &config);
uint64_t config_hash(const ExperimentConfig &config);

std::vector<BaselineKind> parse_baselines(const std::string &list);
SnrGrid parse_snr_grid(const std::string &spec); // "min:max:points"

} // namespace unfold
