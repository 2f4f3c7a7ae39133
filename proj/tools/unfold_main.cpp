#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unfold/harness.hpp"

namespace {

std::string join_args(int argc, char **argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

struct CommonOverrides {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    std::string snr;
    std::string baselines;
    double eta = -1.0, eta1 = -1.0, eta2 = -1.0;

    void attach(CLI::App *cmd, bool needs_config) {
        auto *opt = cmd->add_option("--config", config_path, "experiment config file");
        if (needs_config) opt->required();
        cmd->add_option("--seed", seed, "RNG seed override")->each([this](std::string) {
            seed_set = true;
        });
        cmd->add_option("--out", out_dir, "output directory override");
        cmd->add_option("--snr", snr, "SNR grid override, min:max:points");
        cmd->add_option("--baselines", baselines, "comma list of zf,ml,oracle");
        cmd->add_option("--eta", eta, "element prune threshold fraction");
        cmd->add_option("--eta1", eta1, "group prune threshold fraction");
        cmd->add_option("--eta2", eta2, "element threshold after group pruning");
    }

    unfold::ExperimentConfig load() const {
        unfold::ExperimentConfig c = config_path.empty()
                                         ? unfold::ExperimentConfig{}
                                         : unfold::parse_config_file(config_path);
        if (seed_set) c.seed = seed;
        if (!out_dir.empty()) c.out_dir = out_dir;
        if (!snr.empty()) c.grid = unfold::parse_snr_grid(snr);
        if (!baselines.empty()) c.baselines = unfold::parse_baselines(baselines);
        if (eta >= 0.0) c.prune_spec.eta = eta;
        if (eta1 >= 0.0) c.prune_spec.eta1 = eta1;
        if (eta2 >= 0.0) c.prune_spec.eta2 = eta2;
        c.validate();
        return c;
    }
};

unfold::PruneKind parse_kind_flag(const std::string &kind) {
    if (kind == "element") return unfold::PruneKind::element;
    if (kind == "group") return unfold::PruneKind::group;
    if (kind == "sparse_group") return unfold::PruneKind::sparse_group;
    throw unfold::ConfigError("prune: kind must be element, group or sparse_group");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"unfolded MIMO detector: training, pruning, evaluation"};
    app.require_subcommand(1);
    const std::string command_line = join_args(argc, argv);

    // train
    auto *train_cmd = app.add_subcommand("train", "train a detector per config");
    CommonOverrides train_ov;
    train_ov.attach(train_cmd, true);

    // prune
    auto *prune_cmd = app.add_subcommand("prune", "apply pruning masks to a checkpoint");
    std::string prune_ckpt, prune_kind, prune_out = "out", prune_label;
    double p_eta = 0.0, p_eta1 = 0.0, p_eta2 = 0.0;
    prune_cmd->add_option("--ckpt", prune_ckpt, "input checkpoint")->required();
    prune_cmd->add_option("--kind", prune_kind, "element | group | sparse_group")->required();
    prune_cmd->add_option("--eta", p_eta, "element threshold fraction");
    prune_cmd->add_option("--eta1", p_eta1, "group threshold fraction");
    prune_cmd->add_option("--eta2", p_eta2, "element threshold after group pruning");
    prune_cmd->add_option("--label", prune_label, "method label override");
    prune_cmd->add_option("--out", prune_out, "output directory");

    // eval
    auto *eval_cmd = app.add_subcommand("eval", "BER sweep over an SNR grid");
    std::vector<std::string> eval_ckpts, eval_labels;
    std::string eval_snr = "0:15:16", eval_baselines, eval_out = "out";
    int eval_samples = 10000;
    uint64_t eval_seed = 1;
    eval_cmd->add_option("--ckpt", eval_ckpts, "checkpoint(s) to evaluate");
    eval_cmd->add_option("--label", eval_labels, "label override per --ckpt, in order");
    eval_cmd->add_option("--snr", eval_snr, "SNR grid, min:max:points");
    eval_cmd->add_option("--samples", eval_samples, "samples per SNR point");
    eval_cmd->add_option("--baselines", eval_baselines, "comma list of zf,ml,oracle");
    eval_cmd->add_option("--seed", eval_seed, "RNG seed for evaluation sets");
    eval_cmd->add_option("--out", eval_out, "output directory");

    // report
    auto *report_cmd = app.add_subcommand("report", "comparison table from sweep CSVs");
    std::vector<std::string> report_sweeps;
    std::string report_out;
    report_cmd->add_option("--sweep", report_sweeps, "sweep CSV file(s)")->required();
    report_cmd->add_option("--out", report_out, "output directory (optional)");

    // sweep
    auto *sweep_cmd = app.add_subcommand("sweep", "train + prune + eval + report");
    CommonOverrides sweep_ov;
    sweep_ov.attach(sweep_cmd, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            const unfold::ExperimentConfig config = train_ov.load();
            const unfold::TrainOutputs out = unfold::run_train(config, command_line);
            std::printf("trained %s: %d layers, halt=%s, checkpoint=%s\n", out.label.c_str(),
                        out.params.depth(), out.result.halt_reason.c_str(),
                        out.checkpoint_path.c_str());
            for (const unfold::StepRecord &s : out.result.steps)
                std::printf("  step %d: layers=%d train_loss=%.6g val_loss=%.6g val_ber=%.6g\n",
                            s.step, s.layer_count, s.train_loss, s.val_loss, s.val_ber);
        } else if (*prune_cmd) {
            unfold::PruneSpec spec;
            spec.kind = parse_kind_flag(prune_kind);
            spec.eta = p_eta;
            spec.eta1 = p_eta1;
            spec.eta2 = p_eta2;
            const unfold::Checkpoint ck =
                unfold::run_prune(prune_ckpt, spec, prune_out, prune_label);
            const unfold::CostReport report = unfold::cost_report(ck.params);
            std::printf("pruned %s: %lld / %lld params kept, %lld flops (dense %lld)\n",
                        ck.label.c_str(), report.params_nonzero, report.params_total,
                        report.flops, report.flops_dense);
        } else if (*eval_cmd) {
            if (eval_ckpts.empty() && eval_baselines.empty())
                throw unfold::ConfigError("eval: need at least one --ckpt");
            std::vector<unfold::Checkpoint> methods;
            for (size_t i = 0; i < eval_ckpts.size(); ++i) {
                unfold::Checkpoint ck = unfold::load_checkpoint(eval_ckpts[i]);
                if (i < eval_labels.size()) ck.label = eval_labels[i];
                methods.push_back(std::move(ck));
            }
            const std::vector<unfold::SweepRow> rows = unfold::evaluate_methods(
                methods, unfold::parse_baselines(eval_baselines),
                unfold::parse_snr_grid(eval_snr), eval_samples, eval_seed);
            unfold::ensure_dir(eval_out);
            unfold::write_sweep_csv(rows, eval_out + "/sweep.csv");
            unfold::write_plot_csv(rows, eval_out + "/plot.csv");
            std::printf("%s", unfold::report_table_text(rows).c_str());
        } else if (*report_cmd) {
            std::vector<unfold::SweepRow> rows;
            for (const std::string &path : report_sweeps) {
                std::vector<unfold::SweepRow> part = unfold::read_sweep_csv(path);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            const std::string text = unfold::report_table_text(rows);
            std::printf("%s", text.c_str());
            if (!report_out.empty()) {
                unfold::ensure_dir(report_out);
                unfold::write_text_file(report_out + "/report.csv",
                                        unfold::report_table_csv(rows));
                unfold::write_text_file(report_out + "/report.txt", text);
            }
        } else if (*sweep_cmd) {
            const unfold::ExperimentConfig config = sweep_ov.load();
            const std::vector<unfold::SweepRow> rows = unfold::run_sweep(config, command_line);
            std::printf("%s", unfold::report_table_text(rows).c_str());
        }
    } catch (const unfold::DivergenceError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
