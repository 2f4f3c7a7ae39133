#include "unfold/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace unfold {

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string manifest_json(const ExperimentConfig &config, const std::string &command_line) {
    nlohmann::json j;
    j["schema"] = "unfold.manifest.v1";
    j["version"] = "0.1.0";
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    j["config_hash"] = hash;
    j["seed"] = config.seed;
    j["command"] = command_line;
    j["created_unix_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count();
    j["config"] = canonical_config(config);
    return j.dump(2);
}

} // namespace

void ensure_dir(const std::string &path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw ConfigError("cannot create directory: " + path);
}

void write_text_file(const std::string &path, const std::string &content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << content;
}

TrainOutputs run_train(const ExperimentConfig &config, const std::string &command_line) {
    config.validate();
    ensure_dir(config.out_dir);

    std::ofstream log(config.out_dir + "/train_log.csv");
    if (!log) throw ConfigError("cannot open train log for writing");
    log << "# schema: unfold.trainlog.v1\n";
    log << "step,layer_count,lr,train_loss,val_loss,val_ber,wall_ms\n";

    TrainHooks hooks;
    hooks.on_log_row = [&](const LogRow &row) {
        log << row.step << ',' << row.layer_count << ',' << fmt(row.lr) << ','
            << fmt(row.train_loss) << ',';
        if (row.has_val) log << fmt(row.val_loss) << ',' << fmt(row.val_ber);
        else log << ',';
        log << ',' << row.wall_ms << '\n';
    };
    const std::string step_prefix = config.out_dir + "/checkpoint_step_";
    hooks.on_step_end = [&](int step, const ModelParams &params) {
        save_checkpoint(params, "", step_prefix + std::to_string(step) + ".json");
    };

    TrainResult result =
        train_incremental(config.train, config.loss, config.schedule(), config.model_spec(),
                          config.seed, config.loss_layers, config.log_every, hooks);

    TrainOutputs out;
    out.label = config.method_label(result.params.depth(), false);
    out.checkpoint_path = config.out_dir + "/checkpoint.json";
    save_checkpoint(result.params, out.label, out.checkpoint_path);
    write_text_file(config.out_dir + "/manifest.json", manifest_json(config, command_line));
    out.params = std::move(result.params);
    out.result = std::move(result);
    return out;
}

Checkpoint run_prune(const std::string &checkpoint_path, const PruneSpec &spec,
                     const std::string &out_dir, const std::string &label_override) {
    spec.validate();
    Checkpoint ck = load_checkpoint(checkpoint_path);
    if (!label_override.empty()) ck.label = label_override;
    prune(ck.params, spec);
    ensure_dir(out_dir);
    save_checkpoint(ck.params, ck.label, out_dir + "/pruned.json");
    const CostReport report = cost_report(ck.params);
    write_text_file(out_dir + "/cost_report.json", cost_report_json(report, ck.label) + "\n");
    write_text_file(out_dir + "/cost_report.csv",
                    "# schema: unfold.cost.v1\n" + cost_report_csv_header() + "\n" +
                        cost_report_csv_row(report, ck.label) + "\n");
    return ck;
}

std::vector<SweepRow> evaluate_methods(const std::vector<Checkpoint> &methods,
                                       const std::vector<BaselineKind> &baselines,
                                       const SnrGrid &grid, int samples_per_point,
                                       uint64_t seed) {
    if (samples_per_point < 1) throw ConfigError("eval: samples must be >= 1");
    for (const BaselineKind b : baselines) {
        if (b == BaselineKind::ml) {
            for (const Checkpoint &ck : methods)
                if (ck.params.n_tx > 16)
                    throw CapacityError("eval: ML baseline limited to K <= 16");
        }
    }
    int n_tx = 0, n_rx = 0;
    if (!methods.empty()) {
        n_tx = methods.front().params.n_tx;
        n_rx = methods.front().params.n_rx;
        for (const Checkpoint &ck : methods)
            if (ck.params.n_tx != n_tx || ck.params.n_rx != n_rx)
                throw ConfigError("eval: all checkpoints must share (K, N)");
    } else if (!baselines.empty()) {
        throw ConfigError("eval: baselines need at least one checkpoint to fix (K, N)");
    }

    std::vector<SweepRow> rows;
    Rng master(seed);
    for (int pt = 0; pt < grid.points; ++pt) {
        const double snr_db = grid.at(pt);
        Rng point_rng = master.stream(0x45564131ULL + static_cast<uint64_t>(pt));
        const std::vector<ChannelSample> eval_set =
            generate_batch(point_rng, n_rx, n_tx, samples_per_point, SnrRange::fixed(snr_db));

        for (const Checkpoint &ck : methods) {
            const BatchEval ev = batch_evaluate(ck.params, eval_set);
            const CostReport cost = cost_report(ck.params);
            SweepRow row;
            row.method = ck.label.empty() ? "unlabeled" : ck.label;
            row.snr_db = snr_db;
            row.ber = ev.ber();
            row.symbols = ev.symbols;
            row.memory_bytes = cost.memory_sparse_bytes;
            row.flops = cost.flops;
            row.layer_count = cost.layer_count;
            row.memory_dense_bytes = cost.memory_dense_bytes;
            row.flops_dense = cost.flops_dense;
            rows.push_back(std::move(row));
        }
        for (const BaselineKind b : baselines) {
            const auto [errors, symbols] = batch_baseline_errors(eval_set, b);
            SweepRow row;
            row.method = b == BaselineKind::zf ? "ZF" : (b == BaselineKind::ml ? "ML" : "Oracle");
            row.snr_db = snr_db;
            row.ber = symbols ? static_cast<double>(errors) / symbols : 0.0;
            row.symbols = symbols;
            rows.push_back(std::move(row));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow &a, const SweepRow &b) {
        if (a.method != b.method) return a.method < b.method;
        return a.snr_db < b.snr_db;
    });
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow> &rows, const std::string &path) {
    std::ostringstream out;
    out << "# schema: unfold.sweep.v1\n";
    out << "method,snr_db,ber,symbols,memory_bytes,flops,layer_count,"
           "memory_dense_bytes,flops_dense\n";
    for (const SweepRow &r : rows) {
        out << r.method << ',' << fmt(r.snr_db) << ',' << fmt(r.ber) << ',' << r.symbols << ','
            << r.memory_bytes << ',' << r.flops << ',' << r.layer_count << ','
            << r.memory_dense_bytes << ',' << r.flops_dense << '\n';
    }
    write_text_file(path, out.str());
}

void write_plot_csv(const std::vector<SweepRow> &rows, const std::string &path) {
    std::ostringstream out;
    out << "# schema: unfold.plot.v1\n";
    out << "method,snr_db,ber,symbols\n";
    for (const SweepRow &r : rows)
        out << r.method << ',' << fmt(r.snr_db) << ',' << fmt(r.ber) << ',' << r.symbols << '\n';
    write_text_file(path, out.str());
}

std::vector<SweepRow> read_sweep_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep csv: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "# schema: unfold.sweep.v1")
        throw ConfigError("sweep csv: missing or unknown schema line in " + path);
    if (!std::getline(in, line) ||
        line != "method,snr_db,ber,symbols,memory_bytes,flops,layer_count,"
                "memory_dense_bytes,flops_dense")
        throw ConfigError("sweep csv: unexpected header in " + path);
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        SweepRow r;
        auto next = [&] {
            if (!std::getline(ls, tok, ',')) throw ConfigError("sweep csv: short row in " + path);
            return tok;
        };
        r.method = next();
        r.snr_db = std::stod(next());
        r.ber = std::stod(next());
        r.symbols = std::stoll(next());
        r.memory_bytes = std::stoll(next());
        r.flops = std::stoll(next());
        r.layer_count = std::stoi(next());
        r.memory_dense_bytes = std::stoll(next());
        r.flops_dense = std::stoll(next());
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

struct ReportRow {
    const SweepRow *src;
    double memory_mb;
    double mem_ratio; // vs own dense architecture; 1.0 for baselines
    double flops_ratio;
};

std::vector<ReportRow> build_report(const std::vector<SweepRow> &rows) {
    std::vector<ReportRow> out;
    out.reserve(rows.size());
    for (const SweepRow &r : rows) {
        ReportRow rr;
        rr.src = &r;
        rr.memory_mb = static_cast<double>(r.memory_bytes) / 1e6;
        rr.mem_ratio = r.memory_dense_bytes > 0
                           ? static_cast<double>(r.memory_bytes) / r.memory_dense_bytes
                           : 1.0;
        rr.flops_ratio =
            r.flops_dense > 0 ? static_cast<double>(r.flops) / r.flops_dense : 1.0;
        out.push_back(rr);
    }
    return out;
}

} // namespace

std::string report_table_csv(const std::vector<SweepRow> &rows) {
    std::ostringstream out;
    out << "# schema: unfold.report.v1\n";
    out << "architecture,snr_db,memory_mb,memory_x_dense,flops,flops_x_dense,ber,symbols\n";
    for (const ReportRow &r : build_report(rows)) {
        out << r.src->method << ',' << fmt(r.src->snr_db) << ',' << fmt(r.memory_mb) << ','
            << fmt(r.mem_ratio) << ',' << r.src->flops << ',' << fmt(r.flops_ratio) << ','
            << fmt(r.src->ber) << ',' << r.src->symbols << '\n';
    }
    return out.str();
}

std::string report_table_text(const std::vector<SweepRow> &rows) {
    const std::vector<ReportRow> rep = build_report(rows);
    std::vector<std::array<std::string, 7>> cells;
    cells.push_back({"Architecture", "SNR dB", "Memory MB", "Mem xDense", "FLOPs",
                     "FLOPs xDense", "BER"});
    for (const ReportRow &r : rep) {
        char mb[32], mr[32], fr[32], ber[32], fl[32], snr[32];
        std::snprintf(mb, sizeof mb, "%.4g", r.memory_mb);
        std::snprintf(mr, sizeof mr, "%.3gx", r.mem_ratio);
        std::snprintf(fr, sizeof fr, "%.3gx", r.flops_ratio);
        std::snprintf(ber, sizeof ber, "%.3g", r.src->ber);
        std::snprintf(fl, sizeof fl, "%.3g", static_cast<double>(r.src->flops));
        std::snprintf(snr, sizeof snr, "%g", r.src->snr_db);
        cells.push_back({r.src->method, snr, mb, mr, fl, fr, ber});
    }
    std::array<size_t, 7> width{};
    for (const auto &row : cells)
        for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    std::ostringstream out;
    for (size_t n = 0; n < cells.size(); ++n) {
        const auto &row = cells[n];
        for (size_t i = 0; i < row.size(); ++i) {
            out << row[i] << std::string(width[i] - row[i].size() + 2, ' ');
        }
        out << '\n';
        if (n == 0) {
            size_t total = 0;
            for (size_t w : width) total += w + 2;
            out << std::string(total, '-') << '\n';
        }
    }
    return out.str();
}

std::vector<SweepRow> run_sweep(const ExperimentConfig &config,
                                const std::string &command_line) {
    TrainOutputs trained = run_train(config, command_line);

    Checkpoint method;
    if (config.do_prune) {
        method = run_prune(trained.checkpoint_path, config.prune_spec, config.out_dir,
                           config.method_label(trained.params.depth()));
    } else {
        method.params = std::move(trained.params);
        method.label = trained.label;
    }

    std::vector<Checkpoint> methods;
    methods.push_back(std::move(method));
    std::vector<SweepRow> rows = evaluate_methods(methods, config.baselines, config.grid,
                                                  config.eval_samples, config.seed);
    write_sweep_csv(rows, config.out_dir + "/sweep.csv");
    write_plot_csv(rows, config.out_dir + "/plot.csv");
    write_text_file(config.out_dir + "/report.csv", report_table_csv(rows));
    write_text_file(config.out_dir + "/report.txt", report_table_text(rows));
    return rows;
}

} // namespace unfold
