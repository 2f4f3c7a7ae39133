#include "unfold/compression.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace unfold {

void PruneSpec::validate() const {
    auto frac = [](double v) { return v >= 0.0 && v < 1.0; };
    if (!frac(eta) || !frac(eta1) || !frac(eta2))
        throw ConfigError("PruneSpec: thresholds must lie in [0, 1)");
}

namespace {

double unmasked_absmax(const Matrix &W, const Matrix &M) {
    double m = 0.0;
    for (size_t i = 0; i < W.data.size(); ++i)
        if (M.data[i] != 0.0) m = std::max(m, std::abs(W.data[i]));
    return m;
}

void mask_below(Matrix &M, const Matrix &W, double threshold) {
    for (size_t i = 0; i < W.data.size(); ++i)
        if (M.data[i] != 0.0 && std::abs(W.data[i]) < threshold) M.data[i] = 0.0;
}

std::vector<double> column_norms(const Matrix &W, const Vec &b) {
    std::vector<double> norms(W.cols + 1, 0.0);
    for (int j = 0; j < W.cols; ++j) {
        double sq = 0.0;
        for (int i = 0; i < W.rows; ++i) sq += W(i, j) * W(i, j);
        norms[j] = std::sqrt(sq);
    }
    double sq = 0.0;
    for (double v : b) sq += v * v;
    norms[W.cols] = std::sqrt(sq);
    return norms;
}

void prune_group_matrix(Matrix &M, Vec &mb, const Matrix &W, const Vec &b, double eta1) {
    const std::vector<double> norms = column_norms(W, b);
    double max_norm = 0.0;
    for (double v : norms) max_norm = std::max(max_norm, v);
    const double threshold = eta1 * max_norm;
    for (int j = 0; j < W.cols; ++j) {
        if (norms[j] < threshold)
            for (int i = 0; i < W.rows; ++i) M(i, j) = 0.0;
    }
    if (norms[W.cols] < threshold)
        for (double &v : mb) v = 0.0;
}

} // namespace

void prune_element(ModelParams &params, double eta) {
    require(eta >= 0.0 && eta < 1.0, "prune_element: eta must lie in [0, 1)");
    for (LayerParams &p : params.layers) {
        const double wmax = std::max({unmasked_absmax(p.W1, p.M1),
                                      unmasked_absmax(p.W2, p.M2),
                                      unmasked_absmax(p.W3, p.M3)});
        const double threshold = eta * wmax;
        mask_below(p.M1, p.W1, threshold);
        mask_below(p.M2, p.W2, threshold);
        mask_below(p.M3, p.W3, threshold);
        p.refresh_mask_flag();
    }
}

void prune_group(ModelParams &params, double eta1) {
    require(eta1 >= 0.0 && eta1 < 1.0, "prune_group: eta1 must lie in [0, 1)");
    for (LayerParams &p : params.layers) {
        prune_group_matrix(p.M1, p.mb1, p.W1, p.b1, eta1);
        prune_group_matrix(p.M2, p.mb2, p.W2, p.b2, eta1);
        prune_group_matrix(p.M3, p.mb3, p.W3, p.b3, eta1);
        p.refresh_mask_flag();
    }
}

void prune_sparse_group(ModelParams &params, double eta1, double eta2) {
    prune_group(params, eta1);
    prune_element(params, eta2);
}

void prune(ModelParams &params, const PruneSpec &spec) {
    spec.validate();
    switch (spec.kind) {
    case PruneKind::element: prune_element(params, spec.eta); break;
    case PruneKind::group: prune_group(params, spec.eta1); break;
    case PruneKind::sparse_group: prune_sparse_group(params, spec.eta1, spec.eta2); break;
    }
}

namespace {

long long count_ones(const Vec &v) {
    long long n = 0;
    for (double x : v) n += x != 0.0;
    return n;
}

} // namespace

long long memory_bytes(const ModelParams &params, Storage storage) {
    long long stored = 0;
    for (const LayerParams &p : params.layers) {
        if (storage == Storage::dense) {
            stored += static_cast<long long>(p.W1.size() + p.W2.size() + p.W3.size() +
                                             p.b1.size() + p.b2.size() + p.b3.size()) + 1;
        } else {
            stored += count_ones(p.M1.data) + count_ones(p.M2.data) + count_ones(p.M3.data) +
                      count_ones(p.mb1) + count_ones(p.mb2) + count_ones(p.mb3) + 1;
        }
    }
    return 4 * stored;
}

long long flops_per_detection(const ModelParams &params, bool include_preprocess) {
    const long long k = params.n_tx;
    const long long n = params.n_rx;
    long long flops = 0;
    for (const LayerParams &p : params.layers)
        flops += 2 * (count_ones(p.M1.data) + count_ones(p.M2.data) + count_ones(p.M3.data)) +
                 2 * k * k;
    if (include_preprocess) flops += 2 * n * k + 2 * n * k * k;
    return flops;
}

CostReport cost_report(const ModelParams &params) {
    const long long k = params.n_tx;
    const long long n = params.n_rx;
    CostReport r;
    r.layer_count = params.depth();
    r.preprocess_flops = 2 * n * k + 2 * n * k * k;
    for (const LayerParams &p : params.layers) {
        LayerCost c;
        const long long weights_total =
            static_cast<long long>(p.W1.size() + p.W2.size() + p.W3.size());
        const long long weights_nonzero =
            count_ones(p.M1.data) + count_ones(p.M2.data) + count_ones(p.M3.data);
        c.params_total = weights_total +
                         static_cast<long long>(p.b1.size() + p.b2.size() + p.b3.size()) + 1;
        c.params_nonzero = weights_nonzero + count_ones(p.mb1) + count_ones(p.mb2) +
                           count_ones(p.mb3) + 1;
        c.flops = 2 * weights_nonzero + 2 * k * k;
        r.params_total += c.params_total;
        r.params_nonzero += c.params_nonzero;
        r.flops += c.flops;
        r.flops_dense += 2 * weights_total + 2 * k * k;
        r.per_layer.push_back(c);
    }
    r.flops += r.preprocess_flops;
    r.flops_dense += r.preprocess_flops;
    r.memory_dense_bytes = memory_bytes(params, Storage::dense);
    r.memory_sparse_bytes = memory_bytes(params, Storage::masked_sparse);
    return r;
}

std::string cost_report_json(const CostReport &r, const std::string &label) {
    nlohmann::json j;
    j["schema"] = "unfold.cost.v1";
    j["label"] = label;
    j["layer_count"] = r.layer_count;
    j["params_total"] = r.params_total;
    j["params_nonzero"] = r.params_nonzero;
    j["memory_dense_bytes"] = r.memory_dense_bytes;
    j["memory_sparse_bytes"] = r.memory_sparse_bytes;
    j["flops"] = r.flops;
    j["flops_dense"] = r.flops_dense;
    j["preprocess_flops"] = r.preprocess_flops;
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerCost &c : r.per_layer) {
        layers.push_back({{"params_total", c.params_total},
                          {"params_nonzero", c.params_nonzero},
                          {"flops", c.flops}});
    }
    j["per_layer"] = std::move(layers);
    return j.dump(2);
}

std::string cost_report_csv_header() {
    return "label,layer_count,params_total,params_nonzero,memory_dense_bytes,"
           "memory_sparse_bytes,flops,flops_dense";
}

std::string cost_report_csv_row(const CostReport &r, const std::string &label) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%d,%lld,%lld,%lld,%lld,%lld,%lld", label.c_str(),
                  r.layer_count, r.params_total, r.params_nonzero, r.memory_dense_bytes,
                  r.memory_sparse_bytes, r.flops, r.flops_dense);
    return buf;
}

} // namespace unfold
