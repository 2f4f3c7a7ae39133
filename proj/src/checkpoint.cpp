#include "unfold/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace unfold {

namespace {

using nlohmann::json;

std::string mask_string(const Vec &m) {
    std::string s(m.size(), '0');
    for (size_t i = 0; i < m.size(); ++i)
        if (m[i] != 0.0) s[i] = '1';
    return s;
}

Vec parse_mask(const std::string &s) {
    Vec m(s.size());
    for (size_t i = 0; i < s.size(); ++i) m[i] = s[i] == '1' ? 1.0 : 0.0;
    return m;
}

json matrix_to_json(const Matrix &w) { return json(w.data); }

Matrix matrix_from_json(const json &j, int rows, int cols) {
    Matrix w(rows, cols);
    w.data = j.get<Vec>();
    if (w.data.size() != static_cast<size_t>(rows) * cols)
        throw ConfigError("checkpoint: matrix payload size mismatch");
    return w;
}

} // namespace

void save_checkpoint(const ModelParams &params, const std::string &label,
                     const std::string &path) {
    json j;
    j["format"] = "unfold-checkpoint";
    j["version"] = 1;
    j["label"] = label;
    j["n_tx"] = params.n_tx;
    j["n_rx"] = params.n_rx;
    j["z_dim"] = params.dims.z_dim;
    j["v_dim"] = params.dims.v_dim;
    j["frozen_prefix"] = params.frozen_prefix;
    j["train_steps"] = params.train_steps;

    json layers = json::array();
    for (const LayerParams &p : params.layers) {
        json l;
        l["W1"] = matrix_to_json(p.W1);
        l["W2"] = matrix_to_json(p.W2);
        l["W3"] = matrix_to_json(p.W3);
        l["b1"] = p.b1;
        l["b2"] = p.b2;
        l["b3"] = p.b3;
        l["t"] = p.t;
        l["M1"] = mask_string(p.M1.data);
        l["M2"] = mask_string(p.M2.data);
        l["M3"] = mask_string(p.M3.data);
        l["mb1"] = mask_string(p.mb1);
        l["mb2"] = mask_string(p.mb2);
        l["mb3"] = mask_string(p.mb3);
        layers.push_back(std::move(l));
    }
    j["layers"] = std::move(layers);

    std::ofstream out(path);
    if (!out) throw ConfigError("checkpoint: cannot open for writing: " + path);
    out << j.dump();
    out << '\n';
}

Checkpoint load_checkpoint(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("checkpoint: cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("checkpoint: parse error: ") + e.what());
    }
    if (j.value("format", "") != "unfold-checkpoint" || j.value("version", 0) != 1)
        throw ConfigError("checkpoint: unknown format or version");

    Checkpoint ck;
    ck.label = j.value("label", "");
    ModelParams &m = ck.params;
    m.n_tx = j.at("n_tx").get<int>();
    m.n_rx = j.at("n_rx").get<int>();
    m.dims = param_dims(m.n_tx, j.at("z_dim").get<int>(), j.at("v_dim").get<int>());
    m.frozen_prefix = j.at("frozen_prefix").get<int>();
    m.train_steps = j.at("train_steps").get<int64_t>();

    const Dims &d = m.dims;
    for (const json &l : j.at("layers")) {
        LayerParams p;
        p.W1 = matrix_from_json(l.at("W1"), d.z_dim, d.in_dim);
        p.W2 = matrix_from_json(l.at("W2"), m.n_tx, d.z_dim);
        p.W3 = matrix_from_json(l.at("W3"), d.v_dim, d.z_dim);
        p.b1 = l.at("b1").get<Vec>();
        p.b2 = l.at("b2").get<Vec>();
        p.b3 = l.at("b3").get<Vec>();
        p.t = l.at("t").get<double>();
        p.M1 = Matrix(d.z_dim, d.in_dim);
        p.M1.data = parse_mask(l.at("M1").get<std::string>());
        p.M2 = Matrix(m.n_tx, d.z_dim);
        p.M2.data = parse_mask(l.at("M2").get<std::string>());
        p.M3 = Matrix(d.v_dim, d.z_dim);
        p.M3.data = parse_mask(l.at("M3").get<std::string>());
        p.mb1 = parse_mask(l.at("mb1").get<std::string>());
        p.mb2 = parse_mask(l.at("mb2").get<std::string>());
        p.mb3 = parse_mask(l.at("mb3").get<std::string>());
        if (p.b1.size() != static_cast<size_t>(d.z_dim) ||
            p.b2.size() != static_cast<size_t>(m.n_tx) ||
            p.b3.size() != static_cast<size_t>(d.v_dim) ||
            p.M1.data.size() != p.W1.data.size() ||
            p.M2.data.size() != p.W2.data.size() ||
            p.M3.data.size() != p.W3.data.size() ||
            p.mb1.size() != p.b1.size() || p.mb2.size() != p.b2.size() ||
            p.mb3.size() != p.b3.size())
            throw ConfigError("checkpoint: layer payload size mismatch");
        p.refresh_mask_flag();
        m.layers.push_back(std::move(p));
    }
    if (m.layers.empty()) throw ConfigError("checkpoint: no layers");
    if (m.frozen_prefix < 0 || m.frozen_prefix > m.depth())
        throw ConfigError("checkpoint: frozen_prefix out of range");
    return ck;
}

} // namespace unfold
