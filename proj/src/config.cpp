#include "unfold/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace unfold {

namespace {

std::string trim(const std::string &s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct KvReader {
    std::map<std::string, std::string> entries; // "section.key" -> value
    std::map<std::string, bool> consumed;

    std::string get(const std::string &key, const std::string &fallback) {
        auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        consumed[key] = true;
        return it->second;
    }
    double get_double(const std::string &key, double fallback) {
        auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        consumed[key] = true;
        try {
            size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception &) {
            throw ConfigError("config: bad number for " + key + ": " + it->second);
        }
    }
    long long get_int(const std::string &key, long long fallback) {
        auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        consumed[key] = true;
        long long v = 0;
        const char *first = it->second.data();
        const char *last = first + it->second.size();
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr != last)
            throw ConfigError("config: bad integer for " + key + ": " + it->second);
        return v;
    }
    uint64_t get_u64(const std::string &key, uint64_t fallback) {
        auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        consumed[key] = true;
        uint64_t v = 0;
        const char *first = it->second.data();
        const char *last = first + it->second.size();
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr != last)
            throw ConfigError("config: bad unsigned integer for " + key + ": " + it->second);
        return v;
    }
    bool get_bool(const std::string &key, bool fallback) {
        const std::string v = get(key, fallback ? "true" : "false");
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("config: bad boolean for " + key + ": " + v);
    }
    void reject_unknown() const {
        for (const auto &[key, _] : entries)
            if (!consumed.count(key)) throw ConfigError("config: unknown key: " + key);
    }
};

KvReader read_ini(const std::string &text) {
    KvReader r;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: empty key at line " + std::to_string(lineno));
        const std::string full = section.empty() ? key : section + "." + key;
        if (r.entries.count(full)) throw ConfigError("config: duplicate key: " + full);
        r.entries[full] = value;
    }
    return r;
}

LossKind parse_loss_kind(const std::string &s) {
    if (s == "plain") return LossKind::plain;
    if (s == "element_l1") return LossKind::element_l1;
    if (s == "sparse_group") return LossKind::sparse_group;
    throw ConfigError("config: unknown loss kind: " + s);
}

PruneKind parse_prune_kind(const std::string &s) {
    if (s == "element") return PruneKind::element;
    if (s == "group") return PruneKind::group;
    if (s == "sparse_group") return PruneKind::sparse_group;
    throw ConfigError("config: unknown prune kind: " + s);
}

} // namespace

std::vector<BaselineKind> parse_baselines(const std::string &list) {
    std::vector<BaselineKind> out;
    std::istringstream in(list);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        if (tok == "zf") out.push_back(BaselineKind::zf);
        else if (tok == "ml") out.push_back(BaselineKind::ml);
        else if (tok == "oracle") out.push_back(BaselineKind::oracle);
        else throw ConfigError("config: unknown baseline: " + tok);
    }
    return out;
}

SnrGrid parse_snr_grid(const std::string &spec) {
    SnrGrid g;
    int points = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &g.min_db, &g.max_db, &points) != 3)
        throw ConfigError("config: snr grid must be min:max:points, got " + spec);
    g.points = points;
    if (g.points < 1 || g.max_db < g.min_db)
        throw ConfigError("config: snr grid needs min <= max and points >= 1");
    return g;
}

ExperimentConfig parse_config_text(const std::string &text) {
    KvReader r = read_ini(text);

    const std::string schema = r.get("schema", "unfold.config.v1");
    if (schema != "unfold.config.v1")
        throw ConfigError("config: unsupported schema: " + schema);

    ExperimentConfig c;
    c.n_tx = static_cast<int>(r.get_int("model.k", c.n_tx));
    c.n_rx = static_cast<int>(r.get_int("model.n", c.n_rx));
    c.z_dim = static_cast<int>(r.get_int("model.z_dim", 0));
    c.v_dim = static_cast<int>(r.get_int("model.v_dim", 0));
    c.layers = static_cast<int>(r.get_int("model.layers", c.layers));
    c.init.weight_scale = r.get_double("model.init_weight_scale", c.init.weight_scale);
    c.init.t0 = r.get_double("model.init_t", c.init.t0);

    c.loss.kind = parse_loss_kind(r.get("train.loss", "plain"));
    c.loss.lambda = r.get_double("train.lambda", 0.0);
    c.loss.lambda1 = r.get_double("train.lambda1", 0.0);
    c.loss.lambda2 = r.get_double("train.lambda2", 0.0);
    c.train.lr0 = r.get_double("train.lr0", c.train.lr0);
    c.train.decay_factor = r.get_double("train.decay_factor", c.train.decay_factor);
    c.train.decay_step = static_cast<int>(r.get_int("train.decay_step", c.train.decay_step));
    c.train.batch_size = static_cast<int>(r.get_int("train.batch_size", c.train.batch_size));
    c.train.total_batches =
        static_cast<int>(r.get_int("train.total_batches", c.train.total_batches));
    c.train.adam_beta1 = r.get_double("train.adam_beta1", c.train.adam_beta1);
    c.train.adam_beta2 = r.get_double("train.adam_beta2", c.train.adam_beta2);
    c.train.adam_eps = r.get_double("train.adam_eps", c.train.adam_eps);
    c.train.snr_lo_db = r.get_double("train.snr_lo_db", c.train.snr_lo_db);
    c.train.snr_hi_db = r.get_double("train.snr_hi_db", c.train.snr_hi_db);
    const std::string ll = r.get("train.loss_layers", "all");
    if (ll == "all") c.loss_layers = LossLayers::all;
    else if (ll == "trainable") c.loss_layers = LossLayers::trainable_only;
    else throw ConfigError("config: loss_layers must be all or trainable");
    c.log_every = static_cast<int>(r.get_int("train.log_every", c.log_every));

    c.incremental = r.get_bool("incremental.enabled", false);
    c.inc.start_layers = static_cast<int>(r.get_int("incremental.start_layers", c.inc.start_layers));
    c.inc.t_step = static_cast<int>(r.get_int("incremental.t_step", c.inc.t_step));
    c.inc.max_layers = static_cast<int>(r.get_int("incremental.max_layers", c.inc.max_layers));
    c.inc.halt_epsilon = r.get_double("incremental.halt_epsilon", c.inc.halt_epsilon);
    c.inc.target_ber = r.get_double("incremental.target_ber", c.inc.target_ber);
    c.inc.val_samples = static_cast<int>(r.get_int("incremental.val_samples", c.inc.val_samples));
    c.inc.val_snr_db = r.get_double("incremental.val_snr_db", c.inc.val_snr_db);

    const std::string pk = r.get("prune.kind", "none");
    if (pk != "none") {
        c.do_prune = true;
        c.prune_spec.kind = parse_prune_kind(pk);
    }
    c.prune_spec.eta = r.get_double("prune.eta", c.prune_spec.eta);
    c.prune_spec.eta1 = r.get_double("prune.eta1", c.prune_spec.eta1);
    c.prune_spec.eta2 = r.get_double("prune.eta2", c.prune_spec.eta2);

    c.grid.min_db = r.get_double("eval.snr_min_db", c.grid.min_db);
    c.grid.max_db = r.get_double("eval.snr_max_db", c.grid.max_db);
    c.grid.points = static_cast<int>(r.get_int("eval.snr_points", c.grid.points));
    c.eval_samples = static_cast<int>(r.get_int("eval.eval_samples", c.eval_samples));
    c.baselines = parse_baselines(r.get("eval.baselines", ""));

    c.seed = r.get_u64("run.seed", c.seed);
    c.out_dir = r.get("run.out", c.out_dir);
    c.label_override = r.get("run.label", "");

    r.reject_unknown();
    c.validate();
    return c;
}

ExperimentConfig parse_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void ExperimentConfig::validate() const {
    if (n_tx < 1 || n_rx < n_tx)
        throw ConfigError("config: need n >= k >= 1");
    if (layers < 1) throw ConfigError("config: layers must be >= 1");
    if (z_dim < 0 || v_dim < 0) throw ConfigError("config: z_dim/v_dim must be >= 0");
    if (init.weight_scale <= 0 || init.t0 < 1e-3)
        throw ConfigError("config: init_weight_scale must be > 0 and init_t >= 1e-3");
    train.validate();
    if (incremental) inc.validate();
    if (do_prune) prune_spec.validate();
    if (grid.points < 1 || grid.max_db < grid.min_db)
        throw ConfigError("config: bad snr grid");
    if (eval_samples < 1) throw ConfigError("config: eval_samples must be >= 1");
    if (log_every < 1) throw ConfigError("config: log_every must be >= 1");
}

Dims ExperimentConfig::dims() const {
    if (z_dim > 0 || v_dim > 0) {
        const Dims d = param_dims(n_tx);
        return param_dims(n_tx, z_dim > 0 ? z_dim : d.z_dim, v_dim > 0 ? v_dim : d.v_dim);
    }
    return param_dims(n_tx);
}

ModelSpec ExperimentConfig::model_spec() const { return {n_tx, n_rx, dims(), init}; }

IncrementalConfig ExperimentConfig::schedule() const {
    if (incremental) return inc;
    IncrementalConfig s = inc;
    s.start_layers = layers;
    s.max_layers = layers;
    s.t_step = layers;
    s.halt_epsilon = 0.0;
    s.target_ber = 0.0;
    return s;
}

std::string ExperimentConfig::method_label(int final_depth, bool include_prune) const {
    if (!label_override.empty()) return label_override;
    std::string base;
    switch (loss.kind) {
    case LossKind::plain: base = incremental ? "I-DetNet" : "DetNet"; break;
    case LossKind::element_l1: base = incremental ? "R-I-DetNet" : "R-DetNet"; break;
    case LossKind::sparse_group: {
        const std::string tag = loss.lambda2 == 0.0 ? "(GL)" : "(SGL)";
        base = (incremental ? "R-I-DetNet" : "R-DetNet") + tag;
        break;
    }
    }
    if (incremental) base += "-" + std::to_string(final_depth) + "L";
    if (do_prune && include_prune) {
        char buf[96];
        switch (prune_spec.kind) {
        case PruneKind::element:
            std::snprintf(buf, sizeof buf, " (eta=%g)", prune_spec.eta);
            break;
        case PruneKind::group:
            std::snprintf(buf, sizeof buf, " (eta1=%g)", prune_spec.eta1);
            break;
        case PruneKind::sparse_group:
            std::snprintf(buf, sizeof buf, " (eta1=%g,eta2=%g)", prune_spec.eta1,
                          prune_spec.eta2);
            break;
        }
        if (loss.kind == LossKind::plain) base = "Pruned " + base;
        base += buf;
    }
    return base;
}

std::string canonical_config(const ExperimentConfig &c) {
    std::ostringstream out;
    auto num = [](double v) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "schema = unfold.config.v1\n";
    out << "[model]\n";
    out << "k = " << c.n_tx << "\nn = " << c.n_rx << "\n";
    out << "z_dim = " << c.z_dim << "\nv_dim = " << c.v_dim << "\n";
    out << "layers = " << c.layers << "\n";
    out << "init_weight_scale = " << num(c.init.weight_scale) << "\n";
    out << "init_t = " << num(c.init.t0) << "\n";
    out << "[train]\n";
    const char *loss_names[] = {"plain", "element_l1", "sparse_group"};
    out << "loss = " << loss_names[static_cast<int>(c.loss.kind)] << "\n";
    out << "lambda = " << num(c.loss.lambda) << "\n";
    out << "lambda1 = " << num(c.loss.lambda1) << "\n";
    out << "lambda2 = " << num(c.loss.lambda2) << "\n";
    out << "lr0 = " << num(c.train.lr0) << "\n";
    out << "decay_factor = " << num(c.train.decay_factor) << "\n";
    out << "decay_step = " << c.train.decay_step << "\n";
    out << "batch_size = " << c.train.batch_size << "\n";
    out << "total_batches = " << c.train.total_batches << "\n";
    out << "adam_beta1 = " << num(c.train.adam_beta1) << "\n";
    out << "adam_beta2 = " << num(c.train.adam_beta2) << "\n";
    out << "adam_eps = " << num(c.train.adam_eps) << "\n";
    out << "snr_lo_db = " << num(c.train.snr_lo_db) << "\n";
    out << "snr_hi_db = " << num(c.train.snr_hi_db) << "\n";
    out << "loss_layers = " << (c.loss_layers == LossLayers::all ? "all" : "trainable") << "\n";
    out << "log_every = " << c.log_every << "\n";
    out << "[incremental]\n";
    out << "enabled = " << (c.incremental ? "true" : "false") << "\n";
    out << "start_layers = " << c.inc.start_layers << "\n";
    out << "t_step = " << c.inc.t_step << "\n";
    out << "max_layers = " << c.inc.max_layers << "\n";
    out << "halt_epsilon = " << num(c.inc.halt_epsilon) << "\n";
    out << "target_ber = " << num(c.inc.target_ber) << "\n";
    out << "val_samples = " << c.inc.val_samples << "\n";
    out << "val_snr_db = " << num(c.inc.val_snr_db) << "\n";
    out << "[prune]\n";
    const char *prune_names[] = {"element", "group", "sparse_group"};
    out << "kind = " << (c.do_prune ? prune_names[static_cast<int>(c.prune_spec.kind)] : "none")
        << "\n";
    out << "eta = " << num(c.prune_spec.eta) << "\n";
    out << "eta1 = " << num(c.prune_spec.eta1) << "\n";
    out << "eta2 = " << num(c.prune_spec.eta2) << "\n";
    out << "[eval]\n";
    out << "snr_min_db = " << num(c.grid.min_db) << "\n";
    out << "snr_max_db = " << num(c.grid.max_db) << "\n";
    out << "snr_points = " << c.grid.points << "\n";
    out << "eval_samples = " << c.eval_samples << "\n";
    out << "baselines = ";
    for (size_t i = 0; i < c.baselines.size(); ++i) {
        const char *names[] = {"zf", "ml", "oracle"};
        out << (i ? "," : "") << names[static_cast<int>(c.baselines[i])];
    }
    out << "\n";
    out << "[run]\n";
    out << "seed = " << c.seed << "\n";
    out << "out = " << c.out_dir << "\n";
    out << "label = " << c.label_override << "\n";
    return out.str();
}

uint64_t config_hash(const ExperimentConfig &c) {
    // FNV-1a over the canonical dump.
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace unfold
