#include <charconv>
#include <fstream>
#include <sstream>

#include "dgp/app.hpp"

namespace dgp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
    return out;
}


std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::vector<std::size_t> to_dims(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_uint(key, trim(item)));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::string num(double v) { return format_double(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>) out += format_double(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

struct Entry {
    const char* key;
    const char* doc;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define DGP_DOUBLE(k, doc, field)                                                   \
    Entry {                                                                         \
        k, doc, [](const ExperimentConfig& c) { return num(double(c.field)); },    \
            [](ExperimentConfig& c, const std::string& v) { c.field = to_double(k, v); } \
    }
#define DGP_UINT(k, doc, field)                                                              \
    Entry {                                                                                  \
        k, doc, [](const ExperimentConfig& c) { return num(std::uint64_t(c.field)); },      \
            [](ExperimentConfig& c, const std::string& v) { c.field = to_uint(k, v); }       \
    }
#define DGP_LIST(k, doc, field)                                                         \
    Entry {                                                                             \
        k, doc, [](const ExperimentConfig& c) { return join(c.field); },               \
            [](ExperimentConfig& c, const std::string& v) { c.field = to_list(k, v); } \
    }

Entry side_source(const char* k, DataSide ExperimentConfig::*side) {
    return {k, "synthetic | tu",
            [side](const ExperimentConfig& c) { return std::string((c.*side).synthetic ? "synthetic" : "tu"); },
            [side, k](ExperimentConfig& c, const std::string& v) {
                if (v == "synthetic") (c.*side).synthetic = true;
                else if (v == "tu") (c.*side).synthetic = false;
                else throw ConfigError(std::string(k) + ": expected synthetic or tu");
            }};
}

Entry side_dir(const char* k, DataSide ExperimentConfig::*side) {
    return {k, "directory holding the TU text files",
            [side](const ExperimentConfig& c) { return (c.*side).dir.string(); },
            [side](ExperimentConfig& c, const std::string& v) { (c.*side).dir = v; }};
}

Entry side_name(const char* k, DataSide ExperimentConfig::*side) {
    return {k, "TU dataset name (file prefix)", [side](const ExperimentConfig& c) { return (c.*side).name; },
            [side](ExperimentConfig& c, const std::string& v) { (c.*side).name = v; }};
}

Entry path_entry(const char* k, const char* doc, std::filesystem::path ExperimentConfig::*field) {
    return {k, doc, [field](const ExperimentConfig& c) { return (c.*field).string(); },
            [field](ExperimentConfig& c, const std::string& v) { c.*field = v; }};
}

Augmentation parse_aug(const std::string& key, const std::string& v) {
    try {
        return Augmentation::parse(v);
    } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        DGP_UINT("seed", "master seed; stage seeds derive from it", seed),
        path_entry("out", "output directory", &ExperimentConfig::out),
        side_source("id.source", &ExperimentConfig::id),
        side_dir("id.dir", &ExperimentConfig::id),
        side_name("id.name", &ExperimentConfig::id),
        side_source("ood.source", &ExperimentConfig::ood),
        side_dir("ood.dir", &ExperimentConfig::ood),
        side_name("ood.name", &ExperimentConfig::ood),
        DGP_UINT("synth.classes", "ID classes", synth.classes),
        DGP_UINT("synth.per_class", "ID graphs per class", synth.per_class),
        DGP_UINT("synth.min_nodes", "smallest ID graph", synth.motif.min_nodes),
        DGP_UINT("synth.max_nodes", "largest ID graph", synth.motif.max_nodes),
        DGP_UINT("synth.motifs", "planted cycles per ID graph", synth.motif.motifs_per_graph),
        DGP_DOUBLE("synth.density", "background edge probability of ID graphs", synth.density),
        DGP_UINT("synth.ood_count", "OOD graphs; 0 means just enough for the split", synth.ood_count),
        DGP_UINT("synth.ood_min_nodes", "smallest OOD graph", synth.ood.min_nodes),
        DGP_UINT("synth.ood_max_nodes", "largest OOD graph", synth.ood.max_nodes),
        DGP_DOUBLE("synth.ood_density_mult", "OOD background density over ID density", synth.ood.density_multiplier),
        DGP_UINT("synth.star_leaves", "leaves of the planted OOD star", synth.ood.star_leaves),
        Entry{"features", "degree | native (node labels/attributes from the files)",
              [](const ExperimentConfig& c) { return std::string(c.features == Featurizer::Degree ? "degree" : "native"); },
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "degree") c.features = Featurizer::Degree;
                  else if (v == "native") c.features = Featurizer::Native;
                  else throw ConfigError("features: expected degree or native");
              }},
        DGP_UINT("max_degree", "degree one-hot clamp", max_degree),
        Entry{"encoder.layers", "GIN layer widths, comma separated",
              [](const ExperimentConfig& c) { return join(c.pretrain.arch.layer_dims); },
              [](ExperimentConfig& c, const std::string& v) { c.pretrain.arch.layer_dims = to_dims("encoder.layers", v); }},
        DGP_UINT("encoder.hidden", "hidden width of each GIN layer MLP", pretrain.arch.gin_hidden),
        DGP_UINT("encoder.proj_dim", "projection head width", pretrain.arch.proj_dim),
        Entry{"encoder.pooling", "sum | mean",
              [](const ExperimentConfig& c) { return std::string(c.pretrain.arch.pooling == Pooling::Sum ? "sum" : "mean"); },
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "sum") c.pretrain.arch.pooling = Pooling::Sum;
                  else if (v == "mean") c.pretrain.arch.pooling = Pooling::Mean;
                  else throw ConfigError("encoder.pooling: expected sum or mean");
              }},
        Entry{"pretrain.method", "graphcl | simgrace | none (random frozen encoder)",
              [](const ExperimentConfig& c) -> std::string {
                  if (!c.pretrain_enabled) return "none";
                  return c.pretrain.method == PretrainMethod::GraphCL ? "graphcl" : "simgrace";
              },
              [](ExperimentConfig& c, const std::string& v) {
                  c.pretrain_enabled = v != "none";
                  if (v == "graphcl") c.pretrain.method = PretrainMethod::GraphCL;
                  else if (v == "simgrace") c.pretrain.method = PretrainMethod::SimGRACE;
                  else if (v != "none") throw ConfigError("pretrain.method: expected graphcl, simgrace or none");
              }},
        DGP_UINT("pretrain.epochs", "contrastive epochs", pretrain.epochs),
        DGP_UINT("pretrain.batch", "contrastive batch size", pretrain.batch_size),
        DGP_DOUBLE("pretrain.lr", "Adam learning rate for pre-training", pretrain.lr),
        DGP_DOUBLE("pretrain.tau", "NT-Xent temperature", pretrain.tau),
        DGP_DOUBLE("pretrain.eta", "SimGRACE perturbation scale", pretrain.eta),
        Entry{"pretrain.aug1", "first GraphCL view, e.g. node_drop:0.1",
              [](const ExperimentConfig& c) { return c.pretrain.aug1.str(); },
              [](ExperimentConfig& c, const std::string& v) { c.pretrain.aug1 = parse_aug("pretrain.aug1", v); }},
        Entry{"pretrain.aug2", "second GraphCL view",
              [](const ExperimentConfig& c) { return c.pretrain.aug2.str(); },
              [](ExperimentConfig& c, const std::string& v) { c.pretrain.aug2 = parse_aug("pretrain.aug2", v); }},
        DGP_DOUBLE("dgp.lambda", "class-agnostic loss weight", dgp.lambda),
        DGP_DOUBLE("dgp.gamma", "weight of the class-agnostic score", dgp.gamma),
        DGP_DOUBLE("dgp.alpha1", "distance loss weight, class-specific branch", dgp.alpha1),
        DGP_DOUBLE("dgp.alpha2", "distance loss weight, class-agnostic branch", dgp.alpha2),
        DGP_DOUBLE("dgp.lr", "Adam learning rate for both phases", dgp.lr),
        DGP_UINT("dgp.epochs", "prompt training epochs", dgp.epochs),
        DGP_UINT("dgp.batch", "prompt training batch size", dgp.batch_size),
        DGP_UINT("dgp.gen_hidden", "generator hidden width", dgp.gen_hidden),
        DGP_UINT("dgp.pred_hidden", "predictor hidden width", dgp.pred_hidden),
        DGP_DOUBLE("dgp.gen_init_bias", "generator output bias at init", dgp.gen_init_bias),
        Entry{"dgp.branches", "both | specific | agnostic",
              [](const ExperimentConfig& c) -> std::string {
                  if (c.dgp.branches == Branches::SpecificOnly) return "specific";
                  if (c.dgp.branches == Branches::AgnosticOnly) return "agnostic";
                  return "both";
              },
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "both") c.dgp.branches = Branches::Both;
                  else if (v == "specific") c.dgp.branches = Branches::SpecificOnly;
                  else if (v == "agnostic") c.dgp.branches = Branches::AgnosticOnly;
                  else throw ConfigError("dgp.branches: expected both, specific or agnostic");
              }},
        Entry{"dgp.variant", "full | v0 | v1 | v2, applied to the dgp.* values set so far",
              [](const ExperimentConfig&) { return std::string(); },
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "full") c.dgp = apply_variant(c.dgp, Variant::Full);
                  else if (v == "v0") c.dgp = apply_variant(c.dgp, Variant::V0);
                  else if (v == "v1") c.dgp = apply_variant(c.dgp, Variant::V1);
                  else if (v == "v2") c.dgp = apply_variant(c.dgp, Variant::V2);
                  else throw ConfigError("dgp.variant: expected full, v0, v1 or v2");
              }},
        Entry{"dgp.distance_reference", "prompted | unprompted statistics inside the distance loss",
              [](const ExperimentConfig& c) {
                  return std::string(c.dgp.distance_reference == DistanceReference::Prompted ? "prompted" : "unprompted");
              },
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "prompted") c.dgp.distance_reference = DistanceReference::Prompted;
                  else if (v == "unprompted") c.dgp.distance_reference = DistanceReference::Unprompted;
                  else throw ConfigError("dgp.distance_reference: expected prompted or unprompted");
              }},
        DGP_UINT("dgp.eval_every", "epochs between validation checks", dgp.eval_every),
        DGP_UINT("dgp.patience", "validation checks without improvement before stopping; 0 disables", dgp.patience),
        Entry{"dgp.standardize", "true | false: fixed standardisation of generator and predictor inputs",
              [](const ExperimentConfig& c) -> std::string { return c.dgp.standardize ? "true" : "false"; },
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "true") c.dgp.standardize = true;
                  else if (v == "false") c.dgp.standardize = false;
                  else throw ConfigError("dgp.standardize: expected true or false");
              }},
        DGP_UINT("scorer.clusters", "k-means clusters Q", dgp.scorer.clusters),
        DGP_DOUBLE("scorer.eps_reg", "ridge as a fraction of trace/dim", dgp.scorer.eps_reg),
        DGP_DOUBLE("scorer.eps_d", "floor on the squared distance", dgp.scorer.eps_d),
        DGP_LIST("grid.lambda", "values swept by grid", grid.lambda),
        DGP_LIST("grid.gamma", "values swept by grid (no retraining)", grid.gamma),
        DGP_LIST("grid.alpha1", "values swept by grid", grid.alpha1),
        DGP_LIST("grid.alpha2", "values swept by grid", grid.alpha2),
        DGP_LIST("grid.lr", "values swept by grid", grid.lr),
        DGP_UINT("ablate.repeats", "seeds per ablation variant", repeats),
        path_entry("encoder", "encoder checkpoint; default <out>/encoder.ckpt", &ExperimentConfig::encoder),
        path_entry("model", "model file; default <out>/model.dgp", &ExperimentConfig::model),
        path_entry("scores", "score CSV read by eval; default <out>/scores.csv", &ExperimentConfig::scores),
        Entry{"split", "test | val, the split scored by score and dump-prompts",
              [](const ExperimentConfig& c) { return c.split; },
              [](ExperimentConfig& c, const std::string& v) {
                  if (v != "test" && v != "val") throw ConfigError("split: expected test or val");
                  c.split = v;
              }},
    };
    return table;
}

#undef DGP_DOUBLE
#undef DGP_UINT
#undef DGP_LIST

}  // namespace

std::size_t GridSpec::cardinality() const {
    return lambda.size() * gamma.size() * alpha1.size() * alpha2.size() * lr.size();
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& e : entries()) out.push_back({e.key, e.doc});
        return out;
    }();
    return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& e : entries()) {
        if (key == e.key) {
            e.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
        try {
            set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in, path.string());
}

std::string config_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& e : entries()) {
        // dgp.variant is a macro over other keys; its effect is already in them.
        if (std::string(e.key) == "dgp.variant") continue;
        out += std::string(e.key) + " = " + e.get(cfg) + "\n";
    }
    return out;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& e : entries())
        if (std::string(e.key) != "dgp.variant") j[e.key] = e.get(cfg);
    return j;
}

}  // namespace dgp
