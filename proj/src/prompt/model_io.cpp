#include "dgp/prompt.hpp"

namespace dgp {

namespace {

const char* branches_name(Branches b) {
    switch (b) {
        case Branches::Both: return "both";
        case Branches::SpecificOnly: return "specific";
        case Branches::AgnosticOnly: return "agnostic";
    }
    return "both";
}

Branches branches_from(const std::string& s) {
    if (s == "both") return Branches::Both;
    if (s == "specific") return Branches::SpecificOnly;
    if (s == "agnostic") return Branches::AgnosticOnly;
    throw FormatError("unknown branches '" + s + "'");
}

nlohmann::json config_json(const DgpConfig& c) {
    return {{"lambda", c.lambda},
            {"gamma", c.gamma},
            {"alpha1", c.alpha1},
            {"alpha2", c.alpha2},
            {"lr", c.lr},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"gen_hidden", c.gen_hidden},
            {"pred_hidden", c.pred_hidden},
            {"gen_init_bias", c.gen_init_bias},
            {"branches", branches_name(c.branches)},
            {"distance_reference", c.distance_reference == DistanceReference::Prompted ? "prompted" : "unprompted"},
            {"clusters", c.scorer.clusters},
            {"eps_reg", c.scorer.eps_reg},
            {"eps_d", c.scorer.eps_d},
            {"standardize", c.standardize},
            {"eval_every", c.eval_every},
            {"patience", c.patience},
            {"seed", c.seed}};
}

DgpConfig config_from(const nlohmann::json& j) {
    DgpConfig c;
    c.lambda = j.at("lambda");
    c.gamma = j.at("gamma");
    c.alpha1 = j.at("alpha1");
    c.alpha2 = j.at("alpha2");
    c.lr = j.at("lr");
    c.epochs = j.at("epochs");
    c.batch_size = j.at("batch_size");
    c.gen_hidden = j.at("gen_hidden");
    c.pred_hidden = j.at("pred_hidden");
    c.gen_init_bias = j.at("gen_init_bias");
    c.branches = branches_from(j.at("branches"));
    c.distance_reference =
        j.at("distance_reference") == "prompted" ? DistanceReference::Prompted : DistanceReference::Unprompted;
    c.scorer.clusters = j.at("clusters");
    c.scorer.eps_reg = j.at("eps_reg");
    c.scorer.eps_d = j.at("eps_d");
    c.standardize = j.at("standardize");
    c.eval_every = j.at("eval_every");
    c.patience = j.at("patience");
    c.seed = j.at("seed");
    return c;
}

void put_params(Container& c, const std::string& prefix, const ParamSet& ps) {
    for (std::size_t i = 0; i < ps.size(); ++i) c.tensors.push_back({prefix + "." + ps[i].name, ps[i].value});
}

void take_params(const Container& c, const std::string& prefix, ParamSet& ps) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const Tensor& t = c.tensor(prefix + "." + ps[i].name);
        if (!t.same_shape(ps[i].value)) throw FormatError("shape mismatch for '" + prefix + "." + ps[i].name + "'");
        ps[i].value = t;
    }
}

void put_stats(Container& c, nlohmann::json& meta, const std::string& prefix, const MahalanobisScorer& s) {
    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t k = 0; k < s.cluster_count(); ++k) {
        const ClusterStats& cs = s.stats()[k];
        const std::string p = prefix + "." + std::to_string(k);
        c.tensors.push_back({p + ".mean", cs.mean});
        c.tensors.push_back({p + ".cov", cs.cov});
        c.tensors.push_back({p + ".inv", cs.inv});
        clusters.push_back({{"ridge", cs.ridge}, {"count", cs.count}});
    }
    meta[prefix] = {{"clusters", clusters}, {"eps_d", s.eps_d()}};
}

MahalanobisScorer take_stats(const Container& c, const std::string& prefix) {
    const auto& m = c.meta.at(prefix);
    std::vector<ClusterStats> stats;
    const auto& clusters = m.at("clusters");
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        const std::string p = prefix + "." + std::to_string(k);
        ClusterStats cs;
        cs.mean = c.tensor(p + ".mean");
        cs.cov = c.tensor(p + ".cov");
        cs.inv = c.tensor(p + ".inv");
        cs.ridge = clusters[k].at("ridge");
        cs.count = clusters[k].at("count");
        stats.push_back(std::move(cs));
    }
    return MahalanobisScorer::from_stats(std::move(stats), m.at("eps_d"));
}

}  // namespace

std::string serialize_model(const DgpModel& model) {
    if (!model.stats1.fitted() || !model.stats2.fitted()) throw std::logic_error("model statistics are not fitted");
    Container c;
    c.meta["kind"] = "dgp-model";
    c.meta["encoder_hash"] = model.encoder_hash;
    c.meta["class_count"] = model.class_count;
    c.meta["config"] = config_json(model.config);
    put_params(c, "gen1", model.gen1);
    put_params(c, "gen2", model.gen2);
    put_params(c, "pred", model.predictor);
    put_stats(c, c.meta, "stats1", model.stats1);
    put_stats(c, c.meta, "stats2", model.stats2);
    return serialize_container(c);
}

DgpModel deserialize_model(const std::string& bytes, const GinEncoder& encoder) {
    const Container c = deserialize_container(bytes);
    if (c.meta.value("kind", "") != "dgp-model") throw FormatError("not a dgp model file");
    const std::string hash = c.meta.at("encoder_hash");
    GinEncoder enc = encoder;
    enc.freeze();
    if (encoder_hash(enc) != hash) throw FormatError("model was trained against a different encoder");
    DgpModel m = DgpModel::init(enc, c.meta.at("class_count"), config_from(c.meta.at("config")));
    take_params(c, "gen1", m.gen1);
    take_params(c, "gen2", m.gen2);
    take_params(c, "pred", m.predictor);
    m.stats1 = take_stats(c, "stats1");
    m.stats2 = take_stats(c, "stats2");
    return m;
}

void save_model(const DgpModel& model, const std::filesystem::path& path) { write_file(path, serialize_model(model)); }

DgpModel load_model(const std::filesystem::path& path, const GinEncoder& encoder) {
    return deserialize_model(read_file(path), encoder);
}

}  // namespace dgp
