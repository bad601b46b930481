#include <cmath>

#include "dgp/prompt.hpp"

namespace dgp {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "DGP";
        case Variant::V0: return "V0";
        case Variant::V1: return "V1";
        case Variant::V2: return "V2";
    }
    return "?";
}

DgpConfig apply_variant(DgpConfig cfg, Variant v) {
    switch (v) {
        case Variant::Full: break;
        case Variant::V0:
            cfg.branches = Branches::SpecificOnly;
            cfg.lambda = 0.0;
            cfg.alpha2 = 0.0;
            cfg.gamma = 0.0;
            break;
        case Variant::V1:
            cfg.branches = Branches::AgnosticOnly;
            cfg.alpha1 = 0.0;
            break;
        case Variant::V2:
            cfg.alpha1 = 0.0;
            cfg.alpha2 = 0.0;
            break;
    }
    return cfg;
}

ParamSet make_generator(std::size_t concat_dim, std::size_t hidden, double init_bias, Rng& rng) {
    ParamSet ps;
    add_mlp2(ps, "mlp", 2 * concat_dim, hidden, 1, rng);
    ps.at("mlp.1.weight").value.fill(0.0);
    ps.at("mlp.1.bias").value.fill(init_bias);
    ps.add("norm.shift", Tensor(1, concat_dim, 0.0)).frozen = true;
    ps.add("norm.scale", Tensor(1, concat_dim, 1.0)).frozen = true;
    return ps;
}

ParamSet make_predictor(std::size_t embed_dim, std::size_t hidden, std::size_t classes, Rng& rng) {
    ParamSet ps;
    add_mlp2(ps, "mlp", embed_dim, hidden, classes, rng);
    // Fixed input standardisation, set once from unprompted training embeddings.
    ps.add("norm.shift", Tensor(1, embed_dim, 0.0)).frozen = true;
    ps.add("norm.scale", Tensor(1, embed_dim, 1.0)).frozen = true;
    return ps;
}

void set_standardization(ParamSet& params, const Tensor& embeddings) {
    const std::size_t n = embeddings.rows(), d = embeddings.cols();
    if (n == 0) throw std::invalid_argument("set_standardization: no rows");
    Tensor& shift = params.at("norm.shift").value;
    Tensor& scale = params.at("norm.scale").value;
    if (shift.cols() != d) throw ShapeError("set_standardization: width mismatch");
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0;
        for (std::size_t i = 0; i < n; ++i) mean += embeddings(i, j);
        mean /= static_cast<double>(n);
        double var = 0;
        for (std::size_t i = 0; i < n; ++i) var += (embeddings(i, j) - mean) * (embeddings(i, j) - mean);
        var /= static_cast<double>(n);
        shift(0, j) = mean;
        // dead dimensions stay unscaled
        scale(0, j) = var > 1e-12 ? 1.0 / std::sqrt(var) : 1.0;
    }
}

Tensor node_representations(const Graph& g, GinEncoder& enc) {
    if (!enc.frozen()) {
        GinEncoder frozen = enc;
        frozen.freeze();
        return encode_nodes(g, frozen).concat.value();
    }
    return encode_nodes(g, enc).concat.value();
}

ad::Var gen_edge_weights(const Graph& g, const Tensor& node_reps, ParamSet& gen) {
    const std::size_t d = node_reps.cols();
    if (node_reps.rows() != g.node_count) throw ShapeError("gen_edge_weights: node_reps rows != node count");
    const ad::Var w1 = ad::leaf(gen.at("mlp.0.weight"));
    if (w1.rows() != 2 * d)
        throw ShapeError("gen_edge_weights: generator expects input width " + std::to_string(w1.rows()) +
                         ", node reps give " + std::to_string(2 * d));
    // First layer on concat(a_i, a_j) split into per-node halves before the gather.
    Tensor x = node_reps;
    const Tensor& shift = gen.at("norm.shift").value;
    const Tensor& scale = gen.at("norm.scale").value;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = (x(i, j) - shift(0, j)) * scale(0, j);
    const ad::Var reps = ad::constant(x);
    const ad::Var from_src = ad::matmul(reps, ad::slice_rows(w1, 0, d));
    const ad::Var from_dst = ad::matmul(reps, ad::slice_rows(w1, d, 2 * d));
    const auto src = g.sources();
    const auto dst = g.targets();
    const ad::Var pre = ad::add(ad::gather_rows(from_src, src), ad::gather_rows(from_dst, dst));
    const ad::Var hidden = ad::relu(ad::add_bias(pre, ad::leaf(gen.at("mlp.0.bias"))));
    return ad::sigmoid(linear(hidden, gen, "mlp.1"));
}

ad::Var gen_edge_weights(const Graph& g, ParamSet& gen, GinEncoder& enc) {
    return gen_edge_weights(g, node_representations(g, enc), gen);
}

BranchOutput branch_forward(const Graph& g, const Tensor& node_reps, ParamSet& gen, GinEncoder& enc,
                            ParamSet& predictor) {
    BranchOutput out;
    out.weights = gen_edge_weights(g, node_reps, gen);
    out.h = encode_graph(g, out.weights, enc);
    const ad::Var x = ad::mul(ad::sub(out.h, ad::constant(predictor.at("norm.shift").value)),
                              ad::constant(predictor.at("norm.scale").value));
    out.log_z = ad::log_softmax_rows(mlp2(x, predictor, "mlp"));
    return out;
}

DgpModel DgpModel::init(const GinEncoder& frozen_encoder, std::size_t class_count, const DgpConfig& cfg) {
    if (!frozen_encoder.frozen()) throw std::invalid_argument("DGP requires a frozen encoder");
    DgpModel m;
    m.encoder = frozen_encoder;
    m.encoder_hash = dgp::encoder_hash(frozen_encoder);
    m.class_count = class_count;
    m.config = cfg;
    Rng rng(derive_seed(cfg.seed, "dgp-init"));
    const std::size_t d = frozen_encoder.arch.concat_dim();
    m.gen1 = make_generator(d, cfg.gen_hidden, cfg.gen_init_bias, rng);
    m.gen2 = make_generator(d, cfg.gen_hidden, cfg.gen_init_bias, rng);
    m.predictor = make_predictor(frozen_encoder.arch.proj_dim, cfg.pred_hidden, class_count, rng);
    return m;
}

}  // namespace dgp
