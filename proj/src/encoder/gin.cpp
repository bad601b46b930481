#include <numeric>

#include "dgp/encoder.hpp"
#include "dgp/nn.hpp"

namespace dgp {

std::size_t GinArch::concat_dim() const {
    return std::accumulate(layer_dims.begin(), layer_dims.end(), std::size_t{0});
}

GinEncoder GinEncoder::create(const GinArch& arch, Rng& rng) {
    if (arch.layer_dims.empty()) throw std::invalid_argument("GIN needs at least one layer");
    GinEncoder enc;
    enc.arch = arch;
    std::size_t in = arch.feature_dim;
    for (std::size_t l = 0; l < arch.layer_dims.size(); ++l) {
        const std::string p = "gin." + std::to_string(l);
        enc.params.add(p + ".eps", Tensor(1, 1));
        add_mlp2(enc.params, p + ".mlp", in, arch.gin_hidden, arch.layer_dims[l], rng);
        in = arch.layer_dims[l];
    }
    add_mlp2(enc.params, "proj", arch.concat_dim(), arch.proj_dim, arch.proj_dim, rng);
    return enc;
}

bool GinEncoder::frozen() const {
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i].frozen) return false;
    return true;
}

ad::Var unit_weights(const Graph& g) { return ad::constant(Tensor(g.edge_count(), 1, 1.0)); }

NodeReps encode_nodes(const Graph& g, const ad::Var& weights, GinEncoder& enc) {
    if (g.feature_dim() != enc.arch.feature_dim) {
        throw ShapeError("encode_nodes: graph feature dim " + std::to_string(g.feature_dim()) +
                         " != encoder feature dim " + std::to_string(enc.arch.feature_dim));
    }
    if (weights.rows() != g.edge_count() || weights.cols() != 1) {
        throw ShapeError("encode_nodes: expected " + std::to_string(g.edge_count()) +
                         " edge weights, got " + shape_str(weights.value()));
    }
    const auto src = g.sources();
    const auto dst = g.targets();
    NodeReps reps;
    ad::Var h = ad::constant(g.features);
    for (std::size_t l = 0; l < enc.arch.layer_dims.size(); ++l) {
        const std::string p = "gin." + std::to_string(l);
        ad::Var messages = ad::mul_rows(ad::gather_rows(h, src), weights);
        ad::Var agg = ad::scatter_add_rows(messages, dst, g.node_count);
        ad::Var self = ad::scale_by(h, ad::add_scalar(ad::leaf(enc.params.at(p + ".eps")), 1.0));
        h = mlp2(ad::add(self, agg), enc.params, p + ".mlp");
        reps.layers.push_back(h);
    }
    reps.concat = ad::concat_cols(reps.layers);
    return reps;
}

NodeReps encode_nodes(const Graph& g, GinEncoder& enc) { return encode_nodes(g, unit_weights(g), enc); }

ad::Var readout(const NodeReps& reps, Pooling pooling) {
    if (reps.concat.rows() == 0) throw ShapeError("readout: graph has no nodes");
    return pooling == Pooling::Sum ? ad::sum_rows(reps.concat) : ad::mean_rows(reps.concat);
}

ad::Var project(const ad::Var& pooled, GinEncoder& enc) {
    if (pooled.cols() != enc.arch.concat_dim())
        throw ShapeError("project: pooled width " + std::to_string(pooled.cols()) +
                         " != concat dim " + std::to_string(enc.arch.concat_dim()));
    return mlp2(pooled, enc.params, "proj");
}

ad::Var encode_graph(const Graph& g, const ad::Var& weights, GinEncoder& enc) {
    return project(readout(encode_nodes(g, weights, enc), enc.arch.pooling), enc);
}

ad::Var encode_graph(const Graph& g, GinEncoder& enc) { return encode_graph(g, unit_weights(g), enc); }

Tensor embed_graphs(const std::vector<LabeledGraph>& graphs, GinEncoder& enc) {
    // Frozen copy so no backward closures are recorded.
    GinEncoder frozen = enc;
    frozen.freeze();
    Tensor out(graphs.size(), enc.arch.proj_dim);
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        const Tensor h = encode_graph(graphs[k].graph, frozen).value();
        std::copy(h.values().begin(), h.values().end(), out.row_span(k).begin());
    }
    return out;
}

}  // namespace dgp
