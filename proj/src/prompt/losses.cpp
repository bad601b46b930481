#include <cmath>

#include "dgp/prompt.hpp"

namespace dgp {

namespace {

std::vector<Tensor> reps_for(std::span<const LabeledGraph> batch, DgpModel& model, RepCache reps) {
    if (!reps.empty()) {
        if (reps.size() != batch.size()) throw std::invalid_argument("rep cache does not match batch");
        return {reps.begin(), reps.end()};
    }
    std::vector<Tensor> out;
    out.reserve(batch.size());
    for (const auto& lg : batch) out.push_back(node_representations(lg.graph, model.encoder));
    return out;
}

ParamSet& generator(DgpModel& model, int branch) { return branch == 1 ? model.gen1 : model.gen2; }

ad::Var stacked_log_z(std::span<const LabeledGraph> batch, DgpModel& model, int branch,
                      const std::vector<Tensor>& reps) {
    std::vector<ad::Var> rows;
    rows.reserve(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k)
        rows.push_back(
            branch_forward(batch[k].graph, reps[k], generator(model, branch), model.encoder, model.predictor).log_z);
    return ad::concat_rows(rows);
}

}  // namespace

ad::Var class_specific_loss(std::span<const LabeledGraph> batch, DgpModel& model, RepCache reps) {
    if (batch.empty()) throw std::invalid_argument("class_specific_loss: empty batch");
    const std::size_t c = model.class_count;
    Tensor target(batch.size(), c);
    for (std::size_t k = 0; k < batch.size(); ++k) {
        if (batch[k].label >= c)
            throw std::invalid_argument("label " + std::to_string(batch[k].label) + " >= class count " +
                                        std::to_string(c));
        target(k, batch[k].label) = 1.0;
    }
    return ad::cross_entropy(stacked_log_z(batch, model, 1, reps_for(batch, model, reps)), target);
}

ad::Var class_agnostic_loss(std::span<const LabeledGraph> batch, DgpModel& model, RepCache reps) {
    if (batch.empty()) throw std::invalid_argument("class_agnostic_loss: empty batch");
    const std::size_t c = model.class_count;
    const Tensor uniform(batch.size(), c, 1.0 / static_cast<double>(c));
    return ad::cross_entropy(stacked_log_z(batch, model, 2, reps_for(batch, model, reps)), uniform);
}

ad::Var disentangle_loss(std::span<const LabeledGraph> batch, DgpModel& model, double lambda, RepCache reps) {
    const auto cached = reps_for(batch, model, reps);
    const ad::Var cs = class_specific_loss(batch, model, cached);
    if (lambda == 0.0) return cs;
    return ad::add(cs, ad::scale(class_agnostic_loss(batch, model, cached), lambda));
}

ad::Var distance_loss(std::span<const LabeledGraph> batch, DgpModel& model, double alpha1, double alpha2,
                      const MahalanobisScorer& ref1, const MahalanobisScorer& ref2, RepCache reps) {
    if (batch.empty()) throw std::invalid_argument("distance_loss: empty batch");
    const auto cached = reps_for(batch, model, reps);
    ad::Var total;
    const double alphas[] = {alpha1, alpha2};
    const MahalanobisScorer* refs[] = {&ref1, &ref2};
    for (int b = 1; b <= 2; ++b) {
        const double alpha = alphas[b - 1];
        if (alpha == 0.0) continue;
        std::vector<ad::Var> mds;
        mds.reserve(batch.size());
        for (std::size_t k = 0; k < batch.size(); ++k) {
            const Graph& g = batch[k].graph;
            const ad::Var h = encode_graph(g, gen_edge_weights(g, cached[k], generator(model, b)), model.encoder);
            mds.push_back(refs[b - 1]->score(h));
        }
        const ad::Var mean_md = ad::scale(ad::sum(ad::concat_rows(mds)), 1.0 / static_cast<double>(batch.size()));
        const ad::Var term = ad::scale(ad::reciprocal(mean_md), alpha);
        total = total.valid() ? ad::add(total, term) : term;
    }
    return total.valid() ? total : ad::constant(0.0);
}

ad::Var distance_loss(std::span<const LabeledGraph> batch, DgpModel& model, double alpha1, double alpha2,
                      RepCache reps) {
    return distance_loss(batch, model, alpha1, alpha2, model.stats1, model.stats2, reps);
}

Tensor branch_embeddings(std::span<const LabeledGraph> graphs, DgpModel& model, int branch, RepCache reps) {
    ParamSet gen = generator(model, branch);
    gen.freeze_all();
    Tensor out(graphs.size(), model.encoder.arch.proj_dim);
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        const Graph& g = graphs[k].graph;
        const Tensor rep = reps.empty() ? node_representations(g, model.encoder) : reps[k];
        const Tensor h = encode_graph(g, gen_edge_weights(g, rep, gen), model.encoder).value();
        std::copy(h.values().begin(), h.values().end(), out.row_span(k).begin());
    }
    return out;
}

void refit_stats(std::span<const LabeledGraph> graphs, DgpModel& model, RepCache reps) {
    ScorerOptions opts = model.config.scorer;
    opts.seed = derive_seed(model.config.seed, "kmeans-1");
    model.stats1 = MahalanobisScorer::fit(branch_embeddings(graphs, model, 1, reps), opts);
    opts.seed = derive_seed(model.config.seed, "kmeans-2");
    model.stats2 = MahalanobisScorer::fit(branch_embeddings(graphs, model, 2, reps), opts);
}

GraphScore score_graph(const Graph& g, DgpModel& model, double gamma) {
    const LabeledGraph lg{g, 0};
    return score_graphs(std::span<const LabeledGraph>(&lg, 1), model, gamma).front();
}

std::vector<GraphScore> score_graphs(std::span<const LabeledGraph> graphs, DgpModel& model, double gamma) {
    if (!model.stats1.fitted() || !model.stats2.fitted()) throw std::logic_error("model statistics are not fitted");
    ParamSet gen1 = model.gen1, gen2 = model.gen2;
    gen1.freeze_all();
    gen2.freeze_all();
    std::vector<GraphScore> out;
    out.reserve(graphs.size());
    for (const auto& lg : graphs) {
        const Graph& g = lg.graph;
        const Tensor rep = node_representations(g, model.encoder);
        GraphScore s;
        s.md1 = model.stats1.score(encode_graph(g, gen_edge_weights(g, rep, gen1), model.encoder).value().values());
        s.md2 = model.stats2.score(encode_graph(g, gen_edge_weights(g, rep, gen2), model.encoder).value().values());
        switch (model.config.branches) {
            case Branches::Both: s.score = s.md1 + gamma * s.md2; break;
            case Branches::SpecificOnly: s.score = s.md1; break;
            case Branches::AgnosticOnly: s.score = s.md2; break;
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace dgp
