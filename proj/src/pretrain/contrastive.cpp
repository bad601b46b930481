#include <numeric>
#include <ostream>

#include "dgp/pretrain.hpp"

namespace dgp {

ad::Var ntxent_loss(const ad::Var& z1, const ad::Var& z2, double tau) {
    const std::size_t b = z1.rows();
    if (b < 2 || z2.rows() != b) throw std::invalid_argument("ntxent_loss needs two views of >= 2 rows");
    if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");
    const ad::Var parts[] = {z1, z2};
    const ad::Var z = ad::l2_normalize_rows(ad::concat_rows(parts));
    const ad::Var sim = ad::scale(ad::matmul(z, ad::transpose(z)), 1.0 / tau);
    const ad::Var logp = ad::log_softmax_rows(sim, /*exclude_diagonal=*/true);
    std::vector<std::pair<std::size_t, std::size_t>> positives;
    positives.reserve(2 * b);
    for (std::size_t i = 0; i < b; ++i) positives.emplace_back(i, i + b);
    for (std::size_t i = 0; i < b; ++i) positives.emplace_back(i + b, i);
    return ad::scale(ad::sum(ad::pick(logp, positives)), -1.0 / static_cast<double>(2 * b));
}

EncoderCheckpoint random_encoder(const GinArch& arch, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "encoder-init"));
    EncoderCheckpoint ckpt;
    ckpt.encoder = GinEncoder::create(arch, rng);
    ckpt.pretrain_method = "random";
    ckpt.hyperparams = {{"seed", seed}};
    return ckpt;
}

PretrainResult pretrain(const GraphDataset& ds, const PretrainConfig& cfg, std::ostream* log) {
    if (ds.graphs.empty()) throw std::invalid_argument("pretrain: empty dataset");
    if (cfg.batch_size < 2) throw std::invalid_argument("pretrain: batch size must be >= 2");
    GinArch arch = cfg.arch;
    arch.feature_dim = ds.feature_dim;

    PretrainResult result;
    result.checkpoint = random_encoder(arch, cfg.seed);
    GinEncoder& enc = result.checkpoint.encoder;
    AdamState adam;
    const AdamOptions opt{cfg.lr};
    Rng order_rng(derive_seed(cfg.seed, "pretrain-order"));

    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(order);
        const std::uint64_t epoch_seed = derive_seed(cfg.seed, epoch + 1);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            if (end - start < 2) continue;
            std::vector<ad::Var> view1, view2;
            if (cfg.method == PretrainMethod::GraphCL) {
                for (std::size_t k = start; k < end; ++k) {
                    const Graph& g = ds.graphs[order[k]].graph;
                    Rng rng(derive_seed(epoch_seed, order[k]));
                    view1.push_back(encode_graph(augment(g, cfg.aug1, rng), enc));
                    view2.push_back(encode_graph(augment(g, cfg.aug2, rng), enc));
                }
            } else {
                // Second view comes from a perturbed copy and carries no gradient.
                Rng rng(derive_seed(epoch_seed, start));
                GinEncoder perturbed = perturb_params(enc, cfg.eta, rng);
                perturbed.freeze();
                for (std::size_t k = start; k < end; ++k) {
                    const Graph& g = ds.graphs[order[k]].graph;
                    view1.push_back(encode_graph(g, enc));
                    view2.push_back(encode_graph(g, perturbed));
                }
            }
            const ad::Var loss = ntxent_loss(ad::concat_rows(view1), ad::concat_rows(view2), cfg.tau);
            ad::backward(loss);
            adam_step(enc.params, adam, opt);
            loss_sum += loss.item();
            ++batches;
        }
        const double epoch_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
        result.epoch_losses.push_back(epoch_loss);
        if (log) *log << epoch + 1 << "," << epoch_loss << "\n";
    }

    result.checkpoint.pretrain_method = cfg.method == PretrainMethod::GraphCL ? "graphcl" : "simgrace";
    result.checkpoint.hyperparams = {{"tau", cfg.tau},       {"batch_size", cfg.batch_size},
                                     {"epochs", cfg.epochs}, {"lr", cfg.lr},
                                     {"seed", cfg.seed}};
    if (cfg.method == PretrainMethod::GraphCL) {
        result.checkpoint.hyperparams["aug1"] = cfg.aug1.str();
        result.checkpoint.hyperparams["aug2"] = cfg.aug2.str();
    } else {
        result.checkpoint.hyperparams["eta"] = cfg.eta;
    }
    return result;
}

}  // namespace dgp
