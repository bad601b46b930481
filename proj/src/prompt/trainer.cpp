#include <iostream>
#include <numeric>
#include <set>

#include "dgp/metrics.hpp"
#include "dgp/prompt.hpp"

namespace dgp {

namespace {

double validation_auc(const ValidationSet& val, DgpModel& model, double gamma) {
    std::vector<double> id, ood;
    for (const auto& s : score_graphs(val.id, model, gamma)) id.push_back(s.score);
    for (const auto& s : score_graphs(val.ood, model, gamma)) ood.push_back(s.score);
    return auc(id, ood);
}

}  // namespace

TrainResult train_dgp(std::span<const LabeledGraph> train, const GinEncoder& encoder, std::size_t class_count,
                      const DgpConfig& cfg, const ValidationSet* validation, std::ostream* log) {
    if (train.empty()) throw std::invalid_argument("train_dgp: empty training set");
    if (!encoder.frozen()) throw std::invalid_argument("train_dgp: encoder must be frozen");
    if (class_count < 2) throw std::invalid_argument("train_dgp: need at least two classes");
    if (cfg.batch_size == 0) throw std::invalid_argument("train_dgp: batch size must be positive");
    const std::string hash_before = encoder_hash(encoder);
    {
        std::set<std::size_t> labels;
        for (const auto& lg : train) labels.insert(lg.label);
        if (labels.size() < 2)
            std::cerr << "warning: training set has a single class; the class-specific loss is degenerate\n";
    }

    TrainResult result;
    result.model = DgpModel::init(encoder, class_count, cfg);
    DgpModel& m = result.model;

    std::vector<Tensor> reps;
    reps.reserve(train.size());
    for (const auto& lg : train) reps.push_back(node_representations(lg.graph, m.encoder));

    const bool use1 = cfg.branches != Branches::AgnosticOnly;
    const bool use2 = cfg.branches != Branches::SpecificOnly;
    const bool cs_on = use1;
    const bool ca_on = use2 && (cfg.branches == Branches::AgnosticOnly || cfg.lambda != 0.0);
    const double a1 = use1 ? cfg.alpha1 : 0.0;
    const double a2 = use2 ? cfg.alpha2 : 0.0;

    MahalanobisScorer unprompted_ref;
    if (cfg.distance_reference == DistanceReference::Unprompted || cfg.standardize) {
        std::vector<LabeledGraph> all(train.begin(), train.end());
        const Tensor plain = embed_graphs(all, m.encoder);
        if (cfg.distance_reference == DistanceReference::Unprompted) {
            ScorerOptions opts = cfg.scorer;
            opts.seed = derive_seed(cfg.seed, "kmeans-ref");
            unprompted_ref = MahalanobisScorer::fit(plain, opts);
        }
        if (cfg.standardize) set_standardization(m.predictor, plain);
    }
    if (cfg.standardize) {
        std::size_t total = 0;
        for (const auto& r : reps) total += r.rows();
        Tensor nodes(total, reps.front().cols());
        std::size_t at = 0;
        for (const auto& r : reps)
            for (std::size_t i = 0; i < r.rows(); ++i, ++at)
                for (std::size_t j = 0; j < r.cols(); ++j) nodes(at, j) = r(i, j);
        set_standardization(m.gen1, nodes);
        set_standardization(m.gen2, nodes);
    }

    const AdamOptions opt{cfg.lr};
    AdamState p1_gen1, p1_gen2, p1_pred, p2_gen1, p2_gen2;
    Rng order_rng(derive_seed(cfg.seed, "dgp-order"));
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    const bool early_stop = validation != nullptr && cfg.patience > 0;
    double best_auc = -1.0;
    std::size_t since_best = 0;
    ParamSet best_gen1, best_gen2, best_pred;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        refit_stats(train, m, reps);
        const MahalanobisScorer& ref1 =
            cfg.distance_reference == DistanceReference::Prompted ? m.stats1 : unprompted_ref;
        const MahalanobisScorer& ref2 =
            cfg.distance_reference == DistanceReference::Prompted ? m.stats2 : unprompted_ref;

        order_rng.shuffle(order);
        EpochRecord rec;
        rec.epoch = epoch;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<LabeledGraph> batch;
            std::vector<Tensor> batch_reps;
            for (std::size_t k = start; k < end; ++k) {
                batch.push_back(train[order[k]]);
                batch_reps.push_back(reps[order[k]]);
            }

            // Phase 1: generators and predictor on the disentangle loss.
            ad::Var loss1;
            if (cs_on && ca_on) loss1 = disentangle_loss(batch, m, cfg.lambda, batch_reps);
            else if (cs_on) loss1 = class_specific_loss(batch, m, batch_reps);
            else loss1 = ad::scale(class_agnostic_loss(batch, m, batch_reps), cfg.lambda == 0.0 ? 1.0 : cfg.lambda);
            ad::backward(loss1);
            if (cs_on) adam_step(m.gen1, p1_gen1, opt);
            if (ca_on) adam_step(m.gen2, p1_gen2, opt);
            adam_step(m.predictor, p1_pred, opt);
            rec.disentangle += loss1.item();

            // Phase 2: generators only, predictor fixed, on the distance loss.
            if (a1 != 0.0 || a2 != 0.0) {
                const ad::Var loss2 = distance_loss(batch, m, a1, a2, ref1, ref2, batch_reps);
                ad::backward(loss2);
                if (a1 != 0.0) adam_step(m.gen1, p2_gen1, opt);
                if (a2 != 0.0) adam_step(m.gen2, p2_gen2, opt);
                rec.distance += loss2.item();
            }
            m.predictor.zero_grad();
            ++batches;
        }
        rec.disentangle /= static_cast<double>(batches);
        rec.distance /= static_cast<double>(batches);

        if (early_stop && epoch % std::max<std::size_t>(cfg.eval_every, 1) == 0) {
            refit_stats(train, m, reps);
            rec.val_auc = validation_auc(*validation, m, cfg.gamma);
            if (rec.val_auc > best_auc) {
                best_auc = rec.val_auc;
                best_gen1 = m.gen1;
                best_gen2 = m.gen2;
                best_pred = m.predictor;
                result.best_epoch = epoch;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                result.history.push_back(rec);
                if (log) *log << rec.epoch << "," << rec.disentangle << "," << rec.distance << "," << rec.val_auc << "\n";
                break;
            }
        }
        result.history.push_back(rec);
        if (log) *log << rec.epoch << "," << rec.disentangle << "," << rec.distance << "," << rec.val_auc << "\n";
    }

    if (early_stop && best_auc >= 0.0) {
        m.gen1 = best_gen1;
        m.gen2 = best_gen2;
        m.predictor = best_pred;
    } else {
        result.best_epoch = result.history.empty() ? 0 : result.history.back().epoch;
    }
    refit_stats(train, m, reps);

    if (encoder_hash(m.encoder) != hash_before || encoder_hash(encoder) != hash_before)
        throw std::logic_error("train_dgp: frozen encoder parameters changed");
    return result;
}

}  // namespace dgp
